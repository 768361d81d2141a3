#include "pimrl/physics.hpp"

#include <algorithm>

#include "pimrl/errors.hpp"

namespace pimrl {

Stencil laplacian_stencil(double h, int dims) {
  if (!(h > 0.0)) throw ConfigError("laplacian_stencil: h must be > 0");
  if (dims != 1 && dims != 2) throw ConfigError("laplacian_stencil: dims must be 1 or 2");
  Stencil s;
  s.kind = DerivKind::laplacian;
  s.dims = dims;
  s.extent = 3;
  s.h = h;
  const double ih2 = 1.0 / (h * h);
  if (dims == 1) {
    s.coeffs = {ih2, -2.0 * ih2, ih2};
  } else {
    s.coeffs = {0.0, ih2, 0.0, ih2, -4.0 * ih2, ih2, 0.0, ih2, 0.0};
  }
  return s;
}

Stencil d3x_stencil(double h) {
  if (!(h > 0.0)) throw ConfigError("d3x_stencil: h must be > 0");
  Stencil s;
  s.kind = DerivKind::d3x;
  s.dims = 1;
  s.extent = 5;
  s.h = h;
  const double c = 1.0 / (2.0 * h * h * h);
  s.coeffs = {-c, 2.0 * c, 0.0, -2.0 * c, c};
  return s;
}

PaddedField pad_periodic(const Field& field, int halo) {
  if (halo < 1) throw ConfigError("pad_periodic: halo must be >= 1");
  for (int e : field.extents)
    if (halo > e)
      throw ConfigError("pad_periodic: halo " + std::to_string(halo) +
                        " exceeds spatial extent " + std::to_string(e));

  PaddedField out;
  out.halo = halo;
  std::vector<int> pext = field.extents;
  for (int& e : pext) e += 2 * halo;
  out.padded = Field(field.channels, pext);

  if (field.extents.size() == 1) {
    const int n = field.extents[0];
    const int pn = n + 2 * halo;
    for (int c = 0; c < field.channels; ++c) {
      const double* src = field.channel(c);
      double* dst = out.padded.channel(c);
      for (int i = 0; i < pn; ++i) dst[i] = src[((i - halo) % n + n) % n];
    }
  } else {
    const int ny = field.extents[0], nx = field.extents[1];
    const int py = ny + 2 * halo, px = nx + 2 * halo;
    for (int c = 0; c < field.channels; ++c) {
      const double* src = field.channel(c);
      double* dst = out.padded.channel(c);
      for (int y = 0; y < py; ++y) {
        const int iy = ((y - halo) % ny + ny) % ny;
        for (int x = 0; x < px; ++x) {
          const int ix = ((x - halo) % nx + nx) % nx;
          dst[static_cast<long>(y) * px + x] = src[static_cast<long>(iy) * nx + ix];
        }
      }
    }
  }
  return out;
}

Field crop_halo(const PaddedField& pf) {
  const int halo = pf.halo;
  std::vector<int> ext = pf.padded.extents;
  for (int& e : ext) e -= 2 * halo;
  Field out(pf.padded.channels, ext);
  if (ext.size() == 1) {
    const int n = ext[0];
    for (int c = 0; c < out.channels; ++c)
      std::copy_n(pf.padded.channel(c) + halo, n, out.channel(c));
  } else {
    const int ny = ext[0], nx = ext[1];
    const int px = nx + 2 * halo;
    for (int c = 0; c < out.channels; ++c)
      for (int y = 0; y < ny; ++y)
        std::copy_n(pf.padded.channel(c) + static_cast<long>(y + halo) * px + halo, nx,
                    out.channel(c) + static_cast<long>(y) * nx);
  }
  return out;
}

Field apply_stencil(const Field& field, const Stencil& s) {
  if (static_cast<int>(field.extents.size()) != s.dims)
    throw ShapeError("apply_stencil: field is " + std::to_string(field.extents.size()) +
                     "D but stencil is " + std::to_string(s.dims) + "D");
  Field out(field.channels, field.extents);
  const int halo = s.halo();
  if (s.dims == 1) {
    const int n = field.extents[0];
    for (int c = 0; c < field.channels; ++c) {
      const double* src = field.channel(c);
      double* dst = out.channel(c);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int q = 0; q < s.extent; ++q)
          acc += s.coeffs[q] * src[((i + q - halo) % n + n) % n];
        dst[i] = acc;
      }
    }
  } else {
    const int ny = field.extents[0], nx = field.extents[1];
    for (int c = 0; c < field.channels; ++c) {
      const double* src = field.channel(c);
      double* dst = out.channel(c);
      for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
          double acc = 0.0;
          for (int qy = 0; qy < s.extent; ++qy) {
            const int iy = ((y + qy - halo) % ny + ny) % ny;
            for (int qx = 0; qx < s.extent; ++qx) {
              const double w = s.coeffs[qy * s.extent + qx];
              if (w == 0.0) continue;
              const int ix = ((x + qx - halo) % nx + nx) % nx;
              acc += w * src[static_cast<long>(iy) * nx + ix];
            }
          }
          dst[static_cast<long>(y) * nx + x] = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace pimrl
