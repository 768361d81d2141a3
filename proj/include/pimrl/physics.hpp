#pragma once

#include <vector>

#include "pimrl/field.hpp"

namespace pimrl {

enum class DerivKind { laplacian, d3x };

// Odd-extent finite-difference kernel. Halo width is derived from the
// extent, never configured.
struct Stencil {
  DerivKind kind;
  int dims = 1;                // 1 or 2
  int extent = 3;              // per spatial dim
  double h = 1.0;              // grid spacing
  std::vector<double> coeffs;  // extent (1D) or extent*extent (2D), C-order

  int halo() const { return (extent - 1) / 2; }
};

// 1D [1,-2,1]/h^2 or the 2D 5-point Laplacian /h^2.
Stencil laplacian_stencil(double h, int dims);

// 1D five-point third derivative [-1,2,0,-2,1]/(2h^3).
Stencil d3x_stencil(double h);

struct PaddedField {
  Field padded;  // extents grown by 2*halo per spatial dim
  int halo = 0;
};

// Wraps the interior periodically into halo cells.
PaddedField pad_periodic(const Field& field, int halo);

// Inverse of pad_periodic (drops the halo).
Field crop_halo(const PaddedField& pf);

// Periodic cross-correlation of every channel with the stencil;
// output shape equals input shape. Index-wrapping implementation,
// deliberately independent of the tensor-engine conv path.
Field apply_stencil(const Field& field, const Stencil& s);

}  // namespace pimrl
