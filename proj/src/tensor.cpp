#include "pimrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

namespace pimrl {

long numel(const Shape& s) {
  long n = 1;
  for (int e : s) n *= e;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

const Shape& Tensor::shape() const { return graph->node(id).shape; }
const std::vector<double>& Tensor::values() const { return graph->node(id).values; }
const std::vector<double>& Tensor::grad() const { return graph->node(id).grad; }
bool Tensor::requires_grad() const { return graph->node(id).requires_grad; }

Tensor Graph::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != static_cast<long>(values.size()))
    throw ShapeError("leaf: " + std::to_string(values.size()) + " values for shape " +
                     shape_str(shape));
  return emplace(std::move(shape), std::move(values), requires_grad && recording_, {}, {});
}

Tensor Graph::emplace(Shape shape, std::vector<double> values, bool requires_grad,
                      std::vector<int> parents, std::function<void(Graph&)> backward_fn) {
  Node n;
  n.shape = std::move(shape);
  n.values = std::move(values);
  if (recording_) n.grad.assign(n.values.size(), 0.0);
  n.requires_grad = requires_grad && recording_;
  if (n.requires_grad) {
    n.parents = std::move(parents);
    n.backward_fn = std::move(backward_fn);
  }
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Tensor root) {
  if (root.graph != this) throw ShapeError("backward: tensor belongs to another graph");
  if (!recording_) throw ShapeError("backward: graph was created without recording");
  Node& r = node(root.id);
  if (numel(r.shape) != 1)
    throw ShapeError("backward: root must be scalar, got shape " + shape_str(r.shape));
  // Interior grads are scratch for this sweep; leaf grads accumulate.
  for (int id = 0; id <= root.id; ++id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.is_leaf()) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  }
  r.grad[0] += 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.backward_fn) n.backward_fn(*this);
  }
}

void Graph::zero_grad() {
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

namespace {

Graph& same_graph(Tensor a, Tensor b, const char* op) {
  if (a.graph == nullptr || b.graph == nullptr || a.graph != b.graph)
    throw ShapeError(std::string(op) + ": tensors belong to different graphs");
  return *a.graph;
}

void check_same_shape(Tensor a, Tensor b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

bool want_grad(std::initializer_list<Tensor> ts) {
  for (Tensor t : ts)
    if (t.requires_grad()) return true;
  return false;
}

// Elementwise binary op with per-element pullbacks captured as lambdas.
template <class Fwd, class BwdA, class BwdB>
Tensor binary_elementwise(const char* op, Tensor a, Tensor b, Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
  Graph& g = same_graph(a, b, op);
  check_same_shape(a, b, op);
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
  const bool rg = g.recording() && want_grad({a, b});
  Tensor out_t = g.emplace(a.shape(), std::move(out), rg, {a.id, b.id}, {});
  if (rg) {
    const int aid = a.id, bid = b.id, oid = out_t.id;
    g.node(oid).backward_fn = [aid, bid, oid, bwd_a, bwd_b](Graph& gr) {
      const Node& o = gr.node(oid);
      Node& an = gr.node(aid);
      Node& bn = gr.node(bid);
      const std::size_t n = o.values.size();
      if (an.requires_grad)
        for (std::size_t i = 0; i < n; ++i)
          an.grad[i] += bwd_a(an.values[i], bn.values[i]) * o.grad[i];
      if (bn.requires_grad)
        for (std::size_t i = 0; i < n; ++i)
          bn.grad[i] += bwd_b(an.values[i], bn.values[i]) * o.grad[i];
    };
  }
  return out_t;
}

}  // namespace

Tensor add(Tensor a, Tensor b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(Tensor a, Tensor b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor elementwise_mul(Tensor a, Tensor b) {
  return binary_elementwise(
      "elementwise_mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor scalar_mul(Tensor a, double factor) {
  Graph& g = *a.graph;
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * factor;
  const bool rg = g.recording() && a.requires_grad();
  Tensor out_t = g.emplace(a.shape(), std::move(out), rg, {a.id}, {});
  if (rg) {
    const int aid = a.id, oid = out_t.id;
    g.node(oid).backward_fn = [aid, oid, factor](Graph& gr) {
      const Node& o = gr.node(oid);
      Node& an = gr.node(aid);
      for (std::size_t i = 0; i < o.grad.size(); ++i) an.grad[i] += factor * o.grad[i];
    };
  }
  return out_t;
}

namespace {

template <class Fwd, class Bwd>
Tensor unary_elementwise(Tensor a, Fwd fwd, Bwd bwd_from_output) {
  Graph& g = *a.graph;
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.values()[i]);
  const bool rg = g.recording() && a.requires_grad();
  Tensor out_t = g.emplace(a.shape(), std::move(out), rg, {a.id}, {});
  if (rg) {
    const int aid = a.id, oid = out_t.id;
    g.node(oid).backward_fn = [aid, oid, bwd_from_output](Graph& gr) {
      const Node& o = gr.node(oid);
      Node& an = gr.node(aid);
      for (std::size_t i = 0; i < o.grad.size(); ++i)
        an.grad[i] += bwd_from_output(o.values[i]) * o.grad[i];
    };
  }
  return out_t;
}

}  // namespace

Tensor tanh(Tensor a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Tensor sigmoid(Tensor a) {
  auto sig = [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return unary_elementwise(a, sig, [](double y) { return y * (1.0 - y); });
}

namespace {

Tensor reduction(Tensor a, double scale) {
  Graph& g = *a.graph;
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  acc *= scale;
  const bool rg = g.recording() && a.requires_grad();
  Tensor out_t = g.emplace({1}, {acc}, rg, {a.id}, {});
  if (rg) {
    const int aid = a.id, oid = out_t.id;
    g.node(oid).backward_fn = [aid, oid, scale](Graph& gr) {
      const double go = gr.node(oid).grad[0] * scale;
      Node& an = gr.node(aid);
      for (double& gv : an.grad) gv += go;
    };
  }
  return out_t;
}

}  // namespace

Tensor sum(Tensor a) { return reduction(a, 1.0); }

Tensor mean(Tensor a) { return reduction(a, 1.0 / static_cast<double>(numel(a.shape()))); }

Tensor mse(Tensor a, Tensor b) {
  Graph& g = same_graph(a, b, "mse");
  check_same_shape(a, b, "mse");
  const auto& av = a.values();
  const auto& bv = b.values();
  const double inv_n = 1.0 / static_cast<double>(av.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  const bool rg = g.recording() && want_grad({a, b});
  Tensor out_t = g.emplace({1}, {acc * inv_n}, rg, {a.id, b.id}, {});
  if (rg) {
    const int aid = a.id, bid = b.id, oid = out_t.id;
    g.node(oid).backward_fn = [aid, bid, oid, inv_n](Graph& gr) {
      const double go = gr.node(oid).grad[0];
      Node& an = gr.node(aid);
      Node& bn = gr.node(bid);
      for (std::size_t i = 0; i < an.values.size(); ++i) {
        const double d = 2.0 * inv_n * (an.values[i] - bn.values[i]) * go;
        if (an.requires_grad) an.grad[i] += d;
        if (bn.requires_grad) bn.grad[i] -= d;
      }
    };
  }
  return out_t;
}

// ---------------------------------------------------------------------------
// Convolution. 1D inputs are treated as 2D with a singleton y axis so one
// code path serves both. Periodic padding is materialized into a halo
// buffer; backward folds halo gradients back onto wrapped cells.

namespace {

struct ConvPlan {
  int rank = 3;                    // original input rank (2 -> 1D, 3 -> 2D)
  int ic = 0, oc = 0;
  int ny = 1, nx = 0;              // input spatial extents
  int ky = 1, kx = 0;              // kernel extents
  int oy = 1, ox = 0;              // output spatial extents
  int py = 1, px = 0;              // padded spatial extents
  int offy = 0, offx = 0;          // halo offset (periodic only)
  int stride = 1;
  Padding padding = Padding::periodic;
  Shape out_shape;
};

int conv_out_extent(int n, int k, int stride, Padding pad, const char* axis) {
  if (pad == Padding::periodic) {
    if (k % 2 == 0)
      throw ShapeError(std::string("conv: periodic padding needs odd kernel extent, got ") +
                       std::to_string(k) + " on " + axis);
    if (n % stride != 0)
      throw ShapeError(std::string("conv: extent ") + std::to_string(n) + " on " + axis +
                       " not divisible by stride " + std::to_string(stride));
    return n / stride;
  }
  if (n < k)
    throw ShapeError(std::string("conv: input extent ") + std::to_string(n) + " on " + axis +
                     " smaller than kernel " + std::to_string(k));
  if ((n - k) % stride != 0)
    throw ShapeError(std::string("conv: (extent - kernel) not divisible by stride on ") + axis);
  return (n - k) / stride + 1;
}

ConvPlan plan_conv(const Shape& xs, const Shape& ks, const std::optional<Shape>& bs,
                   const ConvOpts& opts) {
  ConvPlan p;
  if (xs.size() != 2 && xs.size() != 3)
    throw ShapeError("conv: input must be [ch,x] or [ch,y,x], got " + shape_str(xs));
  if (ks.size() != xs.size() + 1)
    throw ShapeError("conv: kernel rank does not match input: " + shape_str(xs) +
                     " vs kernel " + shape_str(ks));
  if (opts.stride != 1 && opts.stride != 2)
    throw ShapeError("conv: stride must be 1 or 2, got " + std::to_string(opts.stride));
  p.rank = static_cast<int>(xs.size());
  p.stride = opts.stride;
  p.padding = opts.padding;
  p.ic = xs[0];
  p.oc = ks[0];
  if (ks[1] != p.ic)
    throw ShapeError("conv: kernel input channels mismatch: input " + shape_str(xs) +
                     " vs kernel " + shape_str(ks));
  if (p.rank == 2) {
    p.nx = xs[1];
    p.kx = ks[2];
  } else {
    p.ny = xs[1];
    p.nx = xs[2];
    p.ky = ks[2];
    p.kx = ks[3];
  }
  p.ox = conv_out_extent(p.nx, p.kx, p.stride, p.padding, "x");
  if (p.rank == 3) p.oy = conv_out_extent(p.ny, p.ky, p.stride, p.padding, "y");
  if (p.padding == Padding::periodic) {
    p.offx = (p.kx - 1) / 2;
    p.offy = (p.ky - 1) / 2;
    p.px = p.nx + p.kx - 1;
    p.py = p.ny + p.ky - 1;
  } else {
    p.px = p.nx;
    p.py = p.ny;
  }
  if (bs && (bs->size() != 1 || (*bs)[0] != p.oc))
    throw ShapeError("conv: bias shape " + shape_str(*bs) + " does not match out channels " +
                     std::to_string(p.oc));
  p.out_shape = (p.rank == 2) ? Shape{p.oc, p.ox} : Shape{p.oc, p.oy, p.ox};
  return p;
}

// Wrapped input copy with halo. For Padding::none this is the identity copy
// (py == ny, px == nx); the copy keeps the kernels uniform.
std::vector<double> pad_input(const ConvPlan& p, const std::vector<double>& x) {
  std::vector<double> xp(static_cast<std::size_t>(p.ic) * p.py * p.px);
  const long plane = static_cast<long>(p.ny) * p.nx;
  const long pplane = static_cast<long>(p.py) * p.px;
  for (int ic = 0; ic < p.ic; ++ic) {
    const double* src = x.data() + ic * plane;
    double* dst = xp.data() + ic * pplane;
    for (int yy = 0; yy < p.py; ++yy) {
      const int iy = ((yy - p.offy) % p.ny + p.ny) % p.ny;
      const double* srow = src + static_cast<long>(iy) * p.nx;
      double* drow = dst + static_cast<long>(yy) * p.px;
      for (int xx = 0; xx < p.px; ++xx) {
        const int ix = ((xx - p.offx) % p.nx + p.nx) % p.nx;
        drow[xx] = srow[ix];
      }
    }
  }
  return xp;
}

void conv_forward(const ConvPlan& p, const std::vector<double>& xp, const std::vector<double>& k,
                  const double* bias, std::vector<double>& out) {
  const long oplane = static_cast<long>(p.oy) * p.ox;
  const long pplane = static_cast<long>(p.py) * p.px;
  const long kplane = static_cast<long>(p.ky) * p.kx;
  for (int oc = 0; oc < p.oc; ++oc) {
    double* o = out.data() + oc * oplane;
    const double b = bias ? bias[oc] : 0.0;
    std::fill(o, o + oplane, b);
    for (int ic = 0; ic < p.ic; ++ic) {
      const double* xip = xp.data() + ic * pplane;
      const double* kk = k.data() + (static_cast<long>(oc) * p.ic + ic) * kplane;
      for (int qy = 0; qy < p.ky; ++qy) {
        for (int qx = 0; qx < p.kx; ++qx) {
          const double w = kk[qy * p.kx + qx];
          if (w == 0.0) continue;
          for (int py = 0; py < p.oy; ++py) {
            const double* xrow = xip + static_cast<long>(p.stride * py + qy) * p.px + qx;
            double* orow = o + static_cast<long>(py) * p.ox;
            if (p.stride == 1) {
              for (int px = 0; px < p.ox; ++px) orow[px] += w * xrow[px];
            } else {
              for (int px = 0; px < p.ox; ++px) orow[px] += w * xrow[2 * px];
            }
          }
        }
      }
    }
  }
}

// Scatter padded-grad cells back onto the wrapped interior.
void fold_padded_grad(const ConvPlan& p, const std::vector<double>& dxp, std::vector<double>& dx) {
  const long plane = static_cast<long>(p.ny) * p.nx;
  const long pplane = static_cast<long>(p.py) * p.px;
  for (int ic = 0; ic < p.ic; ++ic) {
    const double* src = dxp.data() + ic * pplane;
    double* dst = dx.data() + ic * plane;
    for (int yy = 0; yy < p.py; ++yy) {
      const int iy = ((yy - p.offy) % p.ny + p.ny) % p.ny;
      const double* srow = src + static_cast<long>(yy) * p.px;
      double* drow = dst + static_cast<long>(iy) * p.nx;
      for (int xx = 0; xx < p.px; ++xx) {
        const int ix = ((xx - p.offx) % p.nx + p.nx) % p.nx;
        drow[ix] += srow[xx];
      }
    }
  }
}

}  // namespace

Tensor conv(Tensor x, Tensor kernel, std::optional<Tensor> bias, ConvOpts opts) {
  Graph& g = same_graph(x, kernel, "conv");
  std::optional<Shape> bias_shape;
  if (bias) {
    same_graph(x, *bias, "conv");
    bias_shape = bias->shape();
  }
  const ConvPlan p = plan_conv(x.shape(), kernel.shape(), bias_shape, opts);

  const std::vector<double> xp = pad_input(p, x.values());
  std::vector<double> out(static_cast<std::size_t>(numel(p.out_shape)));
  conv_forward(p, xp, kernel.values(), bias ? bias->values().data() : nullptr, out);

  const bool rg =
      g.recording() && (x.requires_grad() || kernel.requires_grad() || (bias && bias->requires_grad()));
  std::vector<int> parents{x.id, kernel.id};
  if (bias) parents.push_back(bias->id);
  Tensor out_t = g.emplace(p.out_shape, std::move(out), rg, std::move(parents), {});
  if (!rg) return out_t;

  const int xid = x.id, kid = kernel.id, oid = out_t.id;
  const int bias_id = bias ? bias->id : -1;
  g.node(oid).backward_fn = [p, xid, kid, bias_id, oid](Graph& gr) {
    const Node& o = gr.node(oid);
    Node& xn = gr.node(xid);
    Node& kn = gr.node(kid);
    const long oplane = static_cast<long>(p.oy) * p.ox;
    const long pplane = static_cast<long>(p.py) * p.px;
    const long kplane = static_cast<long>(p.ky) * p.kx;

    if (bias_id >= 0) {
      Node& bn = gr.node(bias_id);
      if (bn.requires_grad) {
        for (int oc = 0; oc < p.oc; ++oc) {
          const double* dy = o.grad.data() + oc * oplane;
          double acc = 0.0;
          for (long i = 0; i < oplane; ++i) acc += dy[i];
          bn.grad[oc] += acc;
        }
      }
    }

    const bool need_dk = kn.requires_grad;
    const bool need_dx = xn.requires_grad;
    std::vector<double> xp_b;
    if (need_dk) xp_b = pad_input(p, xn.values);

    if (need_dk) {
      for (int oc = 0; oc < p.oc; ++oc) {
        const double* dy = o.grad.data() + oc * oplane;
        for (int ic = 0; ic < p.ic; ++ic) {
          const double* xip = xp_b.data() + ic * pplane;
          double* dk = kn.grad.data() + (static_cast<long>(oc) * p.ic + ic) * kplane;
          for (int qy = 0; qy < p.ky; ++qy) {
            for (int qx = 0; qx < p.kx; ++qx) {
              double acc = 0.0;
              for (int py = 0; py < p.oy; ++py) {
                const double* xrow = xip + static_cast<long>(p.stride * py + qy) * p.px + qx;
                const double* dyrow = dy + static_cast<long>(py) * p.ox;
                if (p.stride == 1) {
                  for (int px = 0; px < p.ox; ++px) acc += dyrow[px] * xrow[px];
                } else {
                  for (int px = 0; px < p.ox; ++px) acc += dyrow[px] * xrow[2 * px];
                }
              }
              dk[qy * p.kx + qx] += acc;
            }
          }
        }
      }
    }

    if (need_dx) {
      std::vector<double> dxp(static_cast<std::size_t>(p.ic) * pplane, 0.0);
      for (int oc = 0; oc < p.oc; ++oc) {
        const double* dy = o.grad.data() + oc * oplane;
        for (int ic = 0; ic < p.ic; ++ic) {
          double* dxip = dxp.data() + ic * pplane;
          const double* kk = kn.values.data() + (static_cast<long>(oc) * p.ic + ic) * kplane;
          for (int qy = 0; qy < p.ky; ++qy) {
            for (int qx = 0; qx < p.kx; ++qx) {
              const double w = kk[qy * p.kx + qx];
              if (w == 0.0) continue;
              for (int py = 0; py < p.oy; ++py) {
                double* xrow = dxip + static_cast<long>(p.stride * py + qy) * p.px + qx;
                const double* dyrow = dy + static_cast<long>(py) * p.ox;
                if (p.stride == 1) {
                  for (int px = 0; px < p.ox; ++px) xrow[px] += w * dyrow[px];
                } else {
                  for (int px = 0; px < p.ox; ++px) xrow[2 * px] += w * dyrow[px];
                }
              }
            }
          }
        }
      }
      if (p.padding == Padding::periodic) {
        fold_padded_grad(p, dxp, xn.grad);
      } else {
        for (std::size_t i = 0; i < dxp.size(); ++i) xn.grad[i] += dxp[i];
      }
    }
  };
  return out_t;
}

Tensor conv_1x1(Tensor x, Tensor weight) {
  Graph& g = same_graph(x, weight, "conv_1x1");
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.size() < 2)
    throw ShapeError("conv_1x1: input must have channels and spatial dims, got " + shape_str(xs));
  if (ws.size() != 2 || ws[1] != xs[0])
    throw ShapeError("conv_1x1: weight " + shape_str(ws) + " does not map input " + shape_str(xs));
  const int ic = xs[0], oc = ws[0];
  long sp = 1;
  for (std::size_t i = 1; i < xs.size(); ++i) sp *= xs[i];

  std::vector<double> out(static_cast<std::size_t>(oc) * sp, 0.0);
  const auto& xv = x.values();
  const auto& wv = weight.values();
  for (int o = 0; o < oc; ++o) {
    double* orow = out.data() + o * sp;
    for (int i = 0; i < ic; ++i) {
      const double w = wv[static_cast<std::size_t>(o) * ic + i];
      if (w == 0.0) continue;
      const double* xrow = xv.data() + i * sp;
      for (long s = 0; s < sp; ++s) orow[s] += w * xrow[s];
    }
  }
  Shape out_shape = xs;
  out_shape[0] = oc;
  const bool rg = g.recording() && want_grad({x, weight});
  Tensor out_t = g.emplace(std::move(out_shape), std::move(out), rg, {x.id, weight.id}, {});
  if (!rg) return out_t;

  const int xid = x.id, wid = weight.id, oid = out_t.id;
  g.node(oid).backward_fn = [xid, wid, oid, ic, oc, sp](Graph& gr) {
    const Node& o = gr.node(oid);
    Node& xn = gr.node(xid);
    Node& wn = gr.node(wid);
    if (wn.requires_grad) {
      for (int ocn = 0; ocn < oc; ++ocn) {
        const double* dy = o.grad.data() + ocn * sp;
        for (int icn = 0; icn < ic; ++icn) {
          const double* xrow = xn.values.data() + icn * sp;
          double acc = 0.0;
          for (long s = 0; s < sp; ++s) acc += dy[s] * xrow[s];
          wn.grad[static_cast<std::size_t>(ocn) * ic + icn] += acc;
        }
      }
    }
    if (xn.requires_grad) {
      for (int ocn = 0; ocn < oc; ++ocn) {
        const double* dy = o.grad.data() + ocn * sp;
        for (int icn = 0; icn < ic; ++icn) {
          const double w = wn.values[static_cast<std::size_t>(ocn) * ic + icn];
          if (w == 0.0) continue;
          double* dx = xn.grad.data() + icn * sp;
          for (long s = 0; s < sp; ++s) dx[s] += w * dy[s];
        }
      }
    }
  };
  return out_t;
}

Tensor upsample2_nearest(Tensor x) {
  Graph& g = *x.graph;
  const Shape& xs = x.shape();
  if (xs.size() != 2 && xs.size() != 3)
    throw ShapeError("upsample2_nearest: input must be [ch,x] or [ch,y,x], got " + shape_str(xs));
  const int ch = xs[0];
  const int ny = (xs.size() == 3) ? xs[1] : 1;
  const int nx = xs.back();
  const int uy = (xs.size() == 3) ? 2 * ny : 1;
  const int ux = 2 * nx;
  Shape out_shape = (xs.size() == 3) ? Shape{ch, uy, ux} : Shape{ch, ux};

  const auto& xv = x.values();
  std::vector<double> out(static_cast<std::size_t>(ch) * uy * ux);
  for (int c = 0; c < ch; ++c) {
    for (int yy = 0; yy < uy; ++yy) {
      const int iy = (xs.size() == 3) ? yy / 2 : 0;
      const double* srow = xv.data() + (static_cast<long>(c) * ny + iy) * nx;
      double* drow = out.data() + (static_cast<long>(c) * uy + yy) * ux;
      for (int xx = 0; xx < ux; ++xx) drow[xx] = srow[xx / 2];
    }
  }
  const bool rg = g.recording() && x.requires_grad();
  Tensor out_t = g.emplace(std::move(out_shape), std::move(out), rg, {x.id}, {});
  if (!rg) return out_t;

  const int xid = x.id, oid = out_t.id;
  const bool two_d = (xs.size() == 3);
  g.node(oid).backward_fn = [xid, oid, ch, ny, nx, uy, ux, two_d](Graph& gr) {
    const Node& o = gr.node(oid);
    Node& xn = gr.node(xid);
    for (int c = 0; c < ch; ++c) {
      for (int yy = 0; yy < uy; ++yy) {
        const int iy = two_d ? yy / 2 : 0;
        const double* srow = o.grad.data() + (static_cast<long>(c) * uy + yy) * ux;
        double* drow = xn.grad.data() + (static_cast<long>(c) * ny + iy) * nx;
        for (int xx = 0; xx < ux; ++xx) drow[xx / 2] += srow[xx];
      }
    }
  };
  return out_t;
}

Tensor forward_op(const std::string& op_kind, const std::vector<Tensor>& inputs,
                  const OpAttrs& attrs) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n)
      throw ConfigError("forward_op: '" + op_kind + "' expects " + std::to_string(n) +
                        " inputs, got " + std::to_string(inputs.size()));
  };
  if (op_kind == "add") {
    need(2);
    return add(inputs[0], inputs[1]);
  }
  if (op_kind == "sub") {
    need(2);
    return sub(inputs[0], inputs[1]);
  }
  if (op_kind == "elementwise_mul") {
    need(2);
    return elementwise_mul(inputs[0], inputs[1]);
  }
  if (op_kind == "scalar_mul") {
    need(1);
    return scalar_mul(inputs[0], attrs.scalar);
  }
  if (op_kind == "tanh") {
    need(1);
    return tanh(inputs[0]);
  }
  if (op_kind == "sigmoid") {
    need(1);
    return sigmoid(inputs[0]);
  }
  if (op_kind == "sum") {
    need(1);
    return sum(inputs[0]);
  }
  if (op_kind == "mean") {
    need(1);
    return mean(inputs[0]);
  }
  if (op_kind == "mse") {
    need(2);
    return mse(inputs[0], inputs[1]);
  }
  if (op_kind == "conv") {
    if (inputs.size() == 2)
      return conv(inputs[0], inputs[1], std::nullopt, ConvOpts{attrs.padding, attrs.stride});
    need(3);
    return conv(inputs[0], inputs[1], inputs[2], ConvOpts{attrs.padding, attrs.stride});
  }
  if (op_kind == "conv_1x1") {
    need(2);
    return conv_1x1(inputs[0], inputs[1]);
  }
  if (op_kind == "upsample2_nearest") {
    need(1);
    return upsample2_nearest(inputs[0]);
  }
  throw ConfigError("forward_op: unknown op_kind '" + op_kind + "'");
}

}  // namespace pimrl
