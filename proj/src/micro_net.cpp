#include "pimrl/micro_net.hpp"

#include <cmath>

#include "pimrl/errors.hpp"
#include "pimrl/field_tensor.hpp"

namespace pimrl {

std::vector<Param*> MicroModel::trainable() {
  std::vector<Param*> out;
  out.reserve(params.size());
  for (Param& p : params) out.push_back(&p);
  return out;
}

std::vector<const Param*> MicroModel::trainable() const {
  std::vector<const Param*> out;
  out.reserve(params.size());
  for (const Param& p : params) out.push_back(&p);
  return out;
}

std::vector<PhysicsTerm> physics_terms_for(const PdeCase& pde) {
  std::vector<PhysicsTerm> terms;
  switch (pde.name) {
    case CaseName::kdv:
      terms.push_back({0, d3x_stencil(pde.dx), -1.0});
      break;
    case CaseName::burgers2d:
      terms.push_back({0, laplacian_stencil(pde.dx, 2), pde.params.at("nu")});
      terms.push_back({1, laplacian_stencil(pde.dx, 2), pde.params.at("nu")});
      break;
    case CaseName::fn2d:
      terms.push_back({0, laplacian_stencil(pde.dx, 2), pde.params.at("mu_u")});
      terms.push_back({1, laplacian_stencil(pde.dx, 2), pde.params.at("mu_v")});
      break;
    case CaseName::gs2d:
      terms.push_back({0, laplacian_stencil(pde.dx, 2), pde.params.at("D_u")});
      terms.push_back({1, laplacian_stencil(pde.dx, 2), pde.params.at("D_v")});
      break;
  }
  return terms;
}

namespace {

void fill_normal(std::vector<double>& v, SplitMix64& rng, double stddev) {
  for (double& x : v) x = rng.normal() * stddev;
}

// Grouped conv kernel with coeff * stencil on the diagonal; all terms in
// one case share the stencil extent so a single conv applies them.
void assemble_physics_kernel(MicroModel& m, int n_fields, int dims) {
  if (m.terms.empty()) return;
  const int extent = m.terms[0].stencil.extent;
  for (const PhysicsTerm& t : m.terms)
    if (t.stencil.extent != extent)
      throw ConfigError("micro: physics terms with mixed stencil extents are not supported");
  const long kspatial = (dims == 1) ? extent : static_cast<long>(extent) * extent;
  m.physics_kernel_shape =
      (dims == 1) ? Shape{n_fields, n_fields, extent} : Shape{n_fields, n_fields, extent, extent};
  m.physics_kernel.assign(static_cast<std::size_t>(n_fields) * n_fields * kspatial, 0.0);
  for (const PhysicsTerm& t : m.terms) {
    double* dst =
        m.physics_kernel.data() + (static_cast<long>(t.field) * n_fields + t.field) * kspatial;
    for (long i = 0; i < kspatial; ++i) dst[i] += t.coeff * t.stencil.coeffs[i];
  }
}

}  // namespace

MicroModel make_micro_model(const PdeCase& pde, const MicroConfig& cfg_in, SplitMix64& rng) {
  MicroModel m;
  m.cfg = cfg_in;
  m.cfg.n_fields = pde.n_fields;
  m.cfg.dims = pde.dims;
  m.cfg.dt_micro = pde.dt_micro;
  if (m.cfg.kernel_size % 2 == 0) throw ConfigError("micro: kernel_size must be odd");

  const int ks = m.cfg.kernel_size;
  const Shape kshape = (m.cfg.dims == 1)
                           ? Shape{m.cfg.n_channels, m.cfg.n_fields, ks}
                           : Shape{m.cfg.n_channels, m.cfg.n_fields, ks, ks};
  const double fan_in =
      static_cast<double>(m.cfg.n_fields) * ((m.cfg.dims == 1) ? ks : ks * ks);
  const double stddev = 0.1 / std::sqrt(fan_in);
  for (int l = 0; l < m.cfg.n_layers; ++l) {
    Param k("micro.l" + std::to_string(l) + ".kernel", kshape);
    fill_normal(k.value, rng, stddev);
    m.params.push_back(std::move(k));
    m.params.emplace_back("micro.l" + std::to_string(l) + ".bias", Shape{m.cfg.n_channels});
  }
  Param comb("micro.combiner", Shape{m.cfg.n_fields, m.cfg.n_channels});
  fill_normal(comb.value, rng, 0.1 / std::sqrt(static_cast<double>(m.cfg.n_channels)));
  m.params.push_back(std::move(comb));

  if (m.cfg.physics_enabled) {
    m.terms = physics_terms_for(pde);
    assemble_physics_kernel(m, m.cfg.n_fields, m.cfg.dims);
  }
  return m;
}

MicroBinding bind_micro(Graph& g, const MicroModel& m, bool trainable) {
  MicroBinding b;
  b.cfg = &m.cfg;
  for (int l = 0; l < m.cfg.n_layers; ++l) {
    const Param& k = m.params[static_cast<std::size_t>(2 * l)];
    const Param& bias = m.params[static_cast<std::size_t>(2 * l) + 1];
    b.layer_kernels.push_back(g.leaf(k.shape, k.value, trainable));
    b.layer_biases.push_back(g.leaf(bias.shape, bias.value, trainable));
  }
  const Param& comb = m.params.back();
  b.combiner = g.leaf(comb.shape, comb.value, trainable);
  if (!m.physics_kernel.empty())
    b.physics_kernel = g.constant(m.physics_kernel_shape, m.physics_kernel);
  return b;
}

Tensor pi_block(Graph& g, const MicroBinding& b, Tensor u) {
  if (u.shape()[0] != b.cfg->n_fields)
    throw ShapeError("pi_block: input has " + std::to_string(u.shape()[0]) +
                     " channels, model expects " + std::to_string(b.cfg->n_fields));
  Tensor prod;
  for (std::size_t l = 0; l < b.layer_kernels.size(); ++l) {
    Tensor layer = conv(u, b.layer_kernels[l], b.layer_biases[l],
                        ConvOpts{Padding::periodic, 1});
    prod = (l == 0) ? layer : elementwise_mul(prod, layer);
  }
  return conv_1x1(prod, b.combiner);
}

Tensor micro_step(Graph& g, const MicroBinding& b, Tensor u) {
  Tensor fhat = pi_block(g, b, u);
  if (b.physics_kernel)
    fhat = add(fhat, conv(u, *b.physics_kernel, std::nullopt, ConvOpts{Padding::periodic, 1}));
  Tensor next = add(u, scalar_mul(fhat, b.cfg->dt_micro));
  for (double v : next.values())
    if (!std::isfinite(v))
      throw DivergenceError("micro", -1, "micro step produced non-finite values");
  return next;
}

std::vector<Tensor> micro_rollout(Graph& g, const MicroBinding& b, Tensor u0, int k_steps) {
  if (k_steps < 1) throw ConfigError("micro_rollout: k_steps must be >= 1");
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(k_steps));
  Tensor u = u0;
  for (int s = 0; s < k_steps; ++s) {
    try {
      u = micro_step(g, b, u);
    } catch (const DivergenceError&) {
      throw DivergenceError("micro", s + 1,
                            "micro rollout diverged at step " + std::to_string(s + 1));
    }
    out.push_back(u);
  }
  return out;
}

Field micro_step(const MicroModel& m, const Field& u) {
  Graph g(false);
  MicroBinding b = bind_micro(g, m, false);
  return field_from(micro_step(g, b, field_leaf(g, u)));
}

std::vector<Field> micro_rollout(const MicroModel& m, const Field& u0, int k_steps) {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(k_steps));
  Field u = u0;
  for (int s = 0; s < k_steps; ++s) {
    try {
      u = micro_step(m, u);
    } catch (const DivergenceError&) {
      throw DivergenceError("micro", s + 1,
                            "micro rollout diverged at step " + std::to_string(s + 1));
    }
    out.push_back(u);
  }
  return out;
}

}  // namespace pimrl
