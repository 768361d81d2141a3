#include "pimrl/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "pimrl/errors.hpp"

namespace pimrl {

std::string case_name_str(CaseName n) {
  switch (n) {
    case CaseName::kdv: return "kdv";
    case CaseName::burgers2d: return "burgers2d";
    case CaseName::fn2d: return "fn2d";
    case CaseName::gs2d: return "gs2d";
  }
  return "?";
}

CaseName parse_case_name(const std::string& s) {
  if (s == "kdv") return CaseName::kdv;
  if (s == "burgers2d") return CaseName::burgers2d;
  if (s == "fn2d") return CaseName::fn2d;
  if (s == "gs2d") return CaseName::gs2d;
  throw ConfigError("unknown case '" + s + "' (expected kdv|burgers2d|fn2d|gs2d)");
}

PdeCase make_case(CaseName name, int grid) {
  if (grid < 4) throw ConfigError("make_case: grid must be >= 4");
  PdeCase c;
  c.name = name;
  c.grid = grid;
  switch (name) {
    case CaseName::kdv:
      c.n_fields = 1;
      c.dims = 1;
      c.dx = 64.0 / 256.0;
      c.dt_micro = 0.01;
      c.substeps_per_micro = 100;
      break;
    case CaseName::burgers2d:
      c.n_fields = 2;
      c.dims = 2;
      c.dx = 1.0 / 128.0;
      c.dt_micro = 0.001;
      c.substeps_per_micro = 10;
      c.params = {{"nu", 0.005}};
      break;
    case CaseName::fn2d:
      c.n_fields = 2;
      c.dims = 2;
      c.dx = 128.0 / 128.0;
      c.dt_micro = 0.002;
      c.substeps_per_micro = 10;
      c.params = {{"alpha", 0.01}, {"beta", 0.25}, {"mu_u", 1.0}, {"mu_v", 100.0}};
      // 200 macro steps at the default k=15, counted in micro steps so the
      // warm-up does not depend on the sampling k.
      c.warmup_micro_steps = 200L * 15L;
      break;
    case CaseName::gs2d:
      c.n_fields = 2;
      c.dims = 2;
      c.dx = 1.0 / 128.0;
      c.dt_micro = 0.5;
      c.substeps_per_micro = 50;
      c.params = {{"D_u", 2.0e-5}, {"D_v", 5.0e-6}, {"F_feed", 0.04}, {"k_kill", 0.06}};
      break;
  }
  return c;
}

PdeCase make_case(const std::string& name, int grid) {
  return make_case(parse_case_name(name), grid);
}

void validate_params(const PdeCase& c) {
  const std::map<std::string, double> ref = make_case(c.name, c.grid).params;
  if (c.params.size() != ref.size())
    throw ConfigError("case " + case_name_str(c.name) + ": wrong parameter count");
  for (const auto& [k, v] : ref) {
    (void)v;
    if (c.params.find(k) == c.params.end())
      throw ConfigError("case " + case_name_str(c.name) + ": missing parameter '" + k + "'");
  }
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Field ic_kdv(const PdeCase& c, SplitMix64& rng) {
  Field f(1, {c.grid});
  const double L = c.domain_length();
  struct Mode {
    double amp, kappa, phase;
  };
  Mode modes[4];
  for (Mode& m : modes) {
    m.amp = rng.uniform(-1.0, 1.0);
    m.kappa = static_cast<double>(1 + rng.below(8));
    m.phase = rng.uniform(0.0, kTwoPi);
  }
  double* u = f.channel(0);
  for (int i = 0; i < c.grid; ++i) {
    const double x = i * c.dx;
    double acc = 0.0;
    for (const Mode& m : modes) acc += m.amp * std::sin(kTwoPi * m.kappa * x / L + m.phase);
    u[i] = acc;
  }
  return f;
}

// Smooth random field from low-wavenumber Fourier modes with Gaussian
// coefficients, rescaled to max |.| = 0.5 per field.
Field ic_burgers(const PdeCase& c, SplitMix64& rng) {
  Field f(2, {c.grid, c.grid});
  const int n = c.grid;
  for (int ch = 0; ch < 2; ++ch) {
    double* dst = f.channel(ch);
    for (int kx = 0; kx <= 4; ++kx) {
      for (int ky = 0; ky <= 4; ++ky) {
        if (kx == 0 && ky == 0) continue;
        const double w = std::exp(-(kx * kx + ky * ky) / 8.0);
        const double a = rng.normal() * w;
        const double b = rng.normal() * w;
        for (int y = 0; y < n; ++y) {
          const double fy = static_cast<double>(y) / n;
          for (int x = 0; x < n; ++x) {
            const double fx = static_cast<double>(x) / n;
            const double arg = kTwoPi * (kx * fx + ky * fy);
            dst[static_cast<long>(y) * n + x] += a * std::cos(arg) + b * std::sin(arg);
          }
        }
      }
    }
    double maxabs = 0.0;
    for (int i = 0; i < n * n; ++i) maxabs = std::max(maxabs, std::fabs(dst[i]));
    if (maxabs > 0.0) {
      const double scale = 0.5 / maxabs;
      for (int i = 0; i < n * n; ++i) dst[i] *= scale;
    }
  }
  return f;
}

Field ic_fn_noise(const PdeCase& c, SplitMix64& rng) {
  Field f(2, {c.grid, c.grid});
  for (double& v : f.data) v = rng.normal();
  return f;
}

Field ic_gs(const PdeCase& c, SplitMix64& rng) {
  const int n = c.grid;
  Field f(2, {n, n});
  double* u = f.channel(0);
  double* v = f.channel(1);
  for (int i = 0; i < n * n; ++i) {
    u[i] = 1.0;
    v[i] = 0.0;
  }
  const int side = std::min(10, n);
  for (int s = 0; s < 3; ++s) {
    const int cy = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - side + 1)));
    const int cx = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - side + 1)));
    for (int y = cy; y < cy + side; ++y) {
      for (int x = cx; x < cx + side; ++x) {
        u[static_cast<long>(y) * n + x] = 0.5;
        v[static_cast<long>(y) * n + x] = 0.25;
      }
    }
  }
  for (int i = 0; i < n * n; ++i) u[i] += rng.uniform(-0.01, 0.01);
  for (int i = 0; i < n * n; ++i) v[i] += rng.uniform(-0.01, 0.01);
  return f;
}

}  // namespace

Field generate_ic(const PdeCase& c, std::uint64_t seed) {
  SplitMix64 root(seed);
  SplitMix64 rng = root.split();
  Field f;
  switch (c.name) {
    case CaseName::kdv: f = ic_kdv(c, rng); break;
    case CaseName::burgers2d: f = ic_burgers(c, rng); break;
    case CaseName::fn2d: f = ic_fn_noise(c, rng); break;
    case CaseName::gs2d: f = ic_gs(c, rng); break;
  }
  if (c.warmup_micro_steps > 0) {
    ReferenceStepper stepper(c);
    const long total = c.warmup_micro_steps * c.substeps_per_micro;
    for (long i = 0; i < total; ++i) stepper.substep(f);
  }
  return f;
}

// ---------------------------------------------------------------------------

ReferenceStepper::ReferenceStepper(const PdeCase& c)
    : case_(c),
      k1_(c.n_fields, c.extents()),
      k2_(c.n_fields, c.extents()),
      k3_(c.n_fields, c.extents()),
      k4_(c.n_fields, c.extents()),
      tmp_(c.n_fields, c.extents()) {
  validate_params(c);
}

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

// KdV in flux form: u_t = -d/dx(u^2/2) - u_xxx, two-point flux average for
// the advection term (telescopes, so the discrete mass sum is conserved)
// and the five-point third-derivative stencil for dispersion.
void rhs_kdv(const PdeCase& c, const Field& s, Field& out) {
  const int n = c.grid;
  const double* u = s.channel(0);
  double* o = out.channel(0);
  const double inv2dx = 1.0 / (2.0 * c.dx);
  const double c3 = 1.0 / (2.0 * c.dx * c.dx * c.dx);
  for (int i = 0; i < n; ++i) {
    const int im2 = wrap(i - 2, n), im1 = wrap(i - 1, n);
    const int ip1 = wrap(i + 1, n), ip2 = wrap(i + 2, n);
    const double flux = (u[ip1] * u[ip1] - u[im1] * u[im1]) * 0.5 * inv2dx;
    const double uxxx = (-u[im2] + 2.0 * u[im1] - 2.0 * u[ip1] + u[ip2]) * c3;
    o[i] = -flux - uxxx;
  }
}

struct Idx2 {
  int n;
  long operator()(int y, int x) const {
    return static_cast<long>(wrap(y, n)) * n + wrap(x, n);
  }
};

void rhs_burgers(const PdeCase& c, const Field& s, Field& out) {
  const int n = c.grid;
  const Idx2 at{n};
  const double nu = c.params.at("nu");
  const double inv2dx = 1.0 / (2.0 * c.dx);
  const double ih2 = 1.0 / (c.dx * c.dx);
  const double* u = s.channel(0);
  const double* v = s.channel(1);
  double* ou = out.channel(0);
  double* ov = out.channel(1);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const long i = static_cast<long>(y) * n + x;
      const double uc = u[i], vc = v[i];
      const double ux = (u[at(y, x + 1)] - u[at(y, x - 1)]) * inv2dx;
      const double uy = (u[at(y + 1, x)] - u[at(y - 1, x)]) * inv2dx;
      const double vx = (v[at(y, x + 1)] - v[at(y, x - 1)]) * inv2dx;
      const double vy = (v[at(y + 1, x)] - v[at(y - 1, x)]) * inv2dx;
      const double lap_u =
          (u[at(y, x + 1)] + u[at(y, x - 1)] + u[at(y + 1, x)] + u[at(y - 1, x)] - 4.0 * uc) * ih2;
      const double lap_v =
          (v[at(y, x + 1)] + v[at(y, x - 1)] + v[at(y + 1, x)] + v[at(y - 1, x)] - 4.0 * vc) * ih2;
      ou[i] = -uc * ux - vc * uy + nu * lap_u;
      ov[i] = -uc * vx - vc * vy + nu * lap_v;
    }
  }
}

void rhs_fn(const PdeCase& c, const Field& s, Field& out) {
  const int n = c.grid;
  const Idx2 at{n};
  const double mu_u = c.params.at("mu_u");
  const double mu_v = c.params.at("mu_v");
  const double alpha = c.params.at("alpha");
  const double beta = c.params.at("beta");
  const double ih2 = 1.0 / (c.dx * c.dx);
  const double* u = s.channel(0);
  const double* v = s.channel(1);
  double* ou = out.channel(0);
  double* ov = out.channel(1);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const long i = static_cast<long>(y) * n + x;
      const double uc = u[i], vc = v[i];
      const double lap_u =
          (u[at(y, x + 1)] + u[at(y, x - 1)] + u[at(y + 1, x)] + u[at(y - 1, x)] - 4.0 * uc) * ih2;
      const double lap_v =
          (v[at(y, x + 1)] + v[at(y, x - 1)] + v[at(y + 1, x)] + v[at(y - 1, x)] - 4.0 * vc) * ih2;
      ou[i] = mu_u * lap_u + uc - uc * uc * uc - vc + alpha;
      ov[i] = mu_v * lap_v + (uc - vc) * beta;
    }
  }
}

void rhs_gs(const PdeCase& c, const Field& s, Field& out) {
  const int n = c.grid;
  const Idx2 at{n};
  const double du = c.params.at("D_u");
  const double dv = c.params.at("D_v");
  const double feed = c.params.at("F_feed");
  const double kill = c.params.at("k_kill");
  const double ih2 = 1.0 / (c.dx * c.dx);
  const double* u = s.channel(0);
  const double* v = s.channel(1);
  double* ou = out.channel(0);
  double* ov = out.channel(1);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const long i = static_cast<long>(y) * n + x;
      const double uc = u[i], vc = v[i];
      const double uvv = uc * vc * vc;
      const double lap_u =
          (u[at(y, x + 1)] + u[at(y, x - 1)] + u[at(y + 1, x)] + u[at(y - 1, x)] - 4.0 * uc) * ih2;
      const double lap_v =
          (v[at(y, x + 1)] + v[at(y, x - 1)] + v[at(y + 1, x)] + v[at(y - 1, x)] - 4.0 * vc) * ih2;
      ou[i] = du * lap_u - uvv + feed * (1.0 - uc);
      ov[i] = dv * lap_v + uvv - (feed + kill) * vc;
    }
  }
}

}  // namespace

void ReferenceStepper::rhs(const Field& s, Field& out) const {
  switch (case_.name) {
    case CaseName::kdv: rhs_kdv(case_, s, out); break;
    case CaseName::burgers2d: rhs_burgers(case_, s, out); break;
    case CaseName::fn2d: rhs_fn(case_, s, out); break;
    case CaseName::gs2d: rhs_gs(case_, s, out); break;
  }
}

void ReferenceStepper::substep(Field& state) {
  const double dt = case_.dt_sub();
  const std::size_t sz = state.data.size();

  rhs(state, k1_);
  for (std::size_t i = 0; i < sz; ++i) tmp_.data[i] = state.data[i] + 0.5 * dt * k1_.data[i];
  rhs(tmp_, k2_);
  for (std::size_t i = 0; i < sz; ++i) tmp_.data[i] = state.data[i] + 0.5 * dt * k2_.data[i];
  rhs(tmp_, k3_);
  for (std::size_t i = 0; i < sz; ++i) tmp_.data[i] = state.data[i] + dt * k3_.data[i];
  rhs(tmp_, k4_);
  for (std::size_t i = 0; i < sz; ++i)
    state.data[i] +=
        dt / 6.0 * (k1_.data[i] + 2.0 * k2_.data[i] + 2.0 * k3_.data[i] + k4_.data[i]);

  ++count_;
  if (!state.all_finite())
    throw DivergenceError("reference_solver", count_,
                          "reference solver produced non-finite values at substep " +
                              std::to_string(count_));
}

Field step_reference(const PdeCase& c, const Field& state) {
  if (state.channels != c.n_fields || state.extents != c.extents())
    throw ShapeError("step_reference: state " + field_shape_str(state) +
                     " does not match case grid");
  ReferenceStepper stepper(c);
  Field next = state;
  stepper.substep(next);
  return next;
}

// ---------------------------------------------------------------------------

MultiScaleTrajectory simulate(const PdeCase& c, std::uint64_t seed, double t_end, int k,
                              const BurstSpec& spec) {
  if (k < 1) throw ConfigError("simulate: k must be >= 1");
  const double dt_macro = k * c.dt_micro;
  const double frames_real = t_end / dt_macro;
  const long n_macro = std::lround(frames_real);
  if (n_macro < 1 || std::fabs(frames_real - static_cast<double>(n_macro)) > 1e-9)
    throw ConfigError("simulate: t_end must be a positive integer multiple of dt_macro");

  const int burst_len = spec.burst_len > 0 ? spec.burst_len : 2 * k + 1;
  if (spec.n_bursts > 0 && burst_len < k + 1)
    throw ConfigError("simulate: burst_len must be >= k+1 so a burst spans a macro interval");

  const long n_micro_last = n_macro * k;  // micro indices run 0..n_micro_last
  if (spec.n_bursts > 0 && burst_len - 1 > n_micro_last)
    throw ConfigError("simulate: burst does not fit inside the horizon");

  // Burst starts: uniform over macro-aligned micro indices, no overlap.
  const long max_start_macro = (n_micro_last - (burst_len - 1)) / k;
  std::vector<long> starts;
  {
    SplitMix64 root(seed);
    root.split();                   // stream 0 belongs to generate_ic
    SplitMix64 rng = root.split();  // stream 1: burst placement
    int attempts = 0;
    while (static_cast<int>(starts.size()) < spec.n_bursts) {
      if (++attempts > 10000)
        throw ConfigError("simulate: cannot place " + std::to_string(spec.n_bursts) +
                          " non-overlapping bursts inside the horizon");
      const long s = static_cast<long>(rng.below(static_cast<std::uint64_t>(max_start_macro + 1)));
      const long lo = s * k, hi = s * k + burst_len - 1;
      bool ok = true;
      for (long other : starts) {
        const long olo = other * k, ohi = other * k + burst_len - 1;
        if (lo <= ohi && olo <= hi) {
          ok = false;
          break;
        }
      }
      if (ok) starts.push_back(s);
    }
    std::sort(starts.begin(), starts.end());
  }

  MultiScaleTrajectory traj;
  traj.pde = c;
  traj.seed = seed;
  traj.k = k;
  traj.macro_frames.reserve(static_cast<std::size_t>(n_macro) + 1);
  traj.bursts.reserve(starts.size());
  for (long s : starts) traj.bursts.push_back(Burst{s, {}});

  Field state = generate_ic(c, seed);
  ReferenceStepper stepper(c);

  auto record = [&](long micro_index) {
    if (micro_index % k == 0) traj.macro_frames.push_back(state);
    for (std::size_t b = 0; b < traj.bursts.size(); ++b) {
      const long lo = traj.bursts[b].start_macro_index * k;
      if (micro_index >= lo && micro_index < lo + burst_len)
        traj.bursts[b].frames.push_back(state);
    }
  };

  record(0);
  for (long m = 1; m <= n_micro_last; ++m) {
    for (int s = 0; s < c.substeps_per_micro; ++s) stepper.substep(state);
    record(m);
  }
  return traj;
}

}  // namespace pimrl
