#include "liyau/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "liyau/parallel.hpp"

namespace liyau {

void validate_spec(const QuadratureSpec& spec) {
  if (spec.order_per_axis < 2) throw Error(ErrorCode::BadInput, "order_per_axis must be >= 2");
  if (spec.order_per_axis > 128) throw Error(ErrorCode::OrderTooLarge, "order_per_axis capped at 128");
  if (spec.steps_per_axis < 8) throw Error(ErrorCode::BadInput, "steps_per_axis must be >= 8");
  if (!(spec.truncation_radius >= 4.0)) throw Error(ErrorCode::BadInput, "truncation_radius must be >= 4");
}

namespace {

// Orthonormal Hermite functions for the weight exp(-z^2):
//   p_0 = pi^{-1/4},  p_{k+1} = z sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1},
//   p_N'(z) = sqrt(2N) p_{N-1}(z).
// Returns (p_N, p_{N-1}).
std::pair<double, double> hermite_pair(int order, double z) {
  double pk = std::pow(std::numbers::pi, -0.25);
  double pkm1 = 0.0;
  for (int k = 0; k < order; ++k) {
    const double pk1 = z * std::sqrt(2.0 / (k + 1)) * pk - std::sqrt(double(k) / (k + 1)) * pkm1;
    pkm1 = pk;
    pk = pk1;
  }
  return {pk, pkm1};
}

double find_root(int order, double lo, double hi) {
  double flo = hermite_pair(order, lo).first;
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [p, pm1] = hermite_pair(order, z);
    const double deriv = std::sqrt(2.0 * order) * pm1;
    double zn = z - p / deriv;
    if (!(zn > lo && zn < hi)) {
      // Newton left the bracket: bisect instead
      if ((p > 0) == (flo > 0)) {
        lo = z;
      } else {
        hi = z;
      }
      zn = 0.5 * (lo + hi);
    } else if ((p > 0) == (flo > 0)) {
      lo = z;
    } else {
      hi = z;
    }
    if (std::abs(zn - z) <= 1e-15 * std::max(1.0, std::abs(z))) {
      z = zn;
      break;
    }
    z = zn;
  }
  return z;
}

GaussHermiteRule build_rule(int order) {
  // Roots of consecutive orders interlace; build up from order 1.
  std::vector<double> roots{0.0};
  for (int k = 2; k <= order; ++k) {
    const double bound = std::sqrt(2.0 * k + 1.0);
    std::vector<double> brackets;
    brackets.push_back(-bound);
    brackets.insert(brackets.end(), roots.begin(), roots.end());
    brackets.push_back(bound);
    std::vector<double> next(k);
    for (int i = 0; i < k; ++i) next[i] = find_root(k, brackets[i], brackets[i + 1]);
    roots = std::move(next);
  }
  // symmetrize
  for (int i = 0, j = order - 1; i < j; ++i, --j) {
    const double m = 0.5 * (roots[j] - roots[i]);
    roots[i] = -m;
    roots[j] = m;
  }
  if (order % 2 == 1) roots[order / 2] = 0.0;

  GaussHermiteRule rule;
  rule.nodes = roots;
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // Christoffel weight: 1 / sum_{k<order} p_k(z_i)^2
    double pk = std::pow(std::numbers::pi, -0.25);
    double pkm1 = 0.0;
    double s = pk * pk;
    for (int k = 0; k + 1 < order; ++k) {
      const double pk1 =
          roots[i] * std::sqrt(2.0 / (k + 1)) * pk - std::sqrt(double(k) / (k + 1)) * pkm1;
      pkm1 = pk;
      pk = pk1;
      s += pk * pk;
    }
    rule.weights[i] = 1.0 / s;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int order) {
  if (order < 1) throw Error(ErrorCode::BadInput, "gauss_hermite_rule: order must be >= 1");
  if (order > 128) throw Error(ErrorCode::OrderTooLarge, "gauss_hermite_rule: order capped at 128");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

namespace {

double log_g(const InitialData& data, std::span<const double> y) {
  // logsumexp over { log offset, log w_k - |y - mu_k|^2 / (2 sigma_k^2) }
  double m = -std::numeric_limits<double>::infinity();
  const double off = data.constant_offset();
  if (off > 0.0) m = std::log(off);
  thread_local std::vector<double> terms;
  terms.clear();
  if (off > 0.0) terms.push_back(std::log(off));
  for (const auto& c : data.components()) {
    const double t = std::log(c.weight) - dist_sq(y, c.center) / (2.0 * c.sigma * c.sigma);
    terms.push_back(t);
    m = std::max(m, t);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

void check_quadrature_inputs(const InitialData& data, std::span<const double> x, double t) {
  require_time(t);
  if (data.closed_form_only())
    throw Error(ErrorCode::ClosedFormOnlyData, "quadrature engines reject point-mass data");
  if (x.size() != static_cast<std::size_t>(data.dimension()))
    throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  if (data.dimension() > 4)
    throw Error(ErrorCode::DimensionTooLarge, "tensor quadrature limited to n <= 4");
}

// Raw weighted sums over the node grid; entries[0] is the normalization.
// Entry layout for moments: 1 | d_i | d_i d_j (i<=j) | d_i^3 | d_i^4 | d_i^2 d_j^2 (i<j).
struct GridPass {
  double log_scale = 0.0;                  // shift applied before exponentiation
  std::vector<double> sums;                // shifted weighted sums
  double prefactor_log = 0.0;              // log of the constant in front of the node sum
};

std::size_t moment_width(int n) { return 1 + 3 * static_cast<std::size_t>(n) + static_cast<std::size_t>(n) * n; }

// Visits every tensor node of one engine level, calling
// emit(acc, base, d) where base = W * exp(score - L).
template <class Emit>
GridPass run_grid(const InitialData& data, std::span<const double> x, double t, QuadEngine engine,
                  int level, double radius, std::size_t width, Emit&& emit, bool parallel) {
  const int n = data.dimension();
  GridPass out;
  out.sums.assign(width, 0.0);

  if (engine == QuadEngine::gauss_hermite) {
    const auto& rule = gauss_hermite_rule(level);
    const double scale = 2.0 * std::sqrt(t);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(level);

    auto node_at = [&](std::size_t idx, double* d, double* logw) {
      double lw = 0.0;
      for (int ax = 0; ax < n; ++ax) {
        const std::size_t digit = idx % level;
        idx /= level;
        d[ax] = scale * rule.nodes[digit];
        lw += std::log(rule.weights[digit]);
      }
      *logw = lw;
    };

    const double L = chunked_max(
        total,
        [&](std::size_t idx) {
          double d[4], lw;
          node_at(idx, d, &lw);
          double y[4];
          for (int ax = 0; ax < n; ++ax) y[ax] = x[ax] - d[ax];
          return lw + log_g(data, std::span<const double>(y, n));
        },
        parallel);
    out.log_scale = L;
    out.prefactor_log = -0.5 * n * std::log(std::numbers::pi);

    chunked_accumulate(
        total, width, out.sums.data(),
        [&](std::size_t idx, double* acc) {
          double d[4], lw;
          node_at(idx, d, &lw);
          double y[4];
          for (int ax = 0; ax < n; ++ax) y[ax] = x[ax] - d[ax];
          const double base = std::exp(lw + log_g(data, std::span<const double>(y, n)) - L);
          emit(acc, base, d);
        },
        parallel);
    return out;
  }

  // trapezoid on |y_i - x_i| <= radius * sqrt(4t)
  const double half = radius * std::sqrt(4.0 * t);
  const double h = 2.0 * half / level;
  const std::size_t pts = static_cast<std::size_t>(level) + 1;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= pts;
  if (total > (std::size_t(1) << 33))
    throw Error(ErrorCode::BadInput, "trapezoid grid too large; lower steps_per_axis or n");

  auto node_at = [&](std::size_t idx, double* d, double* logw) {
    double lw = 0.0;
    for (int ax = 0; ax < n; ++ax) {
      const std::size_t digit = idx % pts;
      idx /= pts;
      d[ax] = half - static_cast<double>(digit) * h;  // d = x - y
      lw += std::log((digit == 0 || digit + 1 == pts) ? 0.5 * h : h);
    }
    *logw = lw;
  };
  const double log_kernel_norm = -0.5 * n * std::log(4.0 * std::numbers::pi * t);

  const double L = chunked_max(
      total,
      [&](std::size_t idx) {
        double d[4], lw;
        node_at(idx, d, &lw);
        double y[4];
        for (int ax = 0; ax < n; ++ax) y[ax] = x[ax] - d[ax];
        return lw - norm_sq(std::span<const double>(d, n)) / (4.0 * t) +
               log_g(data, std::span<const double>(y, n));
      },
      parallel);
  out.log_scale = L;
  out.prefactor_log = log_kernel_norm;

  chunked_accumulate(
      total, width, out.sums.data(),
      [&](std::size_t idx, double* acc) {
        double d[4], lw;
        node_at(idx, d, &lw);
        double y[4];
        for (int ax = 0; ax < n; ++ax) y[ax] = x[ax] - d[ax];
        const double base = std::exp(lw - norm_sq(std::span<const double>(d, n)) / (4.0 * t) +
                                     log_g(data, std::span<const double>(y, n)) - L);
        emit(acc, base, d);
      },
      parallel);
  return out;
}

void emit_moments(int n, double* acc, double base, const double* d) {
  double d2[4];
  for (int i = 0; i < n; ++i) d2[i] = d[i] * d[i];
  std::size_t k = 0;
  acc[k++] += base;
  for (int i = 0; i < n; ++i) acc[k++] += base * d[i];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) acc[k++] += base * d[i] * d[j];
  for (int i = 0; i < n; ++i) acc[k++] += base * d2[i] * d[i];
  for (int i = 0; i < n; ++i) acc[k++] += base * d2[i] * d2[i];
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) acc[k++] += base * d2[i] * d2[j];
}

struct LevelResult {
  double u = 0.0;
  std::vector<double> m;  // normalized moments, canonical entry order (no leading 1)
};

LevelResult moments_level(const InitialData& data, std::span<const double> x, double t,
                          QuadEngine engine, int level, double radius, bool parallel) {
  const int n = data.dimension();
  const std::size_t width = moment_width(n);
  GridPass gp = run_grid(
      data, x, t, engine, level, radius, width,
      [n](double* acc, double base, const double* d) { emit_moments(n, acc, base, d); }, parallel);
  const double s0 = gp.sums[0];
  if (!(s0 > 0.0) || !std::isfinite(s0))
    throw Error(ErrorCode::EngineFailure, "quadrature normalization is not positive/finite");
  LevelResult r;
  r.u = std::exp(gp.prefactor_log + gp.log_scale + std::log(s0));
  r.m.assign(width - 1, 0.0);
  for (std::size_t k = 1; k < width; ++k) {
    r.m[k - 1] = gp.sums[k] / s0;
    if (!std::isfinite(r.m[k - 1])) throw Error(ErrorCode::EngineFailure, "non-finite quadrature moment");
  }
  return r;
}

// Error of the finest level from the two escalation differences. Slowly
// converging (or stalled) sequences amplify the last difference by the
// estimated geometric tail; a plain two-level difference would understate
// the error exactly where the engine struggles.
double tail_error(double d1, double d2) {
  const double a1 = std::abs(d1), a2 = std::abs(d2);
  const double m = std::max(a1, a2);
  if (m == 0.0) return 0.0;
  if (a2 >= a1) return m / 0.03;  // not contracting
  const double rho = std::min(a2 / a1, 0.97);
  return a2 * std::max(1.0, rho / (1.0 - rho));
}

std::vector<int> escalation_levels(QuadEngine engine, const QuadratureSpec& spec) {
  std::vector<int> levels;
  if (engine == QuadEngine::gauss_hermite) {
    const int o = spec.order_per_axis;
    if (spec.refine) {
      levels = {o, std::min(o + 8, 128), std::min(o + 16, 128)};
    } else {
      levels = {o};
    }
  } else {
    int s = spec.steps_per_axis;
    s += (4 - s % 4) % 4;  // refinement halves twice
    if (spec.refine) {
      levels = {std::max(s / 4, 8), std::max(s / 2, 8), s};
    } else {
      levels = {s};
    }
  }
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

}  // namespace

MomentBundle quadrature_moments(const InitialData& data, std::span<const double> x, double t,
                                const QuadratureSpec& spec, bool parallel) {
  validate_spec(spec);
  check_quadrature_inputs(data, x, t);
  const int n = data.dimension();
  const auto levels = escalation_levels(spec.engine, spec);

  std::vector<LevelResult> res;
  res.reserve(levels.size());
  for (int lv : levels)
    res.push_back(moments_level(data, x, t, spec.engine, lv, spec.truncation_radius, parallel));

  const LevelResult& fine = res.back();
  double err = 0.0;
  if (res.size() == 3) {
    // u tracked relatively, moments absolutely
    err = tail_error((res[1].u - res[0].u) / fine.u, (res[2].u - res[1].u) / fine.u);
    for (std::size_t k = 0; k < fine.m.size(); ++k)
      err = std::max(err, tail_error(res[1].m[k] - res[0].m[k], res[2].m[k] - res[1].m[k]));
  } else if (res.size() == 2) {
    err = 2.0 * std::abs((res[1].u - res[0].u) / fine.u);
    for (std::size_t k = 0; k < fine.m.size(); ++k)
      err = std::max(err, 2.0 * std::abs(res[1].m[k] - res[0].m[k]));
  }

  MomentBundle mb;
  mb.u_value = fine.u;
  mb.m1.assign(n, 0.0);
  mb.m2 = Mat(n);
  mb.m3_diag.assign(n, 0.0);
  mb.m4_diag.assign(n, 0.0);
  mb.m4_pair = Mat(n);
  mb.err_estimate = err;
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) mb.m1[i] = fine.m[k++];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      mb.m2(i, j) = fine.m[k];
      mb.m2(j, i) = fine.m[k];
      ++k;
    }
  for (int i = 0; i < n; ++i) mb.m3_diag[i] = fine.m[k++];
  for (int i = 0; i < n; ++i) mb.m4_diag[i] = fine.m[k++];
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      mb.m4_pair(i, j) = fine.m[k];
      mb.m4_pair(j, i) = fine.m[k];
      ++k;
    }
  return mb;
}

namespace {

Integral integrate_impl(const std::function<double(std::span<const double>)>& f,
                        const InitialData& data, std::span<const double> x, double t,
                        const QuadratureSpec& spec) {
  validate_spec(spec);
  check_quadrature_inputs(data, x, t);
  const int n = data.dimension();
  const auto levels = escalation_levels(spec.engine, spec);

  std::vector<double> vals;
  for (int lv : levels) {
    GridPass gp = run_grid(
        data, x, t, spec.engine, lv, spec.truncation_radius, 2,
        [&](double* acc, double base, const double* d) {
          double y[4];
          for (int ax = 0; ax < n; ++ax) y[ax] = x[ax] - d[ax];
          acc[0] += base;
          acc[1] += base * f(std::span<const double>(y, n));
        },
        true);
    if (!(gp.sums[0] > 0.0)) throw Error(ErrorCode::EngineFailure, "quadrature normalization not positive");
    const double v = gp.sums[1] / gp.sums[0];
    if (!std::isfinite(v)) throw Error(ErrorCode::EngineFailure, "non-finite weighted integral");
    vals.push_back(v);
  }

  Integral out;
  out.value = vals.back();
  if (vals.size() == 3)
    out.err_estimate = tail_error(vals[1] - vals[0], vals[2] - vals[1]);
  else if (vals.size() == 2)
    out.err_estimate = 2.0 * std::abs(vals[1] - vals[0]);
  return out;
}

}  // namespace

Integral integrate_weighted(const std::function<double(std::span<const double>)>& f,
                            const InitialData& data, std::span<const double> x, double t,
                            const QuadratureSpec& spec) {
  return integrate_impl(f, data, x, t, spec);
}

Integral trapezoid_oracle(const std::function<double(std::span<const double>)>& f,
                          const InitialData& data, std::span<const double> x, double t,
                          QuadratureSpec spec) {
  spec.engine = QuadEngine::trapezoid;
  return integrate_impl(f, data, x, t, spec);
}

}  // namespace liyau
