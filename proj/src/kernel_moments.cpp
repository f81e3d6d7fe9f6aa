#include "liyau/kernel_moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace liyau {

DerivativeRatios ratios_from_moments(const MomentBundle& mb, double t, int n) {
  require_time(t);
  const double t2 = t * t;
  DerivativeRatios r;
  r.n = n;
  r.t = t;
  r.grad.resize(n);
  r.hess = Mat(n);
  r.third_diag.resize(n);
  r.fourth_diag.resize(n);
  r.fourth_pair = Mat(n);
  for (int i = 0; i < n; ++i) {
    r.grad[i] = -mb.m1[i] / (2.0 * t);
    r.third_diag[i] = (6.0 * t * mb.m1[i] - mb.m3_diag[i]) / (8.0 * t2 * t);
    r.fourth_diag[i] = (12.0 * t2 - 12.0 * t * mb.m2(i, i) + mb.m4_diag[i]) / (16.0 * t2 * t2);
    r.hess(i, i) = -1.0 / (2.0 * t) + mb.m2(i, i) / (4.0 * t2);
    for (int j = i + 1; j < n; ++j) {
      r.hess(i, j) = mb.m2(i, j) / (4.0 * t2);
      r.hess(j, i) = r.hess(i, j);
      r.fourth_pair(i, j) =
          (mb.m4_pair(i, j) - 2.0 * t * mb.m2(i, i) - 2.0 * t * mb.m2(j, j) + 4.0 * t2) /
          (16.0 * t2 * t2);
      r.fourth_pair(j, i) = r.fourth_pair(i, j);
    }
  }
  return r;
}

double laplacian_log_u(const DerivativeRatios& r) {
  double tr = 0.0;
  for (int i = 0; i < r.n; ++i) tr += r.hess(i, i);
  return tr - norm_sq(r.grad);
}

namespace {

// Integer numerators with one divisor keep the tap sums exactly zero on
// constant inputs (the pre-divided coefficients would not cancel in
// floating point).
struct Stencil {
  int order_accuracy;  // leading error power (even series)
  double denom;
  std::vector<std::pair<int, double>> taps;  // (offset, integer numerator)
};

const Stencil& stencil_for(int k) {
  static const std::array<Stencil, 5> table = {{
      {0, 1.0, {{0, 1.0}}},
      {4, 12.0, {{-2, 1.0}, {-1, -8.0}, {1, 8.0}, {2, -1.0}}},
      {4, 12.0, {{-2, -1.0}, {-1, 16.0}, {0, -30.0}, {1, 16.0}, {2, -1.0}}},
      {2, 2.0, {{-2, -1.0}, {-1, 2.0}, {1, -2.0}, {2, 1.0}}},
      {2, 1.0, {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}}},
  }};
  return table[k];
}

// One tensor-product stencil evaluation of (d^alpha u)(x,t) at step h,
// before division by u(x,t).
double stencil_eval(const InitialData& data, std::span<const double> x, double t,
                    std::span<const int> multi, double h) {
  const int n = data.dimension();
  std::vector<int> axes;
  for (int ax = 0; ax < n; ++ax)
    if (multi[ax] > 0) axes.push_back(ax);

  double hpow = 1.0;
  int total_order = 0;
  double denom = 1.0;
  for (int ax : axes) {
    total_order += multi[ax];
    denom *= stencil_for(multi[ax]).denom;
  }
  for (int k = 0; k < total_order; ++k) hpow *= h;

  std::vector<double> pt(x.begin(), x.end());
  double sum = 0.0;
  // iterate the cartesian product of per-axis taps
  std::vector<std::size_t> tap_idx(axes.size(), 0);
  while (true) {
    double coeff = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& st = stencil_for(multi[axes[a]]);
      const auto& [off, c] = st.taps[tap_idx[a]];
      coeff *= c;
      pt[axes[a]] = x[axes[a]] + off * h;
    }
    sum += coeff * u_value(data, pt, t);
    for (std::size_t a = 0; a < axes.size(); ++a) pt[axes[a]] = x[axes[a]];

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++tap_idx[a] < stencil_for(multi[axes[a]]).taps.size()) break;
      tap_idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return sum / (denom * hpow);
}

}  // namespace

double finite_difference_ratio(const InitialData& data, std::span<const double> x, double t,
                               std::span<const int> multi_index, double h, double* err_out) {
  require_time(t);
  if (multi_index.size() != static_cast<std::size_t>(data.dimension()))
    throw Error(ErrorCode::DimensionMismatch, "multi_index length must equal dimension");
  int total = 0, p = 8;
  for (int k : multi_index) {
    if (k < 0 || k > 4) throw Error(ErrorCode::BadInput, "multi_index entries must be in 0..4");
    total += k;
    if (k > 0) p = std::min(p, stencil_for(k).order_accuracy);
  }
  if (total < 1 || total > 4)
    throw Error(ErrorCode::BadInput, "total derivative order must be in 1..4");

  const double h_floor = 1e-6 * std::sqrt(t);
  if (h != 0.0 && h < h_floor)
    throw Error(ErrorCode::StepTooSmall, "finite-difference step below 1e-6 sqrt(t)");
  double h0 = h;
  if (h0 <= 0.0) {
    double scale = std::sqrt(4.0 * t);
    for (const auto& c : data.components())
      scale = std::min(scale, std::sqrt(c.sigma * c.sigma + 2.0 * t));
    h0 = 0.25 * scale;
  }

  const double u0 = u_value(data, x, t);

  // Neville tableau over h, h/2, h/4, ... eliminating the even error powers
  // p, p+2, ...; keep the entry with the smallest observed error, stop when
  // the diagonal deteriorates (step too small, roundoff takes over).
  constexpr int kMaxLevels = 10;
  double tab[kMaxLevels][kMaxLevels];
  double best = 0.0, best_err = std::numeric_limits<double>::infinity();
  double hi = h0;
  for (int i = 0; i < kMaxLevels; ++i, hi *= 0.5) {
    if (i > 0 && hi < h_floor) break;
    tab[i][0] = stencil_eval(data, x, t, multi_index, hi) / u0;
    if (i == 0) {
      best = tab[0][0];
      continue;
    }
    for (int j = 1; j <= i; ++j) {
      const double factor = std::pow(2.0, p + 2.0 * (j - 1));
      tab[i][j] = (factor * tab[i][j - 1] - tab[i - 1][j - 1]) / (factor - 1.0);
      const double err =
          std::max(std::abs(tab[i][j] - tab[i][j - 1]), std::abs(tab[i][j] - tab[i - 1][j - 1]));
      if (err < best_err) {
        best_err = err;
        best = tab[i][j];
      }
    }
    if (std::abs(tab[i][i] - tab[i - 1][i - 1]) >= 4.0 * best_err && i > 2) break;
  }
  if (err_out) *err_out = best_err;
  return best;
}

double heat_residual(const InitialData& data, std::span<const double> x, double t, double h) {
  require_time(t);
  if (!(h > 0.0) || h >= t)
    throw Error(ErrorCode::BadInput, "heat_residual needs 0 < h < t");
  if (h < 1e-6 * std::sqrt(t))
    throw Error(ErrorCode::StepTooSmall, "heat_residual step below 1e-6 sqrt(t)");
  const double du_dt = (u_value(data, x, t + h) - u_value(data, x, t - h)) / (2.0 * h);
  const double u0 = u_value(data, x, t);
  double lap = 0.0;
  std::vector<int> multi(data.dimension(), 0);
  for (int i = 0; i < data.dimension(); ++i) {
    multi[i] = 2;
    lap += finite_difference_ratio(data, x, t, multi) * u0;
    multi[i] = 0;
  }
  return du_dt - lap;
}

std::vector<RatioEntry> ratio_entries(const DerivativeRatios& r) {
  const int n = r.n;
  std::vector<RatioEntry> out;
  auto multi = [n](int i, int ki, int j = -1, int kj = 0) {
    std::vector<int> m(n, 0);
    m[i] = ki;
    if (j >= 0) m[j] = kj;
    return m;
  };
  for (int i = 0; i < n; ++i)
    out.push_back({"grad[" + std::to_string(i) + "]", multi(i, 1), r.grad[i]});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const std::string nm = "hess[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (i == j)
        out.push_back({nm, multi(i, 2), r.hess(i, i)});
      else
        out.push_back({nm, multi(i, 1, j, 1), r.hess(i, j)});
    }
  for (int i = 0; i < n; ++i)
    out.push_back({"third_diag[" + std::to_string(i) + "]", multi(i, 3), r.third_diag[i]});
  for (int i = 0; i < n; ++i)
    out.push_back({"fourth_diag[" + std::to_string(i) + "]", multi(i, 4), r.fourth_diag[i]});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.push_back({"fourth_pair[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                     multi(i, 2, j, 2), r.fourth_pair(i, j)});
  return out;
}

}  // namespace liyau
