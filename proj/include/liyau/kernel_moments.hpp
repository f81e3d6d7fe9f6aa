#pragma once

#include <span>
#include <string>
#include <vector>

#include "liyau/initial_data.hpp"
#include "liyau/types.hpp"

namespace liyau {

/// Derivative ratios (d^a u)/u up to fourth order, as produced from moments.
struct DerivativeRatios {
  int n = 0;
  double t = 0.0;
  std::vector<double> grad;        // u_{x_i}/u
  Mat hess;                        // u_{x_i x_j}/u
  std::vector<double> third_diag;  // u_{x_i x_i x_i}/u
  std::vector<double> fourth_diag; // u_{x_i x_i x_i x_i}/u
  Mat fourth_pair;                 // u_{x_i x_i x_j x_j}/u, i != j
};

/// Moment-to-ratio identities:
///   grad_i        = -m1_i / 2t
///   hess_ii       = -1/2t + m2_ii / 4t^2
///   hess_ij       =  m2_ij / 4t^2
///   third_i       = (6t m1_i - m3_i) / 8t^3
///   fourth_i      = (12t^2 - 12t m2_ii + m4_i) / 16t^4
///   fourth_pair_ij = (m4p_ij - 2t m2_ii - 2t m2_jj + 4t^2) / 16t^4
DerivativeRatios ratios_from_moments(const MomentBundle& mb, double t, int n);

/// trace(hess) - |grad|^2
double laplacian_log_u(const DerivativeRatios& r);

/// Central finite differences of u at shifted points divided by u(x,t).
/// Fourth-order stencils for 1st/2nd axis derivatives, second-order for
/// 3rd/4th, iterated Richardson over a geometric step ladder; the entry
/// with the smallest internal error estimate wins. h <= 0 picks a step
/// from the data's length scale; explicit h below 1e-6 sqrt(t) is rejected.
double finite_difference_ratio(const InitialData& data, std::span<const double> x, double t,
                               std::span<const int> multi_index, double h = 0.0,
                               double* err_out = nullptr);

/// (u(x,t+h) - u(x,t-h)) / 2h  -  sum_i u_{x_i x_i}(x,t); O(h^2) for exact states.
double heat_residual(const InitialData& data, std::span<const double> x, double t, double h);

/// Named view over every ratio entry, paired with its multi-index; used by
/// the oracle comparisons and the derivatives CLI command.
struct RatioEntry {
  std::string name;
  std::vector<int> multi_index;
  double value = 0.0;
};
std::vector<RatioEntry> ratio_entries(const DerivativeRatios& r);

}  // namespace liyau
