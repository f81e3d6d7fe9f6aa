#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liyau/initial_data.hpp"
#include "liyau/kernel_moments.hpp"
#include "liyau/quadrature.hpp"
#include "liyau/types.hpp"

#include <json.hpp>

namespace liyau {

struct SecondOrderParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

enum class FourthVariant { as_stated, rederived };
std::string to_string(FourthVariant v);
FourthVariant fourth_variant_from_string(const std::string& s);

struct FourthOrderParams {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  FourthVariant variant = FourthVariant::rederived;
};

enum class Theorem { second, fourth };

/// nonnegative entries and (n-1)(alpha+beta) + gamma <= 1
bool admissible_second(int n, const SecondOrderParams& p);

/// k2+k3 > -1/n, k2 <= 0, k3 <= 0, k4 <= 0, and k1 >= -n k4 (as_stated)
/// or k1 >= -n(n-1) k4 (rederived)
bool admissible_fourth(int n, const FourthOrderParams& k);

/// trace(hess) - alpha sum_{i!=j} hess_ij - beta sum_{i!=j} grad_i grad_j - gamma |grad|^2
double second_order_lhs(const DerivativeRatios& r, const SecondOrderParams& p);

/// sum_i fourth_diag_i + k1 sum_{i!=j} fourth_pair_ij + k2 |grad|^4
///   + k3 (trace hess)^2 + k4 (sum_{i!=j} hess_ij)^2
double fourth_order_lhs(const DerivativeRatios& r, const FourthOrderParams& k);

/// sum over ordered pairs i != j of hess_ij, and of hess_ij^2
double pair_sum(const Mat& hess);
double pair_square_sum(const Mat& hess);

/// Coefficients of h = C t^2 + B t |d|^2 + A |d|^4 + D sum_{i!=j} d_i^2 d_j^2
/// and the completed-square bound multiplier F = (4AC - B^2) / (16A).
struct QuadraticFormCoeffs {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0, F = 0.0;
};
QuadraticFormCoeffs quadratic_coeffs(int n, const FourthOrderParams& k);

/// 3n + k1 + n^2 k3 - n (3 + (n-1)k1 + n k3)^2 / (1 + n(k2+k3));
/// equals quadratic_coeffs(...).F for the as_stated coefficient set.
double fourth_bound_displayed(int n, const FourthOrderParams& k);

enum class MomentEngine { closed_form, quadrature };

struct EvalSpec {
  MomentEngine engine = MomentEngine::closed_form;
  QuadratureSpec quad;
};

MomentBundle compute_moments(const InitialData& data, std::span<const double> x, double t,
                             const EvalSpec& eval);

/// One inequality evaluation at one point. slack is stored as lhs - rhs.
struct CheckReport {
  Theorem theorem = Theorem::second;
  std::optional<FourthVariant> variant;
  int n = 0;
  std::vector<double> x;
  double t = 0.0;
  SecondOrderParams second;
  FourthOrderParams fourth;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double err_estimate = 0.0;
  bool admissible = false;
};

/// rhs = -n/2t. Inadmissible parameters still produce a report; the
/// admissible flag is the claim boundary.
CheckReport check_second_order(const InitialData& data, std::span<const double> x, double t,
                               const SecondOrderParams& p, const EvalSpec& eval);

/// rhs = F/(4 t^2). Throws InadmissibleParams unless allow_inadmissible;
/// A <= 0 is always an error (the bound is undefined there).
CheckReport check_fourth_order(const InitialData& data, std::span<const double> x, double t,
                               const FourthOrderParams& k, const EvalSpec& eval,
                               bool allow_inadmissible = false);

/// Slack below -tolerance counts as a failure only in guaranteed modes:
/// Theorem 1 with admissible params, Theorem 2 rederived with admissible
/// params. Returns +infinity (never fails) otherwise.
double guaranteed_tolerance(const CheckReport& rep);

nlohmann::json report_to_json(const CheckReport& rep);
std::string report_csv_header(Theorem theorem, int n);
std::string report_csv_row(const CheckReport& rep);

/// Deterministic shortest-unambiguous double formatting shared by all
/// text output (%.17g).
std::string format_double(double v);

}  // namespace liyau
