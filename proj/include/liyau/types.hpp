#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace liyau {

enum class ErrorCode {
  NonPositiveWeight,
  NegativeSigma,
  VanishingData,
  DimensionMismatch,
  ClosedFormOnlyData,
  NonPositiveTime,
  OrderTooLarge,
  DimensionTooLarge,
  StepTooSmall,
  InadmissibleParams,
  BudgetTooSmall,
  BadInput,
  EngineFailure,
};

/// All library errors carry a code so the CLI can map them to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Evaluations reject t below this floor; the bounds scale like 1/t^2 and
/// 1/t^4 and swamp double precision below it.
inline constexpr double kTimeFloor = 1e-8;

/// Small dense square matrix, row-major. Dimensions here are tiny (n <= 4
/// for quadrature, rarely more than 8 anywhere).
struct Mat {
  int n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline void require_time(double t) {
  if (!(t >= kTimeFloor))
    throw Error(ErrorCode::NonPositiveTime,
                "t = " + std::to_string(t) + " below floor " + std::to_string(kTimeFloor));
}

}  // namespace liyau
