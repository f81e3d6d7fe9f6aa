#pragma once

#include <span>
#include <string>
#include <vector>

#include "liyau/types.hpp"

#include <json.hpp>

namespace liyau {

/// One Gaussian bump of the initial condition: weight * exp(-|y-center|^2 / (2 sigma^2)).
/// sigma == 0 denotes a point mass of total mass `weight` at `center`.
struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> center;
  double sigma = 1.0;
};

/// Validated initial condition g: constant offset plus a Gaussian mixture.
/// Immutable after construction; all operations on it are pure.
class InitialData {
 public:
  static InitialData validate(int n, double constant_offset, std::vector<GaussianComponent> components);

  int dimension() const { return n_; }
  double constant_offset() const { return offset_; }
  const std::vector<GaussianComponent>& components() const { return components_; }

  /// True when any component is a point mass; such data has no pointwise g
  /// and is rejected by the quadrature engines.
  bool closed_form_only() const { return closed_form_only_; }

 private:
  InitialData() = default;
  int n_ = 0;
  double offset_ = 0.0;
  std::vector<GaussianComponent> components_;
  bool closed_form_only_ = false;
};

/// Pointwise g(y). Throws ClosedFormOnlyData if the data holds a point mass.
double eval_g(const InitialData& data, std::span<const double> y);

/// log u(x,t) for the heat-flow state of `data`, accumulated in the log
/// domain so ratios stay finite far from the mixture centers.
double log_u(const InitialData& data, std::span<const double> x, double t);

double u_value(const InitialData& data, std::span<const double> x, double t);

/// u(x,t) and the centered moments of d = x - y under the normalized
/// heat-kernel measure at (x,t). m4_pair holds the i!=j entries; its
/// diagonal is left zero.
struct MomentBundle {
  double u_value = 0.0;
  std::vector<double> m1;       // E[d_i]
  Mat m2;                       // E[d_i d_j]
  std::vector<double> m3_diag;  // E[d_i^3]
  std::vector<double> m4_diag;  // E[d_i^4]
  Mat m4_pair;                  // E[d_i^2 d_j^2], i != j
  double err_estimate = 0.0;
};

/// Exact moments. Under the normalized measure, d restricted to a mixture
/// component is Gaussian with per-axis mean (x_i - mu_i) * 2t / (sigma^2 + 2t)
/// and variance 2t sigma^2 / (sigma^2 + 2t); the offset term contributes a
/// centered Gaussian of variance 2t, a point mass contributes x - mu
/// deterministically. Components mix by posterior weight.
MomentBundle closed_form_moments(const InitialData& data, std::span<const double> x, double t);

InitialData scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const InitialData& data);
InitialData load_scenario_file(const std::string& path);

}  // namespace liyau
