#pragma once

#include <functional>
#include <span>
#include <vector>

#include "liyau/initial_data.hpp"
#include "liyau/types.hpp"

namespace liyau {

enum class QuadEngine { gauss_hermite, trapezoid };

struct QuadratureSpec {
  QuadEngine engine = QuadEngine::gauss_hermite;
  int order_per_axis = 40;         // gauss_hermite
  double truncation_radius = 8.0;  // trapezoid box half-width, units of sqrt(4t)
  int steps_per_axis = 512;        // trapezoid intervals per axis
  bool refine = true;              // escalate and attach an error estimate
};

void validate_spec(const QuadratureSpec& spec);

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight function exp(-z^2) on R
};

/// Nodes and weights exact for polynomials of degree <= 2*order - 1.
/// Orders above 128 are rejected.
const GaussHermiteRule& gauss_hermite_rule(int order);

struct Integral {
  double value = 0.0;
  double err_estimate = 0.0;
};

/// Integral of f against the normalized measure Phi(x-y,t) g(y) dy / u(x,t).
/// The Gauss-Hermite path substitutes y = x - 2 sqrt(t) z per axis so the
/// kernel becomes the exp(-|z|^2) weight; the trapezoid path integrates the
/// truncated box |y_i - x_i| <= radius * sqrt(4t). Numerator and denominator
/// share nodes, so f == 1 integrates to 1 exactly.
Integral integrate_weighted(const std::function<double(std::span<const double>)>& f,
                            const InitialData& data, std::span<const double> x, double t,
                            const QuadratureSpec& spec);

/// Same integral on the trapezoid engine regardless of spec.engine; test oracle.
Integral trapezoid_oracle(const std::function<double(std::span<const double>)>& f,
                          const InitialData& data, std::span<const double> x, double t,
                          QuadratureSpec spec);

/// One pass over the nodes accumulating u and every moment the derivative
/// ratios need. err_estimate covers all entries (escalation-based, see spec.refine).
MomentBundle quadrature_moments(const InitialData& data, std::span<const double> x, double t,
                                const QuadratureSpec& spec, bool parallel = true);

}  // namespace liyau
