#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liyau/inequalities.hpp"

namespace liyau {

/// Inclusive range discretized into `count` points (count == 1 -> {lo}).
struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
};
std::vector<double> axis_values(const GridAxis& a);

struct SweepSpec {
  Theorem theorem = Theorem::second;
  FourthVariant variant = FourthVariant::rederived;
  std::vector<InitialData> scenarios;          // all of the same dimension
  std::vector<std::vector<double>> x_points;
  GridAxis t_axis{1.0, 1.0, 1};
  std::array<GridAxis, 3> second_axes{};       // alpha, beta, gamma
  std::array<GridAxis, 4> fourth_axes{};       // k1..k4
  EvalSpec eval;
  int jobs = 0;                                // 0 -> runtime default
};

/// One report per grid point in lexicographic order
/// (scenario, t, x, params; last axis fastest). Grid points are independent
/// and evaluated concurrently; the output order never depends on thread count.
/// Points where the fourth-order bound is undefined (A <= 0) come back with
/// NaN lhs/rhs/slack and admissible = false.
std::vector<CheckReport> sweep(const SweepSpec& spec);

std::string sweep_csv(const SweepSpec& spec, const std::vector<CheckReport>& reports);

/// Bounded parameter vector -> one inequality evaluation. Admissibility is
/// enforced inside `eval` by clamped projection, so every probed point
/// satisfies the hypotheses.
struct ScenarioFamily {
  std::string name;
  std::vector<double> lo, hi;
  std::function<CheckReport(std::span<const double>)> eval;
  int dim() const { return static_cast<int>(lo.size()); }
};

struct FamilyConfig {
  Theorem theorem = Theorem::second;
  int n = 1;
  double t_fixed = 1.0;
  SecondOrderParams second{0.0, 0.0, 1.0};
  FourthOrderParams fourth;
  EvalSpec eval;
};

/// Built-in families: "single_gaussian" (sigma free, x = mu, fixed params),
/// "constant" (translate x; slack is constant), "mixture1|2|3" (full scenario
/// plus free, projected inequality parameters).
ScenarioFamily make_family(const std::string& name, const FamilyConfig& cfg);

struct ProbeResult {
  double best_slack = 0.0;
  std::vector<double> argmin;
  CheckReport best_report;
  long long iterations = 0;  // objective evaluations spent
  bool converged = false;
  std::vector<std::pair<long long, double>> history;  // (evaluation count, best slack so far)
  std::uint64_t seed = 0;
};

/// Derivative-free local search: a coarse seeded pre-scan followed by
/// Nelder-Mead restarts (R = max(4, budget/200)), candidates clamped into the
/// box. Deterministic for a given seed; never claims global optimality.
ProbeResult minimize_slack(const ScenarioFamily& family, int budget, std::uint64_t seed);

nlohmann::json probe_result_to_json(const ProbeResult& pr);

struct SharpnessPoint {
  double sigma0 = 0.0;
  double slack = 0.0;
  double predicted = 0.0;  // n sigma0^2 / (2t (sigma0^2 + 2t))
};

/// Slack of the classical (gamma = 1) bound for single-Gaussian data at
/// x = mu, against its closed-form prediction. sigma0 == 0 uses the
/// point-mass state and sits exactly on the equality case.
std::vector<SharpnessPoint> sharpness_curve(int n, double t, bool gamma_one,
                                            std::span<const double> sigma_list);

}  // namespace liyau
