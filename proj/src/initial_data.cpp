#include "liyau/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace liyau {

InitialData InitialData::validate(int n, double constant_offset, std::vector<GaussianComponent> components) {
  if (n < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be >= 1, got " + std::to_string(n));
  if (!(constant_offset >= 0.0))
    throw Error(ErrorCode::BadInput, "constant_offset must be nonnegative");
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "component weight must be > 0");
    if (!(c.sigma >= 0.0)) throw Error(ErrorCode::NegativeSigma, "component sigma must be >= 0");
    if (static_cast<int>(c.center.size()) != n)
      throw Error(ErrorCode::DimensionMismatch,
                  "component center has " + std::to_string(c.center.size()) + " coordinates, expected " +
                      std::to_string(n));
  }
  if (constant_offset == 0.0 && components.empty())
    throw Error(ErrorCode::VanishingData, "g vanishes: zero offset and no components");

  InitialData d;
  d.n_ = n;
  d.offset_ = constant_offset;
  d.components_ = std::move(components);
  d.closed_form_only_ =
      std::any_of(d.components_.begin(), d.components_.end(), [](const auto& c) { return c.sigma == 0.0; });
  return d;
}

double eval_g(const InitialData& data, std::span<const double> y) {
  if (data.closed_form_only())
    throw Error(ErrorCode::ClosedFormOnlyData, "pointwise g undefined for point-mass data");
  if (y.size() != static_cast<std::size_t>(data.dimension()))
    throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch in eval_g");
  double g = data.constant_offset();
  for (const auto& c : data.components()) {
    const double q = dist_sq(y, c.center);
    g += c.weight * std::exp(-q / (2.0 * c.sigma * c.sigma));
  }
  return g;
}

namespace {

// Per-contribution state of u(x,t): log of the contribution plus the mean
// and per-axis variance of d = x - y conditioned on it.
struct Term {
  double log_value;
  double var;
  std::vector<double> mean;
};

std::vector<Term> u_terms(const InitialData& data, std::span<const double> x, double t) {
  require_time(t);
  if (x.size() != static_cast<std::size_t>(data.dimension()))
    throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  const int n = data.dimension();
  std::vector<Term> terms;
  terms.reserve(data.components().size() + 1);
  if (data.constant_offset() > 0.0) {
    Term tm;
    tm.log_value = std::log(data.constant_offset());
    tm.var = 2.0 * t;
    tm.mean.assign(n, 0.0);
    terms.push_back(std::move(tm));
  }
  for (const auto& c : data.components()) {
    Term tm;
    tm.mean.resize(n);
    const double q = dist_sq(x, c.center);
    if (c.sigma == 0.0) {
      // point mass: u gets weight * Phi(x - mu, t), d = x - mu exactly
      tm.log_value = std::log(c.weight) - 0.5 * n * std::log(4.0 * std::numbers::pi * t) - q / (4.0 * t);
      tm.var = 0.0;
      for (int i = 0; i < n; ++i) tm.mean[i] = x[i] - c.center[i];
    } else {
      const double s2 = c.sigma * c.sigma;
      const double tot = s2 + 2.0 * t;
      tm.log_value = std::log(c.weight) + 0.5 * n * (std::log(s2) - std::log(tot)) - q / (2.0 * tot);
      tm.var = 2.0 * t * s2 / tot;
      for (int i = 0; i < n; ++i) tm.mean[i] = (x[i] - c.center[i]) * 2.0 * t / tot;
    }
    terms.push_back(std::move(tm));
  }
  return terms;
}

}  // namespace

double log_u(const InitialData& data, std::span<const double> x, double t) {
  const auto terms = u_terms(data, x, t);
  double m = terms[0].log_value;
  for (const auto& tm : terms) m = std::max(m, tm.log_value);
  double s = 0.0;
  for (const auto& tm : terms) s += std::exp(tm.log_value - m);
  return m + std::log(s);
}

double u_value(const InitialData& data, std::span<const double> x, double t) {
  return std::exp(log_u(data, x, t));
}

MomentBundle closed_form_moments(const InitialData& data, std::span<const double> x, double t) {
  const auto terms = u_terms(data, x, t);
  const int n = data.dimension();

  double m = terms[0].log_value;
  for (const auto& tm : terms) m = std::max(m, tm.log_value);
  std::vector<double> w(terms.size());
  double total = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    w[k] = std::exp(terms[k].log_value - m);
    total += w[k];
  }
  for (double& wk : w) wk /= total;

  MomentBundle mb;
  mb.u_value = std::exp(m + std::log(total));
  mb.m1.assign(n, 0.0);
  mb.m2 = Mat(n);
  mb.m3_diag.assign(n, 0.0);
  mb.m4_diag.assign(n, 0.0);
  mb.m4_pair = Mat(n);
  mb.err_estimate = 0.0;

  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double v = terms[k].var;
    const auto& mu = terms[k].mean;
    for (int i = 0; i < n; ++i) {
      const double mi = mu[i];
      const double e2i = mi * mi + v;  // E[d_i^2] within this contribution
      mb.m1[i] += w[k] * mi;
      mb.m2(i, i) += w[k] * e2i;
      mb.m3_diag[i] += w[k] * (mi * mi * mi + 3.0 * mi * v);
      mb.m4_diag[i] += w[k] * (mi * mi * mi * mi + 6.0 * mi * mi * v + 3.0 * v * v);
      // axes are independent within one isotropic contribution; fill both
      // triangles from a single product so symmetry is exact
      for (int j = i + 1; j < n; ++j) {
        const double mj = mu[j];
        const double cross2 = w[k] * (mi * mj);
        const double cross4 = w[k] * (e2i * (mj * mj + v));
        mb.m2(i, j) += cross2;
        mb.m2(j, i) = mb.m2(i, j);
        mb.m4_pair(i, j) += cross4;
        mb.m4_pair(j, i) = mb.m4_pair(i, j);
      }
    }
  }
  return mb;
}

InitialData scenario_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const double offset = j.value("constant_offset", 0.0);
    std::vector<GaussianComponent> comps;
    if (j.contains("components")) {
      for (const auto& cj : j.at("components")) {
        GaussianComponent c;
        c.weight = cj.at("weight").get<double>();
        c.center = cj.at("center").get<std::vector<double>>();
        c.sigma = cj.at("sigma").get<double>();
        comps.push_back(std::move(c));
      }
    }
    return InitialData::validate(n, offset, std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("malformed scenario JSON: ") + e.what());
  }
}

nlohmann::json scenario_to_json(const InitialData& data) {
  nlohmann::json j;
  j["n"] = data.dimension();
  j["constant_offset"] = data.constant_offset();
  j["components"] = nlohmann::json::array();
  for (const auto& c : data.components()) {
    j["components"].push_back({{"weight", c.weight}, {"center", c.center}, {"sigma", c.sigma}});
  }
  return j;
}

InitialData load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadInput, "cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace liyau
