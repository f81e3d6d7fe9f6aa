#include "liyau/inequalities.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace liyau {

std::string to_string(FourthVariant v) {
  return v == FourthVariant::as_stated ? "as-stated" : "rederived";
}

FourthVariant fourth_variant_from_string(const std::string& s) {
  if (s == "as-stated" || s == "as_stated") return FourthVariant::as_stated;
  if (s == "rederived") return FourthVariant::rederived;
  throw Error(ErrorCode::BadInput, "unknown variant: " + s);
}

bool admissible_second(int n, const SecondOrderParams& p) {
  if (!(p.alpha >= 0.0 && p.beta >= 0.0 && p.gamma >= 0.0)) return false;
  return (n - 1) * (p.alpha + p.beta) + p.gamma <= 1.0;
}

bool admissible_fourth(int n, const FourthOrderParams& k) {
  if (!(k.k2 + k.k3 > -1.0 / n)) return false;
  if (!(k.k2 <= 0.0 && k.k3 <= 0.0 && k.k4 <= 0.0)) return false;
  const double k1_lb = k.variant == FourthVariant::as_stated ? -double(n) * k.k4
                                                             : -double(n) * (n - 1) * k.k4;
  return k.k1 >= k1_lb;
}

double second_order_lhs(const DerivativeRatios& r, const SecondOrderParams& p) {
  double trace = 0.0, off = 0.0, cross = 0.0;
  for (int i = 0; i < r.n; ++i) {
    trace += r.hess(i, i);
    for (int j = 0; j < r.n; ++j) {
      if (i == j) continue;
      off += r.hess(i, j);
      cross += r.grad[i] * r.grad[j];
    }
  }
  return trace - p.alpha * off - p.beta * cross - p.gamma * norm_sq(r.grad);
}

double pair_sum(const Mat& hess) {
  double s = 0.0;
  for (int i = 0; i < hess.n; ++i)
    for (int j = 0; j < hess.n; ++j)
      if (i != j) s += hess(i, j);
  return s;
}

double pair_square_sum(const Mat& hess) {
  double s = 0.0;
  for (int i = 0; i < hess.n; ++i)
    for (int j = 0; j < hess.n; ++j)
      if (i != j) s += hess(i, j) * hess(i, j);
  return s;
}

double fourth_order_lhs(const DerivativeRatios& r, const FourthOrderParams& k) {
  double diag4 = 0.0, pair4 = 0.0, trace = 0.0;
  for (int i = 0; i < r.n; ++i) {
    diag4 += r.fourth_diag[i];
    trace += r.hess(i, i);
    for (int j = 0; j < r.n; ++j)
      if (i != j) pair4 += r.fourth_pair(i, j);
  }
  const double g2 = norm_sq(r.grad);
  const double ps = pair_sum(r.hess);
  return diag4 + k.k1 * pair4 + k.k2 * g2 * g2 + k.k3 * trace * trace + k.k4 * ps * ps;
}

QuadraticFormCoeffs quadratic_coeffs(int n, const FourthOrderParams& k) {
  QuadraticFormCoeffs c;
  c.A = 1.0 / n + k.k2 + k.k3;
  if (!(c.A > 0.0))
    throw Error(ErrorCode::InadmissibleParams, "k2 + k3 must exceed -1/n (bound undefined)");
  c.B = -12.0 - 4.0 * (n - 1) * k.k1 - 4.0 * n * k.k3;
  if (k.variant == FourthVariant::as_stated) {
    c.C = 12.0 * n + 4.0 * k.k1 + 4.0 * n * n * k.k3;
    c.D = k.k1 + n * k.k4;
  } else {
    c.C = 12.0 * n + 4.0 * n * (n - 1) * k.k1 + 4.0 * n * n * k.k3;
    c.D = k.k1 + double(n) * (n - 1) * k.k4;
  }
  c.F = (4.0 * c.A * c.C - c.B * c.B) / (16.0 * c.A);
  return c;
}

double fourth_bound_displayed(int n, const FourthOrderParams& k) {
  const double denom = 1.0 + n * (k.k2 + k.k3);
  if (!(denom > 0.0))
    throw Error(ErrorCode::InadmissibleParams, "k2 + k3 must exceed -1/n (bound undefined)");
  const double inner = 3.0 + (n - 1) * k.k1 + n * k.k3;
  return 3.0 * n + k.k1 + double(n) * n * k.k3 - n * inner * inner / denom;
}

MomentBundle compute_moments(const InitialData& data, std::span<const double> x, double t,
                             const EvalSpec& eval) {
  if (eval.engine == MomentEngine::closed_form) return closed_form_moments(data, x, t);
  return quadrature_moments(data, x, t, eval.quad);
}

CheckReport check_second_order(const InitialData& data, std::span<const double> x, double t,
                               const SecondOrderParams& p, const EvalSpec& eval) {
  const MomentBundle mb = compute_moments(data, x, t, eval);
  const DerivativeRatios r = ratios_from_moments(mb, t, data.dimension());
  CheckReport rep;
  rep.theorem = Theorem::second;
  rep.n = data.dimension();
  rep.x.assign(x.begin(), x.end());
  rep.t = t;
  rep.second = p;
  rep.lhs = second_order_lhs(r, p);
  rep.rhs = -double(data.dimension()) / (2.0 * t);
  rep.slack = rep.lhs - rep.rhs;
  rep.err_estimate = mb.err_estimate;
  rep.admissible = admissible_second(data.dimension(), p);
  return rep;
}

CheckReport check_fourth_order(const InitialData& data, std::span<const double> x, double t,
                               const FourthOrderParams& k, const EvalSpec& eval,
                               bool allow_inadmissible) {
  const int n = data.dimension();
  const bool ok = admissible_fourth(n, k);
  if (!ok && !allow_inadmissible)
    throw Error(ErrorCode::InadmissibleParams,
                "fourth-order parameters violate the admissibility constraints");
  const double F = k.variant == FourthVariant::as_stated ? fourth_bound_displayed(n, k)
                                                         : quadratic_coeffs(n, k).F;
  const MomentBundle mb = compute_moments(data, x, t, eval);
  const DerivativeRatios r = ratios_from_moments(mb, t, n);
  CheckReport rep;
  rep.theorem = Theorem::fourth;
  rep.variant = k.variant;
  rep.n = n;
  rep.x.assign(x.begin(), x.end());
  rep.t = t;
  rep.fourth = k;
  rep.lhs = fourth_order_lhs(r, k);
  rep.rhs = F / (4.0 * t * t);
  rep.slack = rep.lhs - rep.rhs;
  rep.err_estimate = mb.err_estimate;
  rep.admissible = ok;
  return rep;
}

double guaranteed_tolerance(const CheckReport& rep) {
  if (!rep.admissible) return std::numeric_limits<double>::infinity();
  if (rep.theorem == Theorem::second)
    return std::max(1e-9, 10.0 * rep.err_estimate);
  if (rep.variant == FourthVariant::rederived)
    return std::max(1e-8, 10.0 * rep.err_estimate);
  return std::numeric_limits<double>::infinity();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json report_to_json(const CheckReport& rep) {
  nlohmann::json j;
  j["theorem"] = rep.theorem == Theorem::second ? "second" : "fourth";
  if (rep.variant)
    j["variant"] = to_string(*rep.variant);
  else
    j["variant"] = nullptr;
  j["n"] = rep.n;
  j["x"] = rep.x;
  j["t"] = rep.t;
  if (rep.theorem == Theorem::second) {
    j["params"] = {{"alpha", rep.second.alpha}, {"beta", rep.second.beta}, {"gamma", rep.second.gamma}};
  } else {
    j["params"] = {{"k1", rep.fourth.k1}, {"k2", rep.fourth.k2}, {"k3", rep.fourth.k3}, {"k4", rep.fourth.k4}};
  }
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["slack"] = rep.slack;
  j["err"] = rep.err_estimate;
  j["admissible"] = rep.admissible;
  return j;
}

std::string report_csv_header(Theorem theorem, int n) {
  std::ostringstream os;
  os << "theorem,variant,n,t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  if (theorem == Theorem::second)
    os << ",alpha,beta,gamma";
  else
    os << ",k1,k2,k3,k4";
  os << ",lhs,rhs,slack,err,admissible";
  return os.str();
}

std::string report_csv_row(const CheckReport& rep) {
  std::ostringstream os;
  os << (rep.theorem == Theorem::second ? "second" : "fourth") << ','
     << (rep.variant ? to_string(*rep.variant) : "") << ',' << rep.n << ',' << format_double(rep.t);
  for (double xi : rep.x) os << ',' << format_double(xi);
  if (rep.theorem == Theorem::second) {
    os << ',' << format_double(rep.second.alpha) << ',' << format_double(rep.second.beta) << ','
       << format_double(rep.second.gamma);
  } else {
    os << ',' << format_double(rep.fourth.k1) << ',' << format_double(rep.fourth.k2) << ','
       << format_double(rep.fourth.k3) << ',' << format_double(rep.fourth.k4);
  }
  os << ',' << format_double(rep.lhs) << ',' << format_double(rep.rhs) << ','
     << format_double(rep.slack) << ',' << format_double(rep.err_estimate) << ','
     << (rep.admissible ? 1 : 0);
  return os.str();
}

}  // namespace liyau
