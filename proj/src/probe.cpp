#include "liyau/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "liyau/parallel.hpp"

namespace liyau {

std::vector<double> axis_values(const GridAxis& a) {
  if (a.count < 1) throw Error(ErrorCode::BadInput, "grid axis needs at least one point");
  std::vector<double> v(a.count);
  if (a.count == 1) {
    v[0] = a.lo;
  } else {
    for (int i = 0; i < a.count; ++i) v[i] = a.lo + (a.hi - a.lo) * i / (a.count - 1);
  }
  return v;
}

std::vector<CheckReport> sweep(const SweepSpec& spec) {
  if (spec.scenarios.empty()) throw Error(ErrorCode::BadInput, "sweep needs at least one scenario");
  if (spec.x_points.empty()) throw Error(ErrorCode::BadInput, "sweep needs at least one x point");
  const int n = spec.scenarios.front().dimension();
  for (const auto& s : spec.scenarios)
    if (s.dimension() != n)
      throw Error(ErrorCode::DimensionMismatch, "sweep scenarios must share one dimension");
  for (const auto& x : spec.x_points)
    if (static_cast<int>(x.size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "sweep x point dimension mismatch");

  const auto tv = axis_values(spec.t_axis);
  for (double t : tv) require_time(t);

  std::vector<std::vector<double>> paxes;
  if (spec.theorem == Theorem::second) {
    for (const auto& a : spec.second_axes) paxes.push_back(axis_values(a));
  } else {
    for (const auto& a : spec.fourth_axes) paxes.push_back(axis_values(a));
  }

  std::vector<std::size_t> sizes{spec.scenarios.size(), tv.size(), spec.x_points.size()};
  for (const auto& pv : paxes) sizes.push_back(pv.size());
  std::size_t total = 1;
  for (std::size_t s : sizes) total *= s;

  std::vector<CheckReport> out(total);
  const int jobs = spec.jobs > 0 ? spec.jobs : hardware_jobs();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(jobs)
#else
  (void)jobs;
#endif
  for (long long flat = 0; flat < static_cast<long long>(total); ++flat) {
    // decode lexicographic index, last axis fastest
    std::size_t rem = static_cast<std::size_t>(flat);
    std::vector<std::size_t> idx(sizes.size());
    for (std::size_t a = sizes.size(); a-- > 0;) {
      idx[a] = rem % sizes[a];
      rem /= sizes[a];
    }
    const InitialData& data = spec.scenarios[idx[0]];
    const double t = tv[idx[1]];
    const auto& x = spec.x_points[idx[2]];
    if (spec.theorem == Theorem::second) {
      SecondOrderParams p{paxes[0][idx[3]], paxes[1][idx[4]], paxes[2][idx[5]]};
      out[flat] = check_second_order(data, x, t, p, spec.eval);
    } else {
      FourthOrderParams k;
      k.k1 = paxes[0][idx[3]];
      k.k2 = paxes[1][idx[4]];
      k.k3 = paxes[2][idx[5]];
      k.k4 = paxes[3][idx[6]];
      k.variant = spec.variant;
      try {
        out[flat] = check_fourth_order(data, x, t, k, spec.eval, /*allow_inadmissible=*/true);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InadmissibleParams) throw;
        CheckReport rep;  // bound undefined at this grid point
        rep.theorem = Theorem::fourth;
        rep.variant = spec.variant;
        rep.n = n;
        rep.x = x;
        rep.t = t;
        rep.fourth = k;
        rep.lhs = rep.rhs = rep.slack = std::numeric_limits<double>::quiet_NaN();
        rep.admissible = false;
        out[flat] = rep;
      }
    }
  }
  return out;
}

std::string sweep_csv(const SweepSpec& spec, const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  const int n = spec.scenarios.front().dimension();
  os << report_csv_header(spec.theorem, n) << '\n';
  for (const auto& r : reports) os << report_csv_row(r) << '\n';
  return os.str();
}

namespace {

std::vector<double> clamp_box(std::span<const double> p, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
  std::vector<double> q(p.begin(), p.end());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::clamp(q[i], lo[i], hi[i]);
  return q;
}

SecondOrderParams project_second(int n, double a, double b, double c) {
  SecondOrderParams p{std::max(a, 0.0), std::max(b, 0.0), std::max(c, 0.0)};
  const double s = (n - 1) * (p.alpha + p.beta) + p.gamma;
  if (s > 1.0) {
    p.alpha /= s;
    p.beta /= s;
    p.gamma /= s;
  }
  return p;
}

FourthOrderParams project_fourth(int n, FourthVariant variant, double k1, double k2, double k3,
                                 double k4) {
  FourthOrderParams k;
  k.variant = variant;
  k.k2 = std::min(k2, 0.0);
  k.k3 = std::min(k3, 0.0);
  k.k4 = std::min(k4, 0.0);
  const double lim = -(1.0 - 1e-3) / n;
  const double s = k.k2 + k.k3;
  if (s < lim) {
    k.k2 *= lim / s;
    k.k3 *= lim / s;
  }
  const double lb = variant == FourthVariant::as_stated ? -double(n) * k.k4
                                                        : -double(n) * (n - 1) * k.k4;
  k.k1 = std::max(k1, lb);
  return k;
}

InitialData gaussian_at_origin(int n, double sigma) {
  GaussianComponent c;
  c.weight = 1.0;
  c.center.assign(n, 0.0);
  c.sigma = sigma;
  return InitialData::validate(n, 0.0, {c});
}

}  // namespace

ScenarioFamily make_family(const std::string& name, const FamilyConfig& cfg) {
  ScenarioFamily fam;
  fam.name = name;
  const int n = cfg.n;
  const EvalSpec eval = cfg.eval;

  if (name == "single_gaussian") {
    fam.lo = {1e-2};
    fam.hi = {10.0};
    fam.eval = [cfg, n, eval](std::span<const double> p) {
      const InitialData data = gaussian_at_origin(n, p[0]);
      const std::vector<double> x(n, 0.0);
      if (cfg.theorem == Theorem::second)
        return check_second_order(data, x, cfg.t_fixed, cfg.second, eval);
      return check_fourth_order(data, x, cfg.t_fixed, cfg.fourth, eval);
    };
    return fam;
  }

  if (name == "constant") {
    fam.lo = {-5.0};
    fam.hi = {5.0};
    fam.eval = [cfg, n, eval](std::span<const double> p) {
      const InitialData data = InitialData::validate(n, 1.0, {});
      std::vector<double> x(n, 0.0);
      x[0] = p[0];
      if (cfg.theorem == Theorem::second)
        return check_second_order(data, x, cfg.t_fixed, cfg.second, eval);
      return check_fourth_order(data, x, cfg.t_fixed, cfg.fourth, eval);
    };
    return fam;
  }

  if (name == "mixture1" || name == "mixture2" || name == "mixture3") {
    const int ncomp = name.back() - '0';
    // per component: weight, sigma, center (n); then x (n), t, inequality params
    for (int c = 0; c < ncomp; ++c) {
      fam.lo.insert(fam.lo.end(), {0.1, 1e-2});
      fam.hi.insert(fam.hi.end(), {3.0, 10.0});
      fam.lo.insert(fam.lo.end(), n, -5.0);
      fam.hi.insert(fam.hi.end(), n, 5.0);
    }
    fam.lo.insert(fam.lo.end(), n, -5.0);
    fam.hi.insert(fam.hi.end(), n, 5.0);
    fam.lo.push_back(1e-2);
    fam.hi.push_back(10.0);
    if (cfg.theorem == Theorem::second) {
      fam.lo.insert(fam.lo.end(), {0.0, 0.0, 0.0});
      fam.hi.insert(fam.hi.end(), {1.5, 1.5, 1.5});
    } else {
      fam.lo.insert(fam.lo.end(), {-3.0, -1.5, -1.5, -1.5});
      fam.hi.insert(fam.hi.end(), {3.0, 0.0, 0.0, 0.0});
    }
    const FourthVariant variant = cfg.fourth.variant;
    const Theorem theorem = cfg.theorem;
    fam.eval = [ncomp, n, theorem, variant, eval](std::span<const double> p) {
      std::size_t at = 0;
      std::vector<GaussianComponent> comps(ncomp);
      for (auto& c : comps) {
        c.weight = p[at++];
        c.sigma = p[at++];
        c.center.assign(p.begin() + at, p.begin() + at + n);
        at += n;
      }
      const std::vector<double> x(p.begin() + at, p.begin() + at + n);
      at += n;
      const double t = p[at++];
      const InitialData data = InitialData::validate(n, 0.0, std::move(comps));
      if (theorem == Theorem::second) {
        const SecondOrderParams sp = project_second(n, p[at], p[at + 1], p[at + 2]);
        return check_second_order(data, x, t, sp, eval);
      }
      const FourthOrderParams k = project_fourth(n, variant, p[at], p[at + 1], p[at + 2], p[at + 3]);
      return check_fourth_order(data, x, t, k, eval);
    };
    return fam;
  }

  throw Error(ErrorCode::BadInput, "unknown family: " + name);
}

namespace {

struct RestartOutcome {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg;
  long long evals = 0;
  bool converged = false;
  std::vector<std::pair<long long, double>> improvements;  // local eval index
};

RestartOutcome nelder_mead(const ScenarioFamily& fam, std::vector<double> start, long long max_evals) {
  const int d = fam.dim();
  RestartOutcome out;

  auto objective = [&](std::span<const double> p) {
    const auto q = clamp_box(p, fam.lo, fam.hi);
    const double v = fam.eval(q).slack;
    ++out.evals;
    if (v < out.best) {
      out.best = v;
      out.arg = q;
      out.improvements.emplace_back(out.evals, v);
    }
    return v;
  };

  std::vector<std::vector<double>> simplex(d + 1, start);
  std::vector<double> fval(d + 1);
  for (int i = 0; i < d; ++i) {
    double step = 0.15 * (fam.hi[i] - fam.lo[i]);
    if (start[i] + step > fam.hi[i]) step = -step;
    simplex[i + 1][i] += step;
  }
  for (int i = 0; i <= d && out.evals < max_evals; ++i) fval[i] = objective(simplex[i]);

  while (out.evals < max_evals) {
    std::vector<int> ord(d + 1);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fval[a] < fval[b]; });
    const int best = ord[0], worst = ord[d], second_worst = ord[d - 1];

    double diam = 0.0;
    for (int i = 0; i < d; ++i)
      diam = std::max(diam, std::abs(simplex[worst][i] - simplex[best][i]) /
                                std::max(1.0, fam.hi[i] - fam.lo[i]));
    if (diam < 1e-10 && std::abs(fval[worst] - fval[best]) < 1e-13 * std::max(1.0, std::abs(fval[best]))) {
      out.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (int i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (int k = 0; k < d; ++k) centroid[k] += simplex[i][k] / d;
    }
    auto blend = [&](double coef) {
      std::vector<double> p(d);
      for (int k = 0; k < d; ++k) p[k] = centroid[k] + coef * (centroid[k] - simplex[worst][k]);
      return p;
    };

    const auto refl = blend(1.0);
    const double f_refl = objective(refl);
    if (f_refl < fval[best]) {
      const auto expa = blend(2.0);
      const double f_expa = out.evals < max_evals ? objective(expa) : f_refl;
      if (f_expa < f_refl) {
        simplex[worst] = expa;
        fval[worst] = f_expa;
      } else {
        simplex[worst] = refl;
        fval[worst] = f_refl;
      }
    } else if (f_refl < fval[second_worst]) {
      simplex[worst] = refl;
      fval[worst] = f_refl;
    } else {
      const auto contr = blend(f_refl < fval[worst] ? 0.5 : -0.5);
      const double f_contr = out.evals < max_evals ? objective(contr) : f_refl;
      if (f_contr < std::min(f_refl, fval[worst])) {
        simplex[worst] = contr;
        fval[worst] = f_contr;
      } else {
        // shrink toward the best vertex
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (int k = 0; k < d; ++k)
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          if (out.evals >= max_evals) break;
          fval[i] = objective(simplex[i]);
        }
      }
    }
  }
  return out;
}

}  // namespace

ProbeResult minimize_slack(const ScenarioFamily& family, int budget, std::uint64_t seed) {
  if (budget < 50) throw Error(ErrorCode::BudgetTooSmall, "probe budget must be >= 50 evaluations");
  const int d = family.dim();
  const int restarts = std::max(4, budget / 200);

  // coarse seeded pre-scan; the optimizer can only improve on it
  const int scan_count = std::max(2 * restarts, std::min(budget / 5, 16 * d + 8));
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> scan(scan_count);
  for (int s = 0; s < scan_count; ++s) {
    scan[s].resize(d);
    for (int i = 0; i < d; ++i) {
      if (s == 0) {
        scan[s][i] = 0.5 * (family.lo[i] + family.hi[i]);
      } else {
        std::uniform_real_distribution<double> u(family.lo[i], family.hi[i]);
        scan[s][i] = u(rng);
      }
    }
  }
  std::vector<double> scan_val(scan_count);
  for (int s = 0; s < scan_count; ++s) scan_val[s] = family.eval(scan[s]).slack;

  std::vector<int> order(scan_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scan_val[a] < scan_val[b]; });

  const long long per_restart = std::max<long long>(d + 2, (budget - scan_count) / restarts);
  std::vector<RestartOutcome> outs(restarts);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < restarts; ++r) {
    const auto& start = scan[order[r % scan_count]];
    outs[r] = nelder_mead(family, start, per_restart);
  }

  ProbeResult pr;
  pr.seed = seed;
  pr.best_slack = std::numeric_limits<double>::infinity();
  long long cumulative = 0;
  for (int s = 0; s < scan_count; ++s) {
    ++cumulative;
    if (scan_val[s] < pr.best_slack) {
      pr.best_slack = scan_val[s];
      pr.argmin = scan[s];
      pr.history.emplace_back(cumulative, scan_val[s]);
    }
  }
  for (int r = 0; r < restarts; ++r) {
    for (const auto& [local, v] : outs[r].improvements) {
      if (v < pr.best_slack) {
        pr.best_slack = v;
        pr.argmin = outs[r].arg;
        pr.history.emplace_back(cumulative + local, v);
      }
    }
    cumulative += outs[r].evals;
    pr.converged = pr.converged || outs[r].converged;
  }
  pr.iterations = cumulative;
  pr.best_report = family.eval(pr.argmin);
  pr.best_slack = pr.best_report.slack;  // re-evaluated; bitwise equal by determinism
  return pr;
}

nlohmann::json probe_result_to_json(const ProbeResult& pr) {
  nlohmann::json j;
  j["best_slack"] = pr.best_slack;
  j["argmin"] = pr.argmin;
  j["best_report"] = report_to_json(pr.best_report);
  j["iterations"] = pr.iterations;
  j["converged"] = pr.converged;
  j["seed"] = pr.seed;
  auto hist = nlohmann::json::array();
  for (const auto& [it, v] : pr.history) hist.push_back({it, v});
  j["history"] = hist;
  return j;
}

std::vector<SharpnessPoint> sharpness_curve(int n, double t, bool gamma_one,
                                            std::span<const double> sigma_list) {
  require_time(t);
  std::vector<SharpnessPoint> out;
  out.reserve(sigma_list.size());
  const SecondOrderParams p{0.0, 0.0, gamma_one ? 1.0 : 0.0};
  const EvalSpec eval;  // closed form
  for (double s : sigma_list) {
    if (s < 0.0) throw Error(ErrorCode::NegativeSigma, "sharpness_curve sigma must be >= 0");
    const InitialData data = gaussian_at_origin(n, s);
    const std::vector<double> x(n, 0.0);
    const CheckReport rep = check_second_order(data, x, t, p, eval);
    SharpnessPoint pt;
    pt.sigma0 = s;
    pt.slack = rep.slack;
    pt.predicted = n * s * s / (2.0 * t * (s * s + 2.0 * t));
    out.push_back(pt);
  }
  return out;
}

}  // namespace liyau
