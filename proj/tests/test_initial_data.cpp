#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "liyau/initial_data.hpp"
#include "liyau/quadrature.hpp"

using namespace liyau;

namespace {

GaussianComponent comp(double w, std::vector<double> mu, double sigma) {
  return GaussianComponent{w, std::move(mu), sigma};
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("validate accepts constant data and flags point masses") {
  const auto constant = InitialData::validate(1, 1.0, {});
  CHECK(!constant.closed_form_only());

  const auto pm = InitialData::validate(1, 0.0, {comp(1.0, {0.0}, 0.0)});
  CHECK(pm.closed_form_only());
}

TEST_CASE("validate rejects bad data with the right codes") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::BadInput;
  };
  CHECK(code_of([] { InitialData::validate(2, 0.0, {}); }) == ErrorCode::VanishingData);
  CHECK(code_of([] { InitialData::validate(1, 1.0, {comp(0.0, {0.0}, 1.0)}); }) ==
        ErrorCode::NonPositiveWeight);
  CHECK(code_of([] { InitialData::validate(1, 1.0, {comp(1.0, {0.0}, -0.5)}); }) ==
        ErrorCode::NegativeSigma);
  CHECK(code_of([] { InitialData::validate(2, 1.0, {comp(1.0, {0.0}, 1.0)}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("eval_g matches the mixture formula") {
  const auto constant = InitialData::validate(3, 1.0, {});
  CHECK(eval_g(constant, std::vector<double>{0.3, -2.0, 5.0}) == 1.0);

  const auto one = InitialData::validate(1, 0.0, {comp(1.0, {0.0}, 1.0)});
  CHECK(eval_g(one, std::vector<double>{0.0}) == 1.0);

  // w=2, mu=0, sigma=1 at |y|^2 = 2 -> 2 e^{-1}
  const auto two = InitialData::validate(2, 0.0, {comp(2.0, {0.0, 0.0}, 1.0)});
  CHECK(close(eval_g(two, std::vector<double>{1.0, 1.0}), 2.0 * std::exp(-1.0), 1e-15));

  const auto pm = InitialData::validate(1, 0.0, {comp(1.0, {0.0}, 0.0)});
  CHECK_THROWS_AS((void)eval_g(pm, std::vector<double>{0.0}), Error);
}

TEST_CASE("closed-form moments: constant data") {
  const int n = 3;
  const double t = 0.7;
  const auto data = InitialData::validate(n, 2.5, {});
  const auto mb = closed_form_moments(data, std::vector<double>(n, 0.4), t);
  CHECK(close(mb.u_value, 2.5, 1e-14));
  for (int i = 0; i < n; ++i) {
    CHECK(mb.m1[i] == 0.0);
    CHECK(mb.m3_diag[i] == 0.0);
    CHECK(close(mb.m2(i, i), 2.0 * t, 1e-14));
    CHECK(close(mb.m4_diag[i], 12.0 * t * t, 1e-13));
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      CHECK(mb.m2(i, j) == 0.0);
      CHECK(close(mb.m4_pair(i, j), 4.0 * t * t, 1e-13));
    }
  }
}

TEST_CASE("closed-form moments: point mass at evaluation point") {
  const int n = 2;
  const double t = 0.3, w = 1.7;
  const auto data = InitialData::validate(n, 0.0, {comp(w, {1.0, -2.0}, 0.0)});
  const auto mb = closed_form_moments(data, std::vector<double>{1.0, -2.0}, t);
  CHECK(close(mb.u_value, w * std::pow(4.0 * std::numbers::pi * t, -n / 2.0), 1e-14));
  for (int i = 0; i < n; ++i) {
    CHECK(mb.m1[i] == 0.0);
    CHECK(mb.m2(i, i) == 0.0);
    CHECK(mb.m4_diag[i] == 0.0);
  }
}

TEST_CASE("closed-form moments: single gaussian first moment") {
  // mu = 0: m1 = 2t x / (sigma^2 + 2t)
  const double sigma = 0.8, t = 0.45, x = 1.3;
  const auto data = InitialData::validate(1, 0.0, {comp(1.0, {0.0}, sigma)});
  const auto mb = closed_form_moments(data, std::vector<double>{x}, t);
  CHECK(close(mb.m1[0], 2.0 * t * x / (sigma * sigma + 2.0 * t), 1e-14));
}

TEST_CASE("closed-form moments agree with both quadrature engines") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> usig(0.2, 2.0), ut(0.1, 2.0), ux(-3.0, 3.0),
      uoff(-1.5, 1.5), uw(0.2, 2.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 3;
    const int ncomp = 1 + trial % 2;
    std::vector<double> x(n);
    for (auto& xi : x) xi = ux(rng);
    std::vector<GaussianComponent> comps;
    for (int c = 0; c < ncomp; ++c) {
      std::vector<double> mu(n);
      for (int i = 0; i < n; ++i) mu[i] = x[i] + uoff(rng);
      comps.push_back(comp(uw(rng), mu, usig(rng)));
    }
    const double offset = trial % 3 == 0 ? 0.5 : 0.0;
    const auto data = InitialData::validate(n, offset, comps);
    const double t = ut(rng);

    const auto cf = closed_form_moments(data, x, t);

    QuadratureSpec gh;
    gh.engine = QuadEngine::gauss_hermite;
    gh.order_per_axis = 40;
    gh.refine = true;
    const auto qm = quadrature_moments(data, x, t, gh);

    QuadratureSpec tr;
    tr.engine = QuadEngine::trapezoid;
    tr.steps_per_axis = n == 3 ? 256 : 400;
    tr.truncation_radius = 8.0;
    tr.refine = true;
    const auto tm = quadrature_moments(data, x, t, tr);

    for (const auto* q : {&qm, &tm}) {
      const double tol = std::max(1e-8, 10.0 * q->err_estimate);
      CHECK(std::abs(q->u_value - cf.u_value) / cf.u_value <= tol);
      for (int i = 0; i < n; ++i) {
        CHECK(close(q->m1[i], cf.m1[i], tol * std::max(1.0, std::abs(cf.m1[i]))));
        CHECK(close(q->m3_diag[i], cf.m3_diag[i], tol * std::max(1.0, std::abs(cf.m3_diag[i]))));
        CHECK(close(q->m4_diag[i], cf.m4_diag[i], tol * std::max(1.0, std::abs(cf.m4_diag[i]))));
        for (int j = 0; j < n; ++j) {
          CHECK(close(q->m2(i, j), cf.m2(i, j), tol * std::max(1.0, std::abs(cf.m2(i, j)))));
          if (i != j)
            CHECK(close(q->m4_pair(i, j), cf.m4_pair(i, j),
                        tol * std::max(1.0, std::abs(cf.m4_pair(i, j)))));
        }
      }
    }
  }
}

TEST_CASE("scale invariance of moments, scaling of u") {
  const auto base = InitialData::validate(
      2, 0.4, {comp(1.0, {0.5, -0.3}, 0.7), comp(2.0, {-1.0, 1.0}, 1.4)});
  const double lambda = 3.7;
  std::vector<GaussianComponent> scaled;
  for (auto c : base.components()) {
    c.weight *= lambda;
    scaled.push_back(c);
  }
  const auto data2 = InitialData::validate(2, 0.4 * lambda, scaled);
  const std::vector<double> x{0.9, 0.1};
  const double t = 0.6;
  const auto a = closed_form_moments(base, x, t);
  const auto b = closed_form_moments(data2, x, t);
  CHECK(close(b.u_value, lambda * a.u_value, 1e-12 * a.u_value * lambda));
  for (int i = 0; i < 2; ++i) {
    CHECK(close(a.m1[i], b.m1[i], 1e-12));
    CHECK(close(a.m4_diag[i], b.m4_diag[i], 1e-12));
    for (int j = 0; j < 2; ++j) CHECK(close(a.m2(i, j), b.m2(i, j), 1e-12));
  }
}

TEST_CASE("translation invariance of moments") {
  const auto base = InitialData::validate(2, 0.0, {comp(1.0, {0.5, -0.3}, 0.7)});
  const std::vector<double> shift{1.25, -0.5};
  std::vector<GaussianComponent> moved;
  for (auto c : base.components()) {
    for (int i = 0; i < 2; ++i) c.center[i] += shift[i];
    moved.push_back(c);
  }
  const auto data2 = InitialData::validate(2, 0.0, moved);
  const std::vector<double> x{0.9, 0.1};
  const std::vector<double> x2{0.9 + shift[0], 0.1 + shift[1]};
  const double t = 0.6;
  const auto a = closed_form_moments(base, x, t);
  const auto b = closed_form_moments(data2, x2, t);
  CHECK(close(a.u_value, b.u_value, 1e-12 * a.u_value));
  for (int i = 0; i < 2; ++i) {
    CHECK(close(a.m1[i], b.m1[i], 1e-12));
    CHECK(close(a.m3_diag[i], b.m3_diag[i], 1e-12));
    for (int j = 0; j < 2; ++j) CHECK(close(a.m2(i, j), b.m2(i, j), 1e-12));
  }
}

TEST_CASE("moment bundle invariants hold on random mixtures") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<GaussianComponent> comps;
    const int ncomp = 1 + int(u01(rng) * 3);
    for (int c = 0; c < ncomp; ++c) {
      std::vector<double> mu(n);
      for (auto& m : mu) m = 4.0 * (u01(rng) - 0.5);
      comps.push_back(comp(0.1 + 2.0 * u01(rng), mu, 0.05 + 2.0 * u01(rng)));
    }
    const auto data = InitialData::validate(n, u01(rng) < 0.3 ? 0.2 : 0.0, comps);
    std::vector<double> x(n);
    for (auto& xi : x) xi = 6.0 * (u01(rng) - 0.5);
    const double t = 0.05 + 2.0 * u01(rng);
    const auto mb = closed_form_moments(data, x, t);
    CHECK(mb.u_value > 0.0);
    for (int i = 0; i < n; ++i) {
      CHECK(mb.m2(i, i) >= mb.m1[i] * mb.m1[i] - 1e-12);
      CHECK(mb.m4_diag[i] >= -1e-12);
      CHECK(mb.m4_diag[i] >= mb.m2(i, i) * mb.m2(i, i) - 1e-10);  // Jensen
      for (int j = 0; j < n; ++j)
        if (i != j) CHECK(mb.m4_pair(i, j) >= -1e-12);
    }
  }
}

TEST_CASE("log-domain evaluation keeps ratios finite far from the data") {
  const auto data = InitialData::validate(1, 0.0, {comp(1.0, {0.0}, 0.05)});
  const std::vector<double> x{40.0};
  const double t = 0.01;
  const auto mb = closed_form_moments(data, x, t);
  CHECK(std::isfinite(mb.m1[0]));
  CHECK(std::isfinite(mb.m4_diag[0]));
  CHECK(mb.u_value >= 0.0);  // may underflow to zero, moments must not
  CHECK(std::isfinite(log_u(data, x, t)));
}

TEST_CASE("scenario JSON round trip") {
  const auto data = InitialData::validate(
      2, 0.25, {comp(1.5, {0.5, -0.3}, 0.7), comp(0.5, {-1.0, 1.0}, 0.0)});
  const auto j = scenario_to_json(data);
  const auto back = scenario_from_json(j);
  CHECK(back.dimension() == 2);
  CHECK(back.constant_offset() == 0.25);
  CHECK(back.closed_form_only());
  REQUIRE(back.components().size() == 2);
  CHECK(back.components()[0].weight == 1.5);
  CHECK(back.components()[1].sigma == 0.0);
  CHECK(back.components()[0].center == std::vector<double>{0.5, -0.3});
}

TEST_CASE("time floor is enforced") {
  const auto data = InitialData::validate(1, 1.0, {});
  CHECK_THROWS_AS((void)closed_form_moments(data, std::vector<double>{0.0}, 1e-9), Error);
  CHECK_THROWS_AS((void)closed_form_moments(data, std::vector<double>{0.0}, 0.0), Error);
  CHECK_THROWS_AS((void)closed_form_moments(data, std::vector<double>{0.0}, -1.0), Error);
}
