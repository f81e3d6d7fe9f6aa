#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "liyau/initial_data.hpp"
#include "liyau/kernel_moments.hpp"
#include "test_support.hpp"

using namespace liyau;
using testsupport::random_scenario;

namespace {

InitialData point_mass(int n, std::vector<double> at, double w = 1.0) {
  return InitialData::validate(n, 0.0, {GaussianComponent{w, std::move(at), 0.0}});
}

InitialData single_gaussian(int n, double sigma) {
  return InitialData::validate(n, 0.0, {GaussianComponent{1.0, std::vector<double>(n, 0.0), sigma}});
}

bool oracle_match(double value, double fd) {
  // relative 1e-5, absolute 1e-8 below 1e-6
  if (std::abs(value) < 1e-6) return std::abs(value - fd) <= 1e-8;
  return std::abs(value - fd) <= 1e-5 * std::abs(value);
}

}  // namespace

TEST_CASE("ratios: constant data gives all-zero derivatives") {
  const auto data = InitialData::validate(2, 3.0, {});
  const double t = 0.8;
  const auto r = ratios_from_moments(closed_form_moments(data, std::vector<double>{0.4, -1.0}, t), t, 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(r.grad[i]) <= 1e-15);
    CHECK(std::abs(r.third_diag[i]) <= 1e-15);
    CHECK(std::abs(r.fourth_diag[i]) <= 1e-13);
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(r.hess(i, j)) <= 1e-14);
      if (i != j) CHECK(std::abs(r.fourth_pair(i, j)) <= 1e-13);
    }
  }
}

TEST_CASE("ratios: fundamental solution at its center") {
  const double t = 0.6;
  const auto data = point_mass(2, {1.0, -1.0});
  const auto r =
      ratios_from_moments(closed_form_moments(data, std::vector<double>{1.0, -1.0}, t), t, 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(r.hess(i, i) + 1.0 / (2.0 * t)) <= 1e-14);
    CHECK(std::abs(r.fourth_diag[i] - 3.0 / (4.0 * t * t)) <= 1e-13);
  }
}

TEST_CASE("ratios: point mass at offset sqrt(2t) zeroes the diagonal hessian") {
  const double t = 0.9;
  const auto data = point_mass(2, {0.0, 0.0});
  const std::vector<double> x{std::sqrt(2.0 * t), 0.0};
  const auto r = ratios_from_moments(closed_form_moments(data, x, t), t, 2);
  CHECK(std::abs(r.hess(0, 0)) <= 1e-14);
}

TEST_CASE("laplacian of log u") {
  const double t = 0.75;
  const auto constant = InitialData::validate(3, 1.0, {});
  const auto rc =
      ratios_from_moments(closed_form_moments(constant, std::vector<double>(3, 0.2), t), t, 3);
  CHECK(std::abs(laplacian_log_u(rc)) <= 1e-13);

  const auto pm = point_mass(3, std::vector<double>(3, 0.0));
  const auto rp =
      ratios_from_moments(closed_form_moments(pm, std::vector<double>(3, 0.0), t), t, 3);
  CHECK(std::abs(laplacian_log_u(rp) + 3.0 / (2.0 * t)) <= 1e-13);

  const double sigma = 1.3;
  const auto g = single_gaussian(2, sigma);
  const std::vector<double> x{0.7, -0.4};
  const auto rg = ratios_from_moments(closed_form_moments(g, x, t), t, 2);
  CHECK(std::abs(laplacian_log_u(rg) + 2.0 / (sigma * sigma + 2.0 * t)) <= 1e-12);
}

TEST_CASE("finite differences: closed forms for simple states") {
  const double sigma = 0.9, t = 0.7;
  const auto g = single_gaussian(1, sigma);
  const std::vector<double> x{1.1};
  const int d1[] = {1};
  const double fd = finite_difference_ratio(g, x, t, d1);
  const double exact = -x[0] / (sigma * sigma + 2.0 * t);
  CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));

  const auto constant = InitialData::validate(2, 1.0, {});
  const int d2[] = {2, 0};
  CHECK(std::abs(finite_difference_ratio(constant, std::vector<double>{0.3, 0.1}, t, d2)) <= 1e-8);

  // sigma -> 0 continuity: narrow gaussian near its center vs moment algebra
  const auto narrow = single_gaussian(1, 1e-2);
  const std::vector<double> xn{5e-3};
  const int d4[] = {4};
  const double fd4 = finite_difference_ratio(narrow, xn, t, d4);
  const auto r = ratios_from_moments(closed_form_moments(narrow, xn, t), t, 1);
  CHECK(std::abs(fd4 - r.fourth_diag[0]) <= 1e-5 * std::abs(r.fourth_diag[0]));
}

TEST_CASE("finite differences: step guard") {
  const auto g = single_gaussian(1, 1.0);
  const int d1[] = {1};
  CHECK_THROWS_AS(
      (void)finite_difference_ratio(g, std::vector<double>{0.0}, 1.0, d1, 1e-8), Error);
}

TEST_CASE("every lemma ratio matches the finite-difference oracle") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 12; ++trial) {
    const auto s = random_scenario(rng, 1 + trial % 3);
    const int n = s.data.dimension();
    const auto r = ratios_from_moments(closed_form_moments(s.data, s.x, s.t), s.t, n);
    for (const auto& entry : ratio_entries(r)) {
      const double fd = finite_difference_ratio(s.data, s.x, s.t, entry.multi_index);
      INFO(entry.name, " value=", entry.value, " fd=", fd, " n=", n, " t=", s.t);
      CHECK(oracle_match(entry.value, fd));
    }
  }
}

TEST_CASE("heat residual") {
  const auto constant = InitialData::validate(2, 2.0, {});
  CHECK(heat_residual(constant, std::vector<double>{0.5, 0.5}, 1.0, 1e-3) == 0.0);

  const auto g = single_gaussian(1, 1.0);
  const std::vector<double> x{0.8};
  const double u0 = u_value(g, x, 1.0);
  CHECK(std::abs(heat_residual(g, x, 1.0, 1e-3)) / u0 <= 1e-5);

  const auto pm = point_mass(2, {0.0, 0.0});
  const std::vector<double> xp{1.0, 0.5};
  const double up = u_value(pm, xp, 1.0);
  CHECK(std::abs(heat_residual(pm, xp, 1.0, 1e-3)) / up <= 1e-5);
}

TEST_CASE("pair identity: sum_{i!=j} (z_i^2 + z_j^2) = 2(n-1)|z|^2") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 8; ++rep) {
      std::vector<double> z(n);
      for (auto& zi : z) zi = u(rng);
      double lhs = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) lhs += z[i] * z[i] + z[j] * z[j];
      const double rhs = 2.0 * (n - 1) * norm_sq(z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("discrete Jensen: (sum |f| g)^p <= sum |f|^p g") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 2 + int(u(rng) * 10);
    std::vector<double> g(m), f(m);
    double tot = 0.0;
    for (auto& gi : g) {
      gi = 0.01 + u(rng);
      tot += gi;
    }
    for (auto& gi : g) gi /= tot;
    for (auto& fi : f) fi = 6.0 * (u(rng) - 0.5);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      double mean = 0.0, pmean = 0.0;
      for (int i = 0; i < m; ++i) {
        mean += std::abs(f[i]) * g[i];
        pmean += std::pow(std::abs(f[i]), p) * g[i];
      }
      CHECK(std::pow(mean, p) <= pmean + 1e-12);
    }
  }
}

TEST_CASE("fourth-diagonal kernel equals its split form on random moments") {
  // (12t^2 - 12t m2 + m4)/16t^4 == (-12t m2 + m4)/16t^4 + (3/4)/t^2
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double t = 0.1 + u(rng), m2 = u(rng), m4 = u(rng);
    const double t4 = 16.0 * t * t * t * t;
    const double full = (12.0 * t * t - 12.0 * t * m2 + m4) / t4;
    const double split = (-12.0 * t * m2 + m4) / t4 + 0.75 / (t * t);
    CHECK(std::abs(full - split) <= 1e-12 * std::max(1.0, std::abs(full)));
  }
}

TEST_CASE("symmetry and the ratio-level classical bound on random scenarios") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_scenario(rng, 1 + trial % 3);
    const int n = s.data.dimension();
    const auto r = ratios_from_moments(closed_form_moments(s.data, s.x, s.t), s.t, n);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) {
      trace += r.hess(i, i);
      for (int j = 0; j < n; ++j) {
        CHECK(r.hess(i, j) == r.hess(j, i));
        if (i != j) CHECK(r.fourth_pair(i, j) == r.fourth_pair(j, i));
      }
    }
    CHECK(trace - norm_sq(r.grad) + n / (2.0 * s.t) >= -1e-9);
  }
}
