#pragma once

#include <random>
#include <vector>

#include "liyau/initial_data.hpp"

namespace testsupport {

struct Scenario {
  liyau::InitialData data;
  std::vector<double> x;
  double t;
};

/// Random mixtures in the verification envelope: n in {1,2,3}, sigma in
/// [0.2, 2], t in [0.1, 2], |x| <= 3, centers within 1.5 of x per axis
/// (keeps the trapezoid box dominant over every posterior).
inline Scenario random_scenario(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> usig(0.2, 2.0), ut(0.1, 2.0), ux(-3.0, 3.0),
      uoff(-1.5, 1.5), uw(0.2, 2.0), u01(0.0, 1.0);
  Scenario s{liyau::InitialData::validate(1, 1.0, {}), {}, 1.0};
  s.x.resize(n);
  for (auto& xi : s.x) xi = ux(rng);
  const int ncomp = 1 + int(u01(rng) * 3.0);
  std::vector<liyau::GaussianComponent> comps;
  for (int c = 0; c < ncomp; ++c) {
    liyau::GaussianComponent g;
    g.weight = uw(rng);
    g.sigma = usig(rng);
    g.center.resize(n);
    for (int i = 0; i < n; ++i) g.center[i] = s.x[i] + uoff(rng);
    comps.push_back(std::move(g));
  }
  const double offset = u01(rng) < 0.25 ? 0.3 : 0.0;
  s.data = liyau::InitialData::validate(n, offset, std::move(comps));
  s.t = ut(rng);
  return s;
}

}  // namespace testsupport
