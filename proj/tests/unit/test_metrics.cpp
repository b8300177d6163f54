#include <doctest.h>

#include <cmath>
#include <random>

#include "msviper/core/errors.hpp"
#include "msviper/metrics/metrics.hpp"
#include "oracles.hpp"

using namespace msviper;
using namespace msviper::metrics;

TEST_CASE("efficiency by hand") {
  const auto r = efficiency(0.5, 0.4, 2, 100);
  CHECK(r.e_O == doctest::Approx(0.1));
  CHECK(r.e_R == doctest::Approx(10.0));
  const auto up = efficiency(0.2, 0.3, 5, 10);
  CHECK(up.e_O == doctest::Approx(0.1));
  CHECK(up.e_R == doctest::Approx(1.0));
  CHECK_THROWS_AS(efficiency(0.0, 0.3, 5, 10), DomainError);
  CHECK_THROWS_AS(efficiency(0.2, 0.3, 0, 10), DomainError);
  CHECK_THROWS_AS(efficiency(0.2, 0.3, 5, 0), DomainError);
}

TEST_CASE("oscillation metrics on hand sequences") {
  const OscillationParams p{4, 3};
  const std::vector<double> steady{0.0, 0.0, 0.4, 0.4, 0.4};
  const auto a = oscillation_metrics(steady, p);
  CHECK(a.c_osc_pct == 0.0);
  CHECK(a.c_osc_delta == doctest::Approx(0.4 / 4.0));
  const std::vector<double> zigzag{1.0, -1.0, 1.0, -1.0, 0.0, 0.0};
  const auto b = oscillation_metrics(zigzag, p);
  CHECK(b.c_osc_pct == doctest::Approx(4.0 / 6.0));
  CHECK(b.c_osc_delta == doctest::Approx((2.0 + 2.0 + 2.0 + 1.0 + 0.0) / 5.0));
  // A zero in between is not a sign change.
  const std::vector<double> gapped{1.0, 0.0, -1.0, 0.0, 1.0};
  CHECK(sign_alternations(gapped) == 0);
  CHECK(sign_alternations(zigzag) == 3);
  CHECK_THROWS_AS((OscillationParams{1, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((OscillationParams{4, 4}.validate()), ConfigError);
}

TEST_CASE("vibration V_b by hand") {
  const std::vector<envs::TerrainSignals> h{{0.1, -0.2}, {0.0, 0.5}, {-1.0, 0.0}, {0.2, 0.2}};
  const double g = 0.5;
  const double expect = 0.125 * 0.3 + 0.25 * 0.5 + 0.5 * 1.0 + 1.0 * 0.4;
  CHECK(vibration_vb(h, g) == doctest::Approx(expect));
  const std::vector<envs::TerrainSignals> short_h{{0.1, 0.1}, {0.1, 0.1}, {0.1, 0.1}};
  CHECK_THROWS_AS(vibration_vb(short_h, g), ArityError);
  envs::EpisodeLog log;
  log.signals = {{1.0, 0.0}, {0.0, 1.0}};
  const auto series = vibration_series(log, g);
  REQUIRE(series.size() == 2);
  CHECK(series[0] == doctest::Approx(1.0));
  CHECK(series[1] == doctest::Approx(1.5));
}

TEST_CASE("freeze events need k consecutive frozen steps") {
  envs::EpisodeLog log;
  auto push = [&](bool froze) { log.infos.push_back(envs::StepInfo{false, false, froze}); };
  for (int i = 0; i < 9; ++i) push(true);
  push(false);
  for (int i = 0; i < 9; ++i) push(true);
  CHECK_FALSE(has_freeze_event(log));
  push(true);
  CHECK(has_freeze_event(log));
  CHECK(has_freeze_event(log, 3));
}

TEST_CASE("coverage matches enumeration and simulation") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  for (int trial = 0; trial < 40; ++trial) {
    CoverageParams c;
    c.K = 1 + static_cast<int>(gen() % 8);
    c.n_E = 1 + static_cast<int>(gen() % 3);
    c.m = c.n_E * (1 + static_cast<int>(gen() % 4));
    c.epsilon = 0.25 + 0.75 * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    c.p.assign(static_cast<std::size_t>(c.K), std::vector<double>(static_cast<std::size_t>(c.n_E)));
    for (auto& row : c.p)
      for (double& v : row) v = u(gen);
    const int need = coverage_threshold(c.K, c.epsilon);
    for (auto method : {CoverageMethod::viper, CoverageMethod::msviper}) {
      std::vector<double> hit;
      for (const auto& row : c.p) {
        double miss = 1.0;
        for (int t = 0; t < c.m; ++t) {
          const int e = method == CoverageMethod::msviper ? t / (c.m / c.n_E) : c.n_E - 1;
          miss *= 1.0 - row[static_cast<std::size_t>(e)];
        }
        hit.push_back(1.0 - miss);
      }
      CHECK(coverage_probability(c, method) == doctest::Approx(oracle::tail_by_enumeration(hit, need)).epsilon(1e-9));
    }
    if (c.n_E == 1) {
      CHECK(coverage_probability(c, CoverageMethod::viper) == coverage_probability(c, CoverageMethod::msviper));
    }
    if (trial < 5) {
      const double mc = oracle::coverage_monte_carlo(c.p, c.m, true, c.epsilon, 20000, 99 + trial);
      CHECK(std::abs(mc - coverage_probability(c, CoverageMethod::msviper)) < 0.02);
    }
  }
}

TEST_CASE("coverage rejects bad parameters") {
  CoverageParams c;
  c.K = 2;
  c.n_E = 2;
  c.m = 3;
  c.p = {{0.1, 0.2}, {0.3, 0.4}};
  c.epsilon = 0.5;
  CHECK_NOTHROW(c.validate(CoverageMethod::viper));
  CHECK_THROWS_AS(c.validate(CoverageMethod::msviper), ConfigError);
  c.m = 4;
  c.p[0][0] = 1.5;
  CHECK_THROWS_AS(c.validate(CoverageMethod::msviper), ConfigError);
  CHECK(coverage_threshold(10, 0.8) == 8);
  CHECK(coverage_threshold(10, 0.81) == 9);
  const std::vector<double> probs{0.5, 0.5};
  const auto d = poisson_binomial(probs);
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d[1] == doctest::Approx(0.5));
  CHECK(d[2] == doctest::Approx(0.25));
}

TEST_CASE("empirical coverage counts matched critical states") {
  cart::PairSet D(2);
  const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};
  D.add(a, 0);
  D.add(b, 1);
  const std::vector<StateVector> critical{{0.0, 0.0}, {1.05, 1.0}, {5.0, 5.0}};
  CHECK(empirical_critical_coverage(D, critical) == doctest::Approx(1.0 / 3.0));
  CHECK(empirical_critical_coverage(D, critical, 0.1) == doctest::Approx(2.0 / 3.0));
}
