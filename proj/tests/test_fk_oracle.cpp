#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kb/fk_oracle.hpp"
#include "kb/lyapunov.hpp"

using namespace kb;

namespace {

OperatorSpec heat_spec() {
  return make_custom_spec(1, 1.0,
                          [](double) { return FieldValues{1, 0, 0, 0, 0, 0}; });
}

OperatorSpec ou_spec() {
  return make_custom_spec(
      1, 1.0, [](double y) { return FieldValues{1, 0, -y, -1, 0, 0}; });
}

MCConfig small_cfg() {
  MCConfig cfg;
  cfg.paths = 20000;
  cfg.dt = 2e-3;
  return cfg;
}

}  // namespace

TEST_CASE("constant observable has zero variance") {
  const MCEstimate est =
      estimate_semigroup(heat_spec(), 0.3, 0.2, [](double) { return 1.0; },
                         small_cfg());
  CHECK(est.mean == 1.0);
  CHECK(est.se == 0.0);
  CHECK(est.killed_fraction == doctest::Approx(0.0));
  CHECK_FALSE(est.heavy_tail);
}

TEST_CASE("antithetic pairing cancels odd observables exactly") {
  // constant diffusion, zero drift: the paired paths are exact mirrors
  const MCEstimate est = estimate_semigroup(
      heat_spec(), 0.0, 0.3, [](double y) { return y; }, small_cfg());
  CHECK(est.mean == 0.0);
}

TEST_CASE("Ornstein-Uhlenbeck second moment within three standard errors") {
  const double x = 0.5, t = 0.5;
  const double mu = x * std::exp(-t), var = 1.0 - std::exp(-2.0 * t);
  const double exact = var + mu * mu;
  MCConfig cfg = small_cfg();
  cfg.paths = 50000;
  const MCEstimate est = estimate_semigroup(
      ou_spec(), x, t, [](double y) { return y * y; }, cfg);
  CHECK(std::abs(est.mean - exact) <= 3.0 * est.se + 5e-3);
  CHECK(est.se > 0.0);
  CHECK(est.paths == cfg.paths);
}

TEST_CASE("identical configuration reproduces bitwise") {
  auto run = [](std::uint64_t seed) {
    MCConfig cfg = small_cfg();
    cfg.paths = 5000;
    cfg.seed = seed;
    return estimate_semigroup(ou_spec(), 0.2, 0.3,
                              [](double y) { return std::cos(y); }, cfg);
  };
  const MCEstimate a = run(1), b = run(1), c = run(2);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  CHECK(a.mean != c.mean);
}

TEST_CASE("killing weight is monotone in the potential") {
  auto with_v = [](double scale) {
    return make_custom_spec(1, 1.0, [scale](double y) {
      return FieldValues{1, 0, -y, -1, scale * y * y, 2 * scale * y};
    });
  };
  MCConfig cfg = small_cfg();
  cfg.paths = 10000;
  auto mass = [&](double scale) {
    return estimate_semigroup(with_v(scale), 0.3, 0.4,
                              [](double) { return 1.0; }, cfg);
  };
  const MCEstimate m1 = mass(1.0), m2 = mass(2.0);
  CHECK(m1.mean < 1.0);
  CHECK(m2.mean < m1.mean);
  CHECK(m2.killed_fraction > m1.killed_fraction);
}

TEST_CASE("shared-path estimates at several horizons") {
  std::vector<PathObservable> obs;
  for (double t : {0.1, 0.2, 0.3})
    obs.push_back({t, [](double y) { return y * y; }});
  MCConfig cfg = small_cfg();
  cfg.paths = 30000;
  const std::vector<MCEstimate> est = estimate_paths(ou_spec(), 0.5, obs, cfg);
  REQUIRE(est.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const double t = obs[i].t;
    const double mu = 0.5 * std::exp(-t), var = 1.0 - std::exp(-2.0 * t);
    CHECK(std::abs(est[i].mean - (var + mu * mu)) <=
          3.0 * est[i].se + 5e-3);
  }
}

TEST_CASE("weighted moment estimate is finite for the polynomial family") {
  const OperatorSpec spec = validate_polynomial_params(2, 3, 4, 1);
  const LyapunovParams par = default_params(spec, 10);
  const WeightFamily wf(par, spec.poly);
  MCConfig cfg = small_cfg();
  cfg.paths = 5000;
  const MCEstimate e1 = estimate_xi(spec, wf, 0.2, 0.2, 1, cfg);
  const MCEstimate e2 = estimate_xi(spec, wf, 0.2, 0.2, 2, cfg);
  CHECK(std::isfinite(e1.mean));
  CHECK(std::isfinite(e2.mean));
  CHECK(e1.mean > 0.0);
  CHECK(e2.mean >= e1.mean);  // faster-growing weight dominates pathwise
}

TEST_CASE("explosive drift raises a blowup error") {
  const OperatorSpec bad = make_custom_spec(1, 1.0, [](double y) {
    return FieldValues{1, 0, 40.0 * (y + 0.5), 40.0, 0, 0};
  });
  MCConfig cfg = small_cfg();
  cfg.paths = 200;
  cfg.blowup_radius = 50.0;
  CHECK_THROWS_AS(
      estimate_semigroup(bad, 1.0, 2.0, [](double) { return 1.0; }, cfg),
      BlowupError);
}
