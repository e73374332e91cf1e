#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "kb/constants.hpp"

using namespace kb;

namespace {

std::array<double, 12> ones() {
  std::array<double, 12> c;
  c.fill(1.0);
  return c;
}

// plain-double re-derivation of the ladders; only usable while the k-th
// powers stay in range
struct PlainLadders {
  double A1, A2, A2t, A3, B1, B2, B3, B4, B4t, B5, B6, B6t, B7, B8;
};

PlainLadders plain_ladders(std::array<double, 12> c, double k, double g0,
                           double g1) {
  for (double& v : c) v = std::max(v, 1.0);
  const double kh = k / 2.0;
  auto P = [&](int i, double e) { return std::pow(c[i - 1], e); };
  PlainLadders L;
  L.A1 = P(1, kh);
  L.A2 = P(2, k) + P(1, kh) / std::pow(g0, kh) + P(3, kh) + P(4, kh);
  L.A2t = L.A2 + P(2, kh) * P(7, kh) + P(2, kh) * P(12, kh);
  L.A3 = P(5, k) + P(6, k) + P(2, kh) * P(6, kh);
  L.B1 = c[1];
  L.B2 = c[1] / g1 + c[1] * c[3] + c[10];
  L.B3 = c[1] * c[4] * c[4] + c[2] * c[5] + c[1] * c[1] * c[5] +
         c[1] * c[7] + c[8];
  L.B4 = c[2] + c[1] * c[1] + c[1] / std::sqrt(g1) +
         std::sqrt(c[1] * c[2] * c[6]) + P(2, 1.5) * std::sqrt(c[6]) +
         std::sqrt(c[1] * c[9]) + c[1] * std::sqrt(c[2]) +
         c[1] * std::sqrt(c[3]) + std::sqrt(c[1] * c[10]);
  L.B4t = L.B4 + std::sqrt(c[1] * c[2] * c[11]) + P(2, 1.5) * std::sqrt(c[11]);
  L.B5 = c[5] + c[1] * c[5] + std::sqrt(c[2] * c[5]) +
         c[1] * std::sqrt(c[5]) + std::sqrt(c[1] * c[2] * c[5]) +
         P(2, 1.5) * std::sqrt(c[5]) + c[4] + c[1] * c[4] + c[7];
  L.B6 = P(1, kh) + P(1, kh) / std::pow(g1, kh) + P(2, k) +
         P(2, kh) * P(7, kh) + P(3, kh) + P(7, k) + P(4, kh);
  L.B6t = L.B6 + P(2, kh) * P(12, kh) + P(12, k);
  L.B7 = P(6, k) + P(2, kh) * P(6, kh) + P(5, k);
  L.B8 = c[5] + c[4] * c[4];
  return L;
}

double plain_K(const PlainLadders& L, double k, const EnvelopeInputs& in) {
  const double s = in.sup_xi1, X1 = in.Xi1, X2 = in.Xi2;
  auto pw = [](double b, double e) { return std::pow(b, e); };
  double sum = L.B1 * pw(L.A1, (k - 1) / k) * s;
  sum += (L.B1 * std::sqrt(L.A2t) + L.B2 * pw(L.A2t, (k - 2) / k) +
          L.B4t * pw(L.A2t, (k - 1) / k)) *
         X1;
  sum += (L.B1 * std::sqrt(L.A3) + (L.B2 + L.B3) * pw(L.A3, (k - 2) / k) +
          L.B3 * pw(L.A2t, (k - 2) / k) +
          (L.B4t + L.B5) * pw(L.A3, (k - 1) / k) +
          L.B5 * pw(L.A2t, (k - 1) / k) + L.B6t * L.B8 + L.B7 * L.B8) *
         X2;
  sum += L.B1 * std::sqrt(L.A1 * X1 * s);
  sum += pw(L.A1, (k - 2) / k) *
         (L.B2 * pw(X1, 2 / k) + L.B3 * pw(X2, 2 / k)) * pw(s, (k - 2) / k);
  sum += L.B1 *
         (pw(L.A2t * X1, (k - 1) / k) + pw(L.A3 * X2, (k - 1) / k)) *
         pw(s, 1 / k);
  sum += pw(L.A1, (k - 1) / k) *
         (L.B4t * pw(X1, 1 / k) + L.B5 * pw(X2, 1 / k)) * pw(s, (k - 1) / k);
  const double bracket = L.B6t * std::sqrt(X1) + L.B7 * std::sqrt(X2);
  sum += bracket * std::sqrt(in.E2);
  if (in.Eb <= 0.0) sum = std::max(sum - bracket * std::sqrt(-in.Eb), 0.0);
  return in.C_cal * sum;
}

EnvelopeInputs unit_inputs() {
  EnvelopeInputs in;
  in.sup_xi1 = in.Xi1 = in.Xi2 = in.E2 = in.fisher = 1.0;
  in.Eb = 0.0;
  return in;
}

}  // namespace

TEST_CASE("log-space scalar arithmetic") {
  const LogVal a = LogVal::from(3.0), b = LogVal::from(4.0);
  CHECK((a * b).value() == doctest::Approx(12.0).epsilon(1e-14));
  CHECK((a + b).value() == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(a.pow(10).value() == doctest::Approx(59049.0).epsilon(1e-13));
  CHECK(a.sqrt().value() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  const LogVal z = LogVal::from(0.0);
  CHECK(z.value() == 0.0);
  CHECK((z + a).value() == doctest::Approx(3.0));
  CHECK(z.pow(0.0).value() == 1.0);
  CHECK(z.pow(2.0).value() == 0.0);
  CHECK_THROWS_AS(LogVal::from(-1.0), std::domain_error);
  // a value whose 10th power overflows double survives in log space
  const LogVal big = LogVal::from(1e200).pow(10.0);
  CHECK(big.log10() == doctest::Approx(2000.0));
}

TEST_CASE("unit ladders") {
  const ConstantSet cs = assemble_constants(ones(), 10.0, 1.0, 1.0);
  CHECK(cs.A1.value() == doctest::Approx(1.0));
  CHECK(cs.A2.value() == doctest::Approx(4.0));
  CHECK(cs.A2t.value() == doctest::Approx(6.0));
  CHECK(cs.A3.value() == doctest::Approx(3.0));
  CHECK(cs.B1.value() == doctest::Approx(1.0));
  CHECK(cs.B2.value() == doctest::Approx(3.0));
  CHECK(cs.B3.value() == doctest::Approx(5.0));
  CHECK(cs.B4.value() == doctest::Approx(9.0));
  CHECK(cs.B4t.value() == doctest::Approx(11.0));
  CHECK(cs.B5.value() == doctest::Approx(9.0));
  CHECK(cs.B6.value() == doctest::Approx(7.0));
  CHECK(cs.B6t.value() == doctest::Approx(9.0));
  CHECK(cs.B7.value() == doctest::Approx(3.0));
  CHECK(cs.B8.value() == doctest::Approx(2.0));
}

TEST_CASE("A3 hand value") {
  auto c = ones();
  c[4] = 2.0;  // c5
  c[5] = 3.0;  // c6
  const ConstantSet cs = assemble_constants(c, 8.0, 1.0, 1.0);
  CHECK(cs.A3.value() == doctest::Approx(6898.0).epsilon(1e-12));
}

TEST_CASE("constants below one are clamped, raw values kept") {
  auto c = ones();
  c[3] = 0.5;
  const ConstantSet cs = assemble_constants(c, 10.0, 1.0, 1.0);
  CHECK(cs.c_raw[3] == 0.5);
  CHECK(cs.c[3] == 1.0);
  CHECK(cs.A2.value() == doctest::Approx(4.0));
}

TEST_CASE("assembly preconditions") {
  CHECK_THROWS_AS(assemble_constants(ones(), 10.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_constants(ones(), 10.0, 1.0, -0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_constants(ones(), 0.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("ladders match the plain-double oracle on random sets") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uc(0.5, 3.0), ug(0.5, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 12> c;
    for (double& v : c) v = uc(rng);
    const double g0 = ug(rng), g1 = ug(rng);
    const ConstantSet cs = assemble_constants(c, 10.0, g0, g1);
    const PlainLadders L = plain_ladders(c, 10.0, g0, g1);
    CHECK(cs.A1.value() == doctest::Approx(L.A1).epsilon(1e-10));
    CHECK(cs.A2.value() == doctest::Approx(L.A2).epsilon(1e-10));
    CHECK(cs.A2t.value() == doctest::Approx(L.A2t).epsilon(1e-10));
    CHECK(cs.A3.value() == doctest::Approx(L.A3).epsilon(1e-10));
    CHECK(cs.B2.value() == doctest::Approx(L.B2).epsilon(1e-10));
    CHECK(cs.B3.value() == doctest::Approx(L.B3).epsilon(1e-10));
    CHECK(cs.B4t.value() == doctest::Approx(L.B4t).epsilon(1e-10));
    CHECK(cs.B5.value() == doctest::Approx(L.B5).epsilon(1e-10));
    CHECK(cs.B6t.value() == doctest::Approx(L.B6t).epsilon(1e-10));
    CHECK(cs.B7.value() == doctest::Approx(L.B7).epsilon(1e-10));
    CHECK(cs.B8.value() == doctest::Approx(L.B8).epsilon(1e-10));
  }
}

TEST_CASE("kernel envelope") {
  const ConstantSet cs = assemble_constants(ones(), 10.0, 1.0, 1.0);
  EnvelopeInputs in = unit_inputs();
  CHECK(kernel_envelope(cs, in) == doctest::Approx(10.0));
  CHECK(kernel_envelope(cs, in, false) == doctest::Approx(8.0));
  in.Xi1 = 0.0;
  in.Xi2 = 0.0;
  CHECK(kernel_envelope(cs, in) == doctest::Approx(1.0));
  // linear in Xi2 with slope A3
  EnvelopeInputs a = unit_inputs(), b = unit_inputs();
  a.Xi2 = 0.0;
  b.Xi2 = 2.0;
  CHECK(kernel_envelope(cs, b) - kernel_envelope(cs, a) ==
        doctest::Approx(2.0 * cs.A3.value()).epsilon(1e-12));
}

TEST_CASE("gradient envelope unit regression") {
  const ConstantSet cs = assemble_constants(ones(), 10.0, 1.0, 1.0);
  const GradientEnvelope g = gradient_envelope_K(cs, unit_inputs());
  CHECK_FALSE(g.negative_radicand);
  CHECK(g.K == doctest::Approx(284.76723176542134).epsilon(1e-13));
  CHECK(g.log10_K == doctest::Approx(std::log10(g.K)).epsilon(1e-12));
}

TEST_CASE("gradient envelope matches the plain-double oracle") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uc(0.5, 3.0), ui(0.5, 2.0),
      ue(-1.0, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 12> c;
    for (double& v : c) v = uc(rng);
    const double g0 = ui(rng), g1 = ui(rng);
    EnvelopeInputs in;
    in.sup_xi1 = ui(rng);
    in.Xi1 = ui(rng);
    in.Xi2 = ui(rng);
    in.E2 = ui(rng);
    in.Eb = ue(rng);
    const ConstantSet cs = assemble_constants(c, 10.0, g0, g1);
    const GradientEnvelope g = gradient_envelope_K(cs, in);
    const double oracle = plain_K(plain_ladders(c, 10.0, g0, g1), 10.0, in);
    CHECK(g.K == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("endpoint entropy term") {
  const ConstantSet cs = assemble_constants(ones(), 10.0, 1.0, 1.0);
  EnvelopeInputs in = unit_inputs();
  const double base = gradient_envelope_K(cs, in).K;
  in.Eb = -1.0;
  const GradientEnvelope neg = gradient_envelope_K(cs, in);
  CHECK_FALSE(neg.negative_radicand);
  CHECK(neg.K < base);
  // bracket at units: B6t sqrt(Xi1) + B7 sqrt(Xi2) = 12
  CHECK(base - neg.K == doctest::Approx(12.0).epsilon(1e-12));
  in.Eb = 1.0;
  const GradientEnvelope pos = gradient_envelope_K(cs, in);
  CHECK(pos.negative_radicand);
  CHECK(pos.K == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("envelope is monotone in every constant and moment input") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uc(1.0, 3.0), ui(0.5, 2.0),
      ue(-1.0, 0.0);
  std::uniform_int_distribution<int> pick(0, 16);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 12> c;
    for (double& v : c) v = uc(rng);
    const double g0 = ui(rng), g1 = ui(rng);
    EnvelopeInputs in;
    in.sup_xi1 = ui(rng);
    in.Xi1 = ui(rng);
    in.Xi2 = ui(rng);
    in.E2 = ui(rng);
    in.Eb = ue(rng);
    const double base =
        gradient_envelope_K(assemble_constants(c, 10.0, g0, g1), in).K;
    const int which = pick(rng);
    auto c2 = c;
    EnvelopeInputs in2 = in;
    if (which < 12)
      c2[which] *= 1.01;
    else if (which == 12)
      in2.sup_xi1 *= 1.01;
    else if (which == 13)
      in2.Xi1 *= 1.01;
    else if (which == 14)
      in2.Xi2 *= 1.01;
    else if (which == 15)
      in2.E2 *= 1.01;
    else
      in2.Eb *= 0.99;  // toward zero, weakens the subtracted term
    const double bumped =
        gradient_envelope_K(assemble_constants(c2, 10.0, g0, g1), in2).K;
    CHECK(bumped >= base * (1.0 - 1e-12));
  }
}

TEST_CASE("cutoff-approximation constant update") {
  const ConstantSet cs = assemble_constants(ones(), 10.0, 1.0, 1.0);
  const ConstantSet up = approx_constant_update(cs, 1);
  CHECK(up.c[1] == doctest::Approx(2.0));
  CHECK(up.c[2] == doctest::Approx(2.0));
  CHECK(up.c[6] == doctest::Approx(5.0 * std::sqrt(3.0)).epsilon(1e-14));
  const ConstantSet up4 = approx_constant_update(cs, 4);
  CHECK(up4.c[6] == doctest::Approx(7.0 * std::sqrt(3.0)).epsilon(1e-14));
  const ConstantSet twice = approx_constant_update(up, 1);
  CHECK(twice.c[1] == doctest::Approx(4.0));
  // update never shrinks the envelope
  const GradientEnvelope base = gradient_envelope_K(cs, unit_inputs());
  const GradientEnvelope bumped = gradient_envelope_K(up, unit_inputs());
  CHECK(bumped.K >= base.K);
}

TEST_CASE("polynomial decay envelopes for the prototype") {
  const OperatorSpec spec = validate_polynomial_params(2, 3, 4, 1);
  const LyapunovParams par = default_params(spec, 10);
  const PolynomialEnvelope env = polynomial_envelopes(par, spec.poly, 10.0);
  CHECK(env.lambda == doctest::Approx(3.0));
  CHECK(env.exponent_p == doctest::Approx(-14.75));
  CHECK(env.exponent_grad == doctest::Approx(-22.3875));
  // separable form with the smoothed norm in the spatial factor
  for (double t : {0.05, 0.2, 0.4})
    for (double y : {0.0, 1.5, -4.0}) {
      const double rho = smoothed_norm::profile(y);
      const double spatial =
          std::exp(-par.eps * std::pow(t, par.alpha) * std::pow(rho, par.beta));
      CHECK(env.env_p(t, y) ==
            doctest::Approx(std::pow(t, env.exponent_p) * spatial)
                .epsilon(1e-12));
      CHECK(env.env_grad(t, y) ==
            doctest::Approx((1.0 - std::log(t)) *
                            std::pow(t, env.exponent_grad) * spatial)
                .epsilon(1e-12));
    }
}

TEST_CASE("envelope exponent condition is enforced") {
  const OperatorSpec spec = validate_polynomial_params(2, 3, 4, 1);
  LyapunovParams par = default_params(spec, 10);
  par.alpha = 0.3;  // alpha lambda / beta = 0.45 < 1/2
  CHECK_THROWS_AS(polynomial_envelopes(par, spec.poly, 10.0),
                  ConstraintViolation);
}

TEST_CASE("running-time window") {
  const Window w = choose_window(0.4);
  CHECK(w.a0 == doctest::Approx(0.2));
  CHECK(w.a == doctest::Approx(0.4));
  CHECK(w.a1 == doctest::Approx(0.45));
  CHECK(w.b1 == doctest::Approx(0.55));
  CHECK(w.b == doctest::Approx(0.6));
  CHECK(w.b0 == doctest::Approx(0.8));
  CHECK_THROWS_AS(choose_window(0.6), WindowError);
  CHECK_THROWS_AS(choose_window(0.0), WindowError);
}
