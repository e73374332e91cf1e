#include "kb/constants.hpp"

#include <algorithm>
#include <stdexcept>

namespace kb {

LogVal LogVal::from(double v) {
  if (v < 0.0) throw std::domain_error("LogVal::from negative value");
  return LogVal{std::log(v)};
}

LogVal LogVal::operator+(LogVal o) const {
  const double a = std::max(lg, o.lg), b = std::min(lg, o.lg);
  if (std::isinf(a) && a < 0.0) return *this;
  return LogVal{a + std::log1p(std::exp(b - a))};
}

namespace {

LogVal lv(double v) { return LogVal::from(v); }

}  // namespace

ConstantSet assemble_constants(const std::array<double, 12>& c_in, double k,
                               double gap0, double gap1) {
  if (!(gap0 > 0.0 && gap1 > 0.0))
    throw std::invalid_argument("window gaps must be positive");
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");

  ConstantSet cs;
  cs.c_raw = c_in;
  for (int i = 0; i < 12; ++i) cs.c[i] = std::max(c_in[i], 1.0);
  cs.k = k;
  cs.gap0 = gap0;
  cs.gap1 = gap1;

  const double kh = k / 2.0;
  const auto& c = cs.c;
  auto cp = [&](int i, double e) { return lv(c[i - 1]).pow(e); };
  const LogVal g0 = lv(gap0), g1 = lv(gap1);

  cs.A1 = cp(1, kh);
  cs.A2 = cp(2, k) + cp(1, kh) / g0.pow(kh) + cp(3, kh) + cp(4, kh);
  cs.A2t = cs.A2 + cp(2, kh) * cp(7, kh) + cp(2, kh) * cp(12, kh);
  cs.A3 = cp(5, k) + cp(6, k) + cp(2, kh) * cp(6, kh);

  cs.B1 = lv(c[1]);
  cs.B2 = lv(c[1]) / g1 + lv(c[1] * c[3]) + lv(c[10]);
  cs.B3 = lv(c[1] * c[4] * c[4]) + lv(c[2] * c[5]) + lv(c[1] * c[1] * c[5]) +
          lv(c[1] * c[7]) + lv(c[8]);
  cs.B4 = lv(c[2]) + lv(c[1] * c[1]) + lv(c[1]) / g1.sqrt() +
          lv(c[1] * c[2] * c[6]).sqrt() + cp(2, 1.5) * cp(7, 0.5) +
          lv(c[1] * c[9]).sqrt() + lv(c[1]) * lv(c[2]).sqrt() +
          lv(c[1]) * lv(c[3]).sqrt() + lv(c[1] * c[10]).sqrt();
  cs.B4t = cs.B4 + lv(c[1] * c[2] * c[11]).sqrt() + cp(2, 1.5) * cp(12, 0.5);
  cs.B5 = lv(c[5]) + lv(c[1] * c[5]) + lv(c[2] * c[5]).sqrt() +
          lv(c[1]) * lv(c[5]).sqrt() + lv(c[1] * c[2] * c[5]).sqrt() +
          cp(2, 1.5) * cp(6, 0.5) + lv(c[4]) + lv(c[1] * c[4]) + lv(c[7]);
  cs.B6 = cp(1, kh) + cp(1, kh) / g1.pow(kh) + cp(2, k) +
          cp(2, kh) * cp(7, kh) + cp(3, kh) + cp(7, k) + cp(4, kh);
  cs.B6t = cs.B6 + cp(2, kh) * cp(12, kh) + cp(12, k);
  cs.B7 = cp(6, k) + cp(2, kh) * cp(6, kh) + cp(5, k);
  cs.B8 = lv(c[5]) + lv(c[4] * c[4]);
  return cs;
}

ConstantSet approx_constant_update(const ConstantSet& cs, int d) {
  std::array<double, 12> c = cs.c;
  c[1] *= 2.0;
  c[2] *= 2.0;
  c[6] = std::sqrt(3.0) *
         (c[6] + 2.0 * (1.0 + std::sqrt(static_cast<double>(d))) * c[11]);
  return assemble_constants(c, cs.k, cs.gap0, cs.gap1);
}

double kernel_envelope(const ConstantSet& cs, const EnvelopeInputs& inp,
                       bool tilde) {
  const LogVal a2 = tilde ? cs.A2t : cs.A2;
  const LogVal total = cs.A1 * lv(inp.sup_xi1) + a2 * lv(inp.Xi1) +
                       cs.A3 * lv(inp.Xi2);
  return inp.C_cal * total.value();
}

GradientEnvelope gradient_envelope_K(const ConstantSet& cs,
                                     const EnvelopeInputs& inp) {
  const double k = cs.k;
  const LogVal sx = lv(inp.sup_xi1), X1 = lv(inp.Xi1), X2 = lv(inp.Xi2);
  const LogVal A1 = cs.A1, A2t = cs.A2t, A3 = cs.A3;

  LogVal sum = cs.B1 * A1.pow((k - 1.0) / k) * sx;

  sum = sum + (cs.B1 * A2t.sqrt() + cs.B2 * A2t.pow((k - 2.0) / k) +
               cs.B4t * A2t.pow((k - 1.0) / k)) *
                  X1;

  sum = sum + (cs.B1 * A3.sqrt() + (cs.B2 + cs.B3) * A3.pow((k - 2.0) / k) +
               cs.B3 * A2t.pow((k - 2.0) / k) +
               (cs.B4t + cs.B5) * A3.pow((k - 1.0) / k) +
               cs.B5 * A2t.pow((k - 1.0) / k) + cs.B6t * cs.B8 +
               cs.B7 * cs.B8) *
                  X2;

  sum = sum + cs.B1 * A1.sqrt() * X1.sqrt() * sx.sqrt();

  sum = sum + A1.pow((k - 2.0) / k) *
                  (cs.B2 * X1.pow(2.0 / k) + cs.B3 * X2.pow(2.0 / k)) *
                  sx.pow((k - 2.0) / k);

  sum = sum + cs.B1 *
                  (A2t.pow((k - 1.0) / k) * X1.pow((k - 1.0) / k) +
                   A3.pow((k - 1.0) / k) * X2.pow((k - 1.0) / k)) *
                  sx.pow(1.0 / k);

  sum = sum + A1.pow((k - 1.0) / k) *
                  (cs.B4t * X1.pow(1.0 / k) + cs.B5 * X2.pow(1.0 / k)) *
                  sx.pow((k - 1.0) / k);

  const LogVal bracket = cs.B6t * X1.sqrt() + cs.B7 * X2.sqrt();
  sum = sum + bracket * lv(inp.E2).sqrt();

  GradientEnvelope out;
  // the endpoint term is subtracted; a positive endpoint difference makes
  // the radicand negative, so the term is dropped and flagged
  if (inp.Eb > 0.0) {
    out.negative_radicand = true;
  } else {
    const double sub = (bracket * lv(-inp.Eb).sqrt()).value();
    const double main = sum.value();
    if (std::isfinite(main)) {
      out.K = inp.C_cal * std::max(main - sub, 0.0);
      out.log10_K = std::log10(std::max(out.K, 1e-300));
      return out;
    }
  }
  out.K = inp.C_cal * sum.value();
  out.log10_K = sum.log10() + std::log10(inp.C_cal);
  return out;
}

double PolynomialEnvelope::env_p(double t, double y) const {
  return std::pow(t, exponent_p) *
         std::exp(-eps * std::pow(t, alpha) *
                  std::pow(smoothed_norm::profile(y), beta));
}

double PolynomialEnvelope::env_grad(double t, double y) const {
  return (1.0 - std::log(t)) * std::pow(t, exponent_grad) *
         std::exp(-eps * std::pow(t, alpha) *
                  std::pow(smoothed_norm::profile(y), beta));
}

PolynomialEnvelope polynomial_envelopes(const LyapunovParams& par,
                                        const PolyParams& poly, double k) {
  PolynomialEnvelope env;
  env.lambda = std::max({poly.m, poly.p, poly.s / 2.0});
  env.alpha = par.alpha;
  env.beta = par.beta;
  env.eps = par.eps;
  env.exponent_p = 1.0 - par.alpha * env.lambda * k / par.beta;
  env.exponent_grad =
      1.5 - (3.0 * par.alpha * env.lambda * k + par.alpha) / (2.0 * par.beta);
  if (!(par.alpha * env.lambda / par.beta > 0.5))
    throw ConstraintViolation("alpha*lambda/beta > 1/2 required");
  return env;
}

Window choose_window(double t) {
  if (!(t > 0.0 && t <= 0.5))
    throw WindowError("running time must lie in (0, 1/2]");
  return Window{t / 2.0,        t,           9.0 * t / 8.0,
                11.0 * t / 8.0, 3.0 * t / 2.0, 2.0 * t};
}

}  // namespace kb
