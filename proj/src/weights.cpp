#include "kb/weights.hpp"

namespace kb {

namespace {
// f = c * rho(|y|)^beta and its signed-variable derivatives, with rho the
// smoothed norm profile.
struct Exponent {
  double f, f1, f2, f3;
};

Exponent exponent_derivs(double c, double beta, double y) {
  const double r = std::abs(y);
  const double sgn = (y >= 0.0) ? 1.0 : -1.0;
  const double rho = smoothed_norm::profile(r);
  const double r1 = smoothed_norm::profile_d1(r);
  const double r2 = smoothed_norm::profile_d2(r);
  const double r3 = smoothed_norm::profile_d3(r);
  const double pb = std::pow(rho, beta);
  const double pb1 = std::pow(rho, beta - 1.0);
  const double pb2 = std::pow(rho, beta - 2.0);
  const double pb3 = std::pow(rho, beta - 3.0);
  Exponent e;
  e.f = c * pb;
  e.f1 = c * beta * pb1 * r1 * sgn;
  e.f2 = c * beta * ((beta - 1.0) * pb2 * r1 * r1 + pb1 * r2);
  e.f3 = c * beta *
         ((beta - 1.0) * (beta - 2.0) * pb3 * r1 * r1 * r1 +
          3.0 * (beta - 1.0) * pb2 * r1 * r2 + pb1 * r3) *
         sgn;
  return e;
}
}  // namespace

WeightEval WeightFamily::eval(double rate, double t, double y) const {
  const double ta = std::pow(t, par_.alpha);
  const Exponent e = exponent_derivs(rate * ta, par_.beta, y);
  WeightEval out;
  out.w = std::exp(e.f);
  out.wy = out.w * e.f1;
  out.wyy = out.w * (e.f1 * e.f1 + e.f2);
  out.wyyy = out.w * (e.f1 * e.f1 * e.f1 + 3.0 * e.f1 * e.f2 + e.f3);
  // d/dt multiplies the exponent by alpha/t
  const double ft = par_.alpha / t * e.f;
  out.wt = out.w * ft;
  out.wty = out.w * (par_.alpha / t) * e.f1 * (e.f + 1.0);
  return out;
}

WeightEval WeightFamily::static_eval(double rate, double expo, double y) const {
  const Exponent e = exponent_derivs(rate, expo, y);
  WeightEval out;
  out.w = std::exp(e.f);
  out.wy = out.w * e.f1;
  out.wyy = out.w * (e.f1 * e.f1 + e.f2);
  out.wyyy = out.w * (e.f1 * e.f1 * e.f1 + 3.0 * e.f1 * e.f2 + e.f3);
  out.wt = 0.0;
  out.wty = 0.0;
  return out;
}

}  // namespace kb
