#ifndef KB_WEIGHTS_HPP
#define KB_WEIGHTS_HPP

#include <cmath>
#include <optional>

#include "kb/operator_spec.hpp"
#include "kb/smoothed_norm.hpp"

namespace kb {

struct LyapunovParams {
  double alpha = 0.0;  // time exponent of the weight
  double beta = 0.0;   // space exponent, (s - m + 2)/2 for the polynomial case
  double eps = 0.0;    // weight rate of w
  double eps1 = 0.0;   // rate of W1
  double eps2 = 0.0;   // rate of W2 and of Z
  double k = 0.0;      // moment index, > 2(d+2)
  double T = 1.0;      // horizon
  double t0 = 0.5;     // approximation anchor time, in (0,T)
  double eps_int = 0.5;  // integrability margin in (0,1)
  double sigma = -1.0;   // Hyp on W2 <= c0 Z^{1-sigma}; < 0 means auto
  double c0 = 1.0;
};

struct ParamOverrides {
  std::optional<double> alpha, eps, eps1, eps2, t0, eps_int, sigma, c0;
};

// Radial weight evaluator: w(t,y) = exp(rate * t^alpha * |y|_*^beta) with
// analytic space derivatives up to third order and the mixed dt-dy
// derivative.  All derivatives are taken in the signed 1-d variable y.
struct WeightEval {
  double w;     // value
  double wy;    // d/dy
  double wyy;   // d2/dy2
  double wyyy;  // d3/dy3
  double wt;    // d/dt
  double wty;   // d2/(dt dy)
};

class WeightFamily {
 public:
  WeightFamily(LyapunovParams par, PolyParams poly) : par_(par), poly_(poly) {}

  const LyapunovParams& params() const { return par_; }

  WeightEval eval(double rate, double t, double y) const;

  double w(double t, double y) const { return value(par_.eps, t, y); }
  double w1(double t, double y) const { return value(par_.eps1, t, y); }
  double w2(double t, double y) const { return value(par_.eps2, t, y); }

  WeightEval w_eval(double t, double y) const { return eval(par_.eps, t, y); }
  WeightEval w1_eval(double t, double y) const { return eval(par_.eps1, t, y); }
  WeightEval w2_eval(double t, double y) const { return eval(par_.eps2, t, y); }

  // Lyapunov functions of Hypothesis data: Z = exp(eps2 |y|_*^beta),
  // Z0 = exp(eps2 |y|_*^{p+1-m}).
  double z(double y) const {
    return std::exp(par_.eps2 * std::pow(smoothed_norm::profile(y), par_.beta));
  }
  double z0(double y) const {
    const double e = poly_.p + 1.0 - poly_.m;
    return std::exp(par_.eps2 * std::pow(smoothed_norm::profile(y), e));
  }
  // value, first and second derivative of a static exponential-of-power
  // Lyapunov function exp(rate * |y|_*^expo)
  WeightEval static_eval(double rate, double expo, double y) const;

 private:
  double value(double rate, double t, double y) const {
    return std::exp(rate * std::pow(t, par_.alpha) *
                    std::pow(smoothed_norm::profile(y), par_.beta));
  }

  LyapunovParams par_;
  PolyParams poly_;
};

}  // namespace kb

#endif
