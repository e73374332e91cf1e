#ifndef KB_CONSTANTS_HPP
#define KB_CONSTANTS_HPP

#include <array>
#include <cmath>
#include <limits>

#include "kb/lyapunov.hpp"

namespace kb {

// Nonnegative scalar stored as its natural log; survives k-th powers of
// large constants that overflow double.
struct LogVal {
  double lg = -std::numeric_limits<double>::infinity();

  static LogVal from(double v);
  static LogVal from_log(double l) { return LogVal{l}; }
  double value() const { return std::exp(lg); }
  double log10() const { return lg / std::log(10.0); }

  LogVal operator*(LogVal o) const { return LogVal{lg + o.lg}; }
  LogVal operator/(LogVal o) const { return LogVal{lg - o.lg}; }
  LogVal pow(double e) const {
    if (std::isinf(lg) && lg < 0.0) return e == 0.0 ? from(1.0) : *this;
    return LogVal{lg * e};
  }
  LogVal sqrt() const { return pow(0.5); }
  LogVal operator+(LogVal o) const;  // logsumexp
  bool operator<(LogVal o) const { return lg < o.lg; }
};

struct ConstantSet {
  std::array<double, 12> c_raw{};  // as supplied
  std::array<double, 12> c{};      // clamped to >= 1 before assembly
  double k = 0.0;
  double gap0 = 0.0;  // b0 - b
  double gap1 = 0.0;  // b - b1
  LogVal A1, A2, A2t, A3;
  LogVal B1, B2, B3, B4, B4t, B5, B6, B6t, B7, B8;
};

struct EnvelopeInputs {
  double sup_xi1 = 0.0;  // sup over (a0,b0) of the W1 moment
  double Xi1 = 0.0;      // time integral of the W1 moment
  double Xi2 = 0.0;      // time integral of the W2 moment
  double E2 = 0.0;       // double integral of p log^2 p
  double Eb = 0.0;       // endpoint difference of int p log p dy
  double fisher = 0.0;   // double integral of |grad p|^2 / p
  double C_cal = 1.0;    // calibration constant (1 until fitted)
};

struct GradientEnvelope {
  double K = 0.0;
  double log10_K = 0.0;
  bool negative_radicand = false;
};

struct PolynomialEnvelope {
  double lambda = 0.0;  // max(m, p, s/2)
  double exponent_p = 0.0;
  double exponent_grad = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  // shape factors without the universal constant
  double env_p(double t, double y) const;
  double env_grad(double t, double y) const;
};

// Literal evaluation of the A/B ladders in log-space.  Constants below 1
// are clamped up to 1 (raw values kept alongside); gaps must be positive.
ConstantSet assemble_constants(const std::array<double, 12>& c, double k,
                               double gap0, double gap1);

// Constant update for the cutoff-approximated diffusion: c2 -> 2c2,
// c3 -> 2c3, c7 -> sqrt(3)(c7 + 2(1+sqrt(d)) c12); ladders recomputed.
ConstantSet approx_constant_update(const ConstantSet& cs, int d);

// Constant envelope for w * p on (a,b):
// C_cal (A1 sup_xi1 + A2~ Xi1 + A3 Xi2); plain A2 variant selectable.
double kernel_envelope(const ConstantSet& cs, const EnvelopeInputs& inp,
                       bool tilde = true);

// The gradient envelope K: nine groups of products of ladder constants,
// moment integrals and entropy terms, assembled in log-space.
GradientEnvelope gradient_envelope_K(const ConstantSet& cs,
                                     const EnvelopeInputs& inp);

// Closed-form decay envelopes of the polynomial family at running time t.
PolynomialEnvelope polynomial_envelopes(const LyapunovParams& par,
                                        const PolyParams& poly, double k);

// (t/2, t, 9t/8, 11t/8, 3t/2, 2t); requires t in (0, 1/2].
Window choose_window(double t);

}  // namespace kb

#endif
