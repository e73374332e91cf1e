#ifndef KB_OPERATOR_SPEC_HPP
#define KB_OPERATOR_SPEC_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace kb {

struct ConstraintViolation : std::runtime_error {
  explicit ConstraintViolation(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Pointwise coefficient data of the operator div(Q grad) + F.grad - V in
// one spatial variable, together with first derivatives.
struct FieldValues {
  double q = 0.0;   // diffusion coefficient Q(y)
  double dq = 0.0;  // dQ/dy
  double f = 0.0;   // drift F(y)
  double df = 0.0;  // dF/dy
  double v = 0.0;   // potential V(y) >= 0
  double dv = 0.0;  // dV/dy
};

struct PolyParams {
  double m = 0.0;  // diffusion growth: Q = (1 + |y|_*^m) I
  double p = 0.0;  // drift growth:     F = -|y|^{p-1} y
  double s = 0.0;  // potential growth: V = |y|^s
};

struct OperatorSpec {
  enum class Family { polynomial, custom };

  int dim = 1;
  double eta = 1.0;  // uniform ellipticity lower bound on Q
  Family family = Family::custom;
  PolyParams poly;

  // Coefficient evaluators at a 1-d point y.  For the polynomial family
  // these are wired by validate_polynomial_params(); custom specs supply
  // their own (including derivative fields).
  std::function<FieldValues(double)> fields;

  FieldValues eval(double y) const { return fields(y); }
};

// Checks m > 0, p > (m-1) v 1, s > |m-2| and returns the fully wired
// polynomial spec with eta = 1.  Throws ConstraintViolation naming the
// failed inequality otherwise.
OperatorSpec validate_polynomial_params(double m, double p, double s, int d);

// Convenience constructors for the constant-coefficient smoke specs.
OperatorSpec make_custom_spec(int d, double eta,
                              std::function<FieldValues(double)> fields);

// Smooth cutoff profile: phi == 1 on (-1,1), phi == 0 outside (-2,2),
// monotone in between with |s phi'(s)| <= 2.  Built as a smoothstep with a
// plateaued derivative in log2(s); the slope cap is verified at
// construction.
class CutoffProfile {
 public:
  CutoffProfile();
  double operator()(double s) const;
  double deriv(double s) const;

 private:
  static double ramp(double u);        // C^2 monotone 0 -> 1 on [0,1]
  static double ramp_deriv(double u);
};

struct ApproximatedSpec {
  OperatorSpec base;
  int n = 1;
  double t0 = 0.5;

  // W1(t0, .) used inside the cutoff argument phi(W1(t0,y)/n).
  std::function<double(double)> lyap_w1;       // y -> W1(t0, y)
  std::function<double(double)> lyap_w1_dy;    // y -> d/dy W1(t0, y)

  // The approximated operator A_n as a plain spec: Q_n = phi_n Q +
  // (1 - phi_n) eta, F and V unchanged.
  OperatorSpec spec;
};

// Builds A_n.  Requires n >= 1 and evaluable W1(t0, .).
ApproximatedSpec approximate_spec(const OperatorSpec& spec, int n, double t0,
                                  std::function<double(double)> lyap_w1,
                                  std::function<double(double)> lyap_w1_dy);

}  // namespace kb

#endif
