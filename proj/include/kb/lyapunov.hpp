#ifndef KB_LYAPUNOV_HPP
#define KB_LYAPUNOV_HPP

#include <array>
#include <string>
#include <vector>

#include "kb/operator_spec.hpp"
#include "kb/weights.hpp"

namespace kb {

struct NonFinite : std::runtime_error {
  explicit NonFinite(const std::string& msg) : std::runtime_error(msg) {}
};

struct WindowError : std::runtime_error {
  explicit WindowError(const std::string& msg) : std::runtime_error(msg) {}
};

// Time window 0 < a0 < a < a1 < b1 < b < b0 < T.
struct Window {
  double a0, a, a1, b1, b, b0;
};

// Default weight parameters for the polynomial family: beta from the
// closed form, alpha 5% above its lower bound, rates at fixed fractions of
// the admissible range.  Overrides are applied before the invariants are
// re-checked; violations throw ConstraintViolation.
LyapunovParams default_params(const OperatorSpec& spec, double k,
                              const ParamOverrides& ov = {});

// (gamma/beta)^{gamma/beta} e^{-gamma/beta} tau^{-gamma/beta}; dominates
// z^gamma e^{-tau z^beta} over z > 0.  Domain error on nonpositive inputs.
double peak_bound(double gamma, double beta, double tau);

// One certified condition: measured grid supremum vs closed-form constant.
struct ConditionRecord {
  std::string id;
  double measured = 0.0;         // supremum of the defining ratio
  double measured_coarse = 0.0;  // same on the half-resolution grid
  double closed_form = 0.0;
  bool pass = false;
  bool has_closed_form = true;
};

struct LyapunovCheck {
  std::vector<double> times;
  std::vector<double> hbar;      // positive-part supremum of (LW)/W
  double hbar_integral = 0.0;    // over (0, b0)
  double refinement_ratio = 1.0; // Riemann-sum stability diagnostic
  bool pass_eq21 = false;
  bool pass_eq22 = false;
};

struct HypothesisReport {
  std::vector<ConditionRecord> conditions;  // (i)..(xi), c12, sigma
  LyapunovCheck lyap_w1;
  LyapunovCheck lyap_w2;
  double z0_sup_AZ0 = 0.0;       // measured M of Hyp 1.1(c)
  double z_sup_AZ = 0.0;         // measured M of Hyp 1.1(b)
  double integrability_space = 0.0;  // int w^{-(1-eps_int)} dy at b0
  double integrability_spacetime = 0.0;
  bool integrability_finite = false;
  double boundedness_max = 0.0;  // Hyp 2.3(b) ratios, |y| >= 1 only
  double origin_max = 0.0;       // plain max of all ratios on |y| < 1
  bool all_pass = false;
  std::string notes;             // recorded ambiguities (k-threshold etc.)
};

// Closed-form constants c1..c12 of the polynomial case, assembled from
// peak_bound chains; pure power laws in a0.
std::array<double, 12> closed_form_constants(const LyapunovParams& par,
                                             const PolyParams& poly, double a0,
                                             int d);

// Measured suprema of the defining ratios over [a0,b0] x {|y| >= 1} on a
// geometric radial grid, compared against the closed forms.
HypothesisReport check_hypotheses(const OperatorSpec& spec,
                                  const LyapunovParams& par, double a0,
                                  double b0, double radius,
                                  int n_radial = 512, int n_time = 32);

// Measures hbar(t) = sup_y max(0, (dW/dt + AW)/W) on [0,R] and checks the
// two drift inequalities plus integrability of hbar near 0.
LyapunovCheck check_lyapunov(const OperatorSpec& spec, const WeightFamily& wf,
                             double rate, double radius, double t_max,
                             int n_radial = 1024, int n_time = 160);

// Integral of hbar over (0, t_end) on a geometric time grid.
double hbar_integral(const OperatorSpec& spec, const WeightFamily& wf,
                     double rate, double radius, double t_end,
                     int n_radial = 1024, int n_time = 160);

// sup over the grid of A0 Z0 (operator without potential applied to Z0)
// and of A Z; finite values certify Hyp 1.1(b)-(c) numerically.
double measure_az(const OperatorSpec& spec, const WeightFamily& wf,
                  double radius, bool drop_potential, int n_radial = 2048);

}  // namespace kb

#endif
