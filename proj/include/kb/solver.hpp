#ifndef KB_SOLVER_HPP
#define KB_SOLVER_HPP

#include <stdexcept>
#include <vector>

#include "kb/lyapunov.hpp"
#include "kb/operator_spec.hpp"
#include "kb/weights.hpp"

namespace kb {

struct StabilityError : std::runtime_error {
  explicit StabilityError(const std::string& m) : std::runtime_error(m) {}
};
struct TruncationError : std::runtime_error {
  explicit TruncationError(const std::string& m) : std::runtime_error(m) {}
};

struct Grid {
  double R = 0.0;
  int N = 0;  // odd
  double h = 0.0;
  std::vector<double> y;

  static Grid make(double R, int N);
  int index_of(double x) const;  // nearest node
};

struct KernelField {
  Grid grid;
  double x = 0.0;
  double dt = 0.0;
  double theta = 0.5;
  double t_init = 0.0;
  bool theta_fallback = false;   // true if the half-implicit pass went negative
  double min_seen = 0.0;         // most negative node value before clamping
  double boundary_loss = 0.0;    // accumulated |flux| * dt at the two walls
  std::vector<double> times;
  std::vector<std::vector<double>> p;  // [time][node]

  double mass(int ti) const;
  int time_index(double t) const;  // nearest recorded time
};

// Truncation radius from the weight decay: eps * t_init^alpha * R^beta = 70,
// capped at 30.
double truncation_radius(const LyapunovParams& par, double t_init);

// Forward (adjoint) equation d/dt p = div(Q grad p - F p) - V p from a
// short-time Gaussian parametrix at t_init = min(1e-4, 10 dt).  Conservative
// finite volumes, upwinded drift flux, theta-scheme with Thomas elimination,
// zero Dirichlet walls.  Snapshots at the nearest step to each record time
// (t_init and T_end always kept).
KernelField solve_forward(const OperatorSpec& spec, double x, double t_end,
                          const Grid& grid, double dt,
                          const std::vector<double>& record_times = {},
                          double theta = 0.5);

// d/dy per snapshot: fourth-order central inside, one-sided second-order at
// the two nodes next to each wall.
std::vector<double> gradient_row(const Grid& grid, const std::vector<double>& p);
std::vector<std::vector<double>> gradient(const KernelField& kf);

struct FunctionalReport {
  std::vector<double> times;  // recorded times inside [a0, b0]
  std::vector<double> xi1, xi2;
  double Xi1 = 0.0, Xi2 = 0.0;  // time integrals over (a0, b0)
  double H1 = 0.0, H2 = 0.0;    // suprema of the xi's over the window
  double fisher = 0.0;          // int int |grad p|^2 / p over (a, b)
  double E2 = 0.0;              // int int p log^2 p over (a, b)
  double Eb = 0.0;              // int p log p at b minus the same at a
  double fv_moment = 0.0;       // int int (|F|^2 + V^2) p over (a, b)
  double sobolev_grad_r = 0.0;  // (int int |grad p|^r)^{1/r}
  double weight_integral_r = 0.0;  // int int w^{-r}
  double refine_diff = 0.0;     // worst relative change under coarsening
  bool quadrature_warning = false;
};

// Trapezoid quadratures against the recorded snapshots; log and ratio
// integrands are zeroed below p_floor = 1e-30 * max p.
FunctionalReport functionals(const OperatorSpec& spec, const KernelField& kf,
                             const WeightFamily& wf, const Window& win,
                             double r);

// One solve per n over the cutoff-approximated diffusion, same grid and
// stepping as the base call.
std::vector<KernelField> solve_approximated(const OperatorSpec& spec,
                                            const WeightFamily& wf,
                                            const std::vector<int>& ns,
                                            double x, double t_end,
                                            const Grid& grid, double dt,
                                            const std::vector<double>& record_times = {});

}  // namespace kb

#endif
