#ifndef KB_FK_ORACLE_HPP
#define KB_FK_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kb/operator_spec.hpp"
#include "kb/weights.hpp"

namespace kb {

struct BlowupError : std::runtime_error {
  explicit BlowupError(const std::string& m) : std::runtime_error(m) {}
};

struct MCConfig {
  long long paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  bool antithetic = true;
  double blowup_radius = 300.0;
};

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;  // sample std / sqrt(paths)
  long long paths = 0;
  double killed_fraction = 0.0;  // 1 - mean killing weight at the horizon
  bool heavy_tail = false;  // top 1% of contributions carry > 50%
};

struct PathObservable {
  double t;
  std::function<double(double y)> f;
};

// Euler-Maruyama paths of dY = (q'(Y) + F(Y)) dt + sqrt(2 q(Y)) dW from x,
// killing weight exp(-sum V dt) accumulated left-point, local step halving
// (up to 8 times) when |drift| dt > 0.1.  Counter-based normals keyed by
// (seed, path, step, substep): identical config gives identical output.
// One estimate per observable, all from the same path set.
std::vector<MCEstimate> estimate_paths(const OperatorSpec& spec, double x,
                                       const std::vector<PathObservable>& obs,
                                       const MCConfig& cfg);

MCEstimate estimate_semigroup(const OperatorSpec& spec, double x, double t,
                              const std::function<double(double)>& f,
                              const MCConfig& cfg);

// E[W_j(t, Y_t) * killing weight]; which selects the slower (1) or faster
// (2) growing weight.
MCEstimate estimate_xi(const OperatorSpec& spec, const WeightFamily& wf,
                       double x, double t, int which, const MCConfig& cfg);

}  // namespace kb

#endif
