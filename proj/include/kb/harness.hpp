#ifndef KB_HARNESS_HPP
#define KB_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kb/constants.hpp"
#include "kb/fk_oracle.hpp"
#include "kb/solver.hpp"

namespace kb::harness {

// exit-code contract
inline constexpr int kOk = 0;
inline constexpr int kHypothesisFail = 2;
inline constexpr int kNonFinite = 3;
inline constexpr int kMissingArtifacts = 4;
inline constexpr int kValidationFail = 5;
inline constexpr int kCrosscheckFail = 6;
inline constexpr int kApproximationFail = 7;

struct RunConfig {
  // operator
  double m = 2.0, p = 3.0, s = 4.0;
  int d = 1;
  // lyapunov
  double k = 10.0;
  ParamOverrides overrides;
  // solver
  double R = 0.0;  // 0 = from the weight truncation rule
  int N = 0;       // 0 = spacing 0.004
  double dt = 1e-4;
  double theta = 0.5;
  // mc
  long long paths = 100000;
  double mc_dt = 1e-3;
  std::uint64_t seed = 1;
  bool antithetic = true;
  // validation
  std::vector<double> t_sweep = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> xi_times = {0.1, 0.2, 0.3};
  std::vector<int> n_sweep = {4, 16, 64, 256};
  double r = 2.0;
  // output
  std::string out_dir = "out";

  std::string raw_text;  // canonical text for hashing
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
std::string config_hash(const RunConfig& cfg);  // FNV-1a 64 hex

// shortest round-trip decimal representation, '.' separator
std::string fmt(double v);

// CSV with a header row and trailing "# config-hash=<hex>" line
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header,
            const std::string& hash);
  ~CsvWriter();
  void row(const std::vector<std::string>& cells);

 private:
  void* out_;
  std::string hash_;
};

struct Setup {
  OperatorSpec spec;
  LyapunovParams par;
  WeightFamily wf;
};
Setup make_setup(const RunConfig& cfg);

Grid make_grid(const RunConfig& cfg, const LyapunovParams& par);
std::vector<double> record_times(const RunConfig& cfg);
double solve_horizon(const RunConfig& cfg);

// solve artifact shared between commands
void save_field(const KernelField& kf, const std::string& path,
                const std::string& hash);
bool load_field(KernelField& kf, const std::string& path);

int cmd_check(const RunConfig& cfg);
int cmd_constants(const RunConfig& cfg, double t, bool dry_run,
                  const std::string& mode);
int cmd_solve(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);
int cmd_crosscheck(const RunConfig& cfg);
int cmd_approx(const RunConfig& cfg);

}  // namespace kb::harness

#endif
