#include "kb/fk_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kb {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t ctr) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ path) + ctr);
  return ((h >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller from two counter draws
double normal(std::uint64_t seed, std::uint64_t path, std::uint64_t ctr) {
  const double u1 = uniform01(seed, path, 2 * ctr);
  const double u2 = uniform01(seed, path, 2 * ctr + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

bool heavy_tail_check(std::vector<double> contrib, double total) {
  if (total <= 0.0) return false;
  const std::size_t top = std::max<std::size_t>(1, contrib.size() / 100);
  std::nth_element(contrib.begin(), contrib.begin() + top, contrib.end(),
                   std::greater<double>());
  double head = 0.0;
  for (std::size_t i = 0; i < top; ++i) head += contrib[i];
  return head > 0.5 * total;
}

}  // namespace

std::vector<MCEstimate> estimate_paths(const OperatorSpec& spec, double x,
                                       const std::vector<PathObservable>& obs,
                                       const MCConfig& cfg) {
  if (obs.empty()) return {};
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return obs[a].t < obs[b].t; });

  const long long n = cfg.paths;
  std::vector<std::vector<double>> samples(obs.size(),
                                           std::vector<double>(n, 0.0));
  std::vector<double> final_weight(n, 0.0);

  for (long long i = 0; i < n; ++i) {
    const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
    const double sign = (cfg.antithetic && (i & 1)) ? -1.0 : 1.0;
    double y = x;
    double logw = 0.0;
    double t = 0.0;
    std::uint64_t step = 0;
    for (std::size_t oi : order) {
      const double t_target = obs[oi].t;
      while (t < t_target - 1e-14) {
        const double dt = std::min(cfg.dt, t_target - t);
        FieldValues fv = spec.eval(y);
        double drift = fv.dq + fv.f;
        int halvings = 0;
        while (std::abs(drift) * dt > 0.1 * std::pow(2.0, halvings) &&
               halvings < 8)
          ++halvings;
        const int nsub = 1 << halvings;
        const double hs = dt / nsub;
        for (int sub = 0; sub < nsub; ++sub) {
          if (sub > 0) fv = spec.eval(y);
          logw -= fv.v * hs;
          const double xi =
              sign * normal(cfg.seed, stream, step * 256 + sub);
          y += (fv.dq + fv.f) * hs + std::sqrt(2.0 * fv.q * hs) * xi;
          if (std::abs(y) > cfg.blowup_radius)
            throw BlowupError("path escaped the diagnostic radius");
        }
        ++step;
        t += dt;
      }
      samples[oi][i] = obs[oi].f(y) * std::exp(logw);
    }
    final_weight[i] = std::exp(logw);
  }

  std::vector<MCEstimate> out(obs.size());
  Kahan wsum;
  for (long long i = 0; i < n; ++i) wsum.add(final_weight[i]);
  const double killed = 1.0 - wsum.s / n;
  for (std::size_t oi = 0; oi < obs.size(); ++oi) {
    Kahan s1;
    for (long long i = 0; i < n; ++i) s1.add(samples[oi][i]);
    const double mean = s1.s / n;
    Kahan s2;
    for (long long i = 0; i < n; ++i) {
      const double d = samples[oi][i] - mean;
      s2.add(d * d);
    }
    MCEstimate& e = out[oi];
    e.mean = mean;
    e.se = n > 1 ? std::sqrt(s2.s / (n - 1)) / std::sqrt(double(n)) : 0.0;
    e.paths = n;
    e.killed_fraction = killed;
    e.heavy_tail = heavy_tail_check(samples[oi], s1.s);
  }
  return out;
}

MCEstimate estimate_semigroup(const OperatorSpec& spec, double x, double t,
                              const std::function<double(double)>& f,
                              const MCConfig& cfg) {
  return estimate_paths(spec, x, {{t, f}}, cfg)[0];
}

MCEstimate estimate_xi(const OperatorSpec& spec, const WeightFamily& wf,
                       double x, double t, int which, const MCConfig& cfg) {
  auto f = [&wf, t, which](double y) {
    return which == 1 ? wf.w1(t, y) : wf.w2(t, y);
  };
  return estimate_paths(spec, x, {{t, f}}, cfg)[0];
}

}  // namespace kb
