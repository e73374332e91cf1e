#include "kb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kb {

Grid Grid::make(double R, int N) {
  if (!(R > 0.0)) throw std::invalid_argument("grid radius must be positive");
  if (N < 5 || N % 2 == 0)
    throw std::invalid_argument("node count must be odd and at least 5");
  Grid g;
  g.R = R;
  g.N = N;
  g.h = 2.0 * R / (N - 1);
  g.y.resize(N);
  for (int j = 0; j < N; ++j) g.y[j] = -R + j * g.h;
  return g;
}

int Grid::index_of(double x) const {
  int j = static_cast<int>(std::lround((x + R) / h));
  return std::clamp(j, 0, N - 1);
}

double KernelField::mass(int ti) const {
  const auto& row = p[ti];
  double acc = 0.0;
  for (int j = 0; j < grid.N; ++j)
    acc += (j == 0 || j == grid.N - 1) ? 0.5 * row[j] : row[j];
  return acc * grid.h;
}

int KernelField::time_index(double t) const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(times.size()); ++i)
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  return best;
}

double truncation_radius(const LyapunovParams& par, double t_init) {
  const double R = std::pow(
      70.0 / (par.eps * std::pow(t_init, par.alpha)), 1.0 / par.beta);
  return std::min(R, 30.0);
}

namespace {

// tridiagonal operator L: (Lp)_j = lo_j p_{j-1} + di_j p_j + up_j p_{j+1}
struct Tridiag {
  std::vector<double> lo, di, up;
};

Tridiag build_operator(const OperatorSpec& spec, const Grid& g,
                       std::vector<double>& vnode) {
  const int N = g.N;
  const double h = g.h;
  Tridiag L{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0),
            std::vector<double>(N, 0.0)};
  std::vector<double> qf(N - 1), ff(N - 1);
  for (int j = 0; j < N - 1; ++j) {
    const FieldValues fv = spec.eval(g.y[j] + 0.5 * h);
    qf[j] = fv.q;
    ff[j] = fv.f;
  }
  vnode.resize(N);
  for (int j = 0; j < N; ++j) vnode[j] = spec.eval(g.y[j]).v;
  for (int j = 1; j < N - 1; ++j) {
    const double fpL = std::max(ff[j - 1], 0.0), fmL = std::min(ff[j - 1], 0.0);
    const double fpR = std::max(ff[j], 0.0), fmR = std::min(ff[j], 0.0);
    L.lo[j] = qf[j - 1] / (h * h) + fpL / h;
    L.up[j] = qf[j] / (h * h) - fmR / h;
    L.di[j] = -(qf[j] + qf[j - 1]) / (h * h) - fpR / h + fmL / h - vnode[j];
  }
  return L;
}

// factorization of (I - theta dt L) with identity boundary rows
struct Factor {
  std::vector<double> cp;    // modified super-diagonal
  std::vector<double> diag;  // pivot reciprocals
};

Factor factorize(const Tridiag& L, double theta, double dt, int N) {
  Factor f{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  auto a = [&](int j) { return -theta * dt * L.lo[j]; };
  auto b = [&](int j) {
    return (j == 0 || j == N - 1) ? 1.0 : 1.0 - theta * dt * L.di[j];
  };
  auto c = [&](int j) { return -theta * dt * L.up[j]; };
  f.diag[0] = 1.0 / b(0);
  f.cp[0] = c(0) * f.diag[0];
  for (int j = 1; j < N; ++j) {
    const double piv = b(j) - a(j) * f.cp[j - 1];
    f.diag[j] = 1.0 / piv;
    f.cp[j] = c(j) * f.diag[j];
  }
  return f;
}

void thomas_solve(const Tridiag& L, const Factor& f, double theta, double dt,
                  std::vector<double>& rhs) {
  const int N = static_cast<int>(rhs.size());
  rhs[0] *= f.diag[0];
  for (int j = 1; j < N; ++j) {
    const double a = -theta * dt * L.lo[j];
    rhs[j] = (rhs[j] - a * rhs[j - 1]) * f.diag[j];
  }
  for (int j = N - 2; j >= 0; --j) rhs[j] -= f.cp[j] * rhs[j + 1];
}

struct StepOutcome {
  bool ok = true;
  double min_seen = 0.0;
};

KernelField run_scheme(const OperatorSpec& spec, double x, double t_end,
                       const Grid& g, double dt,
                       std::vector<double> record, double theta,
                       bool* went_negative) {
  const int N = g.N;
  KernelField kf;
  kf.grid = g;
  kf.x = x;
  kf.dt = dt;
  kf.theta = theta;
  kf.t_init = std::min(1e-4, 10.0 * dt);

  std::vector<double> vnode;
  const Tridiag L = build_operator(spec, g, vnode);
  const bool v_zero =
      *std::max_element(vnode.begin(), vnode.end()) == 0.0;

  // frozen-coefficient parametrix at t_init
  const FieldValues fx = spec.eval(x);
  std::vector<double> p(N, 0.0);
  {
    const double var = 4.0 * fx.q * kf.t_init;
    const double amp =
        std::exp(-fx.v * kf.t_init) / std::sqrt(M_PI * var);
    for (int j = 1; j < N - 1; ++j) {
      const double dy = g.y[j] - x;
      p[j] = amp * std::exp(-dy * dy / var);
    }
  }

  std::sort(record.begin(), record.end());
  record.erase(std::unique(record.begin(), record.end()), record.end());
  record.erase(std::remove_if(record.begin(), record.end(),
                              [&](double t) {
                                return t <= kf.t_init || t >= t_end;
                              }),
               record.end());

  auto snapshot = [&](double t) {
    kf.times.push_back(t);
    kf.p.push_back(p);
  };
  snapshot(kf.t_init);

  Factor fac = factorize(L, theta, dt, N);
  double fac_dt = dt;

  std::vector<double> rhs(N);
  double t = kf.t_init;
  std::size_t next_rec = 0;
  double maxp_global = *std::max_element(p.begin(), p.end());
  *went_negative = false;

  while (t < t_end - 1e-14) {
    double step = std::min(dt, t_end - t);
    if (next_rec < record.size() && record[next_rec] - t < step + 1e-14)
      step = std::min(step, record[next_rec] - t);
    if (step < 1e-15) {
      snapshot(t);
      ++next_rec;
      continue;
    }
    if (std::abs(step - fac_dt) > 1e-15 * dt) {
      fac = factorize(L, theta, step, N);
      fac_dt = step;
    }
    rhs[0] = 0.0;
    rhs[N - 1] = 0.0;
    const double ex = (1.0 - theta) * step;
    for (int j = 1; j < N - 1; ++j)
      rhs[j] = p[j] + ex * (L.lo[j] * p[j - 1] + L.di[j] * p[j] +
                            L.up[j] * p[j + 1]);
    thomas_solve(L, fac, theta, step, rhs);
    p.swap(rhs);
    t += step;

    // wall fluxes with zero Dirichlet values
    {
      const double fl = spec.eval(g.y[0] + 0.5 * g.h).f;
      const double fr = spec.eval(g.y[N - 2] + 0.5 * g.h).f;
      const double jl = spec.eval(g.y[0] + 0.5 * g.h).q * p[1] / g.h -
                        std::min(fl, 0.0) * p[1];
      const double jr = -spec.eval(g.y[N - 2] + 0.5 * g.h).q * p[N - 2] / g.h -
                        std::max(fr, 0.0) * p[N - 2];
      kf.boundary_loss += (std::abs(jl) + std::abs(jr)) * step;
    }

    double minp = 0.0, maxp = 0.0;
    for (double v : p) {
      minp = std::min(minp, v);
      maxp = std::max(maxp, v);
    }
    maxp_global = std::max(maxp_global, maxp);
    kf.min_seen = std::min(kf.min_seen, minp);
    if (minp < -1e-12) {
      *went_negative = true;
      return kf;
    }
    for (double& v : p)
      if (v < 0.0) v = 0.0;
    if (!std::isfinite(maxp)) throw NonFinite("solver state");

    if (next_rec < record.size() && t >= record[next_rec] - 1e-14) {
      snapshot(t);
      ++next_rec;
    }
  }
  if (kf.times.back() < t_end - 1e-14 || kf.times.size() == 1) snapshot(t);

  if (v_zero && kf.boundary_loss > 1e-8)
    throw TruncationError("boundary flux mass loss above 1e-8");
  return kf;
}

}  // namespace

KernelField solve_forward(const OperatorSpec& spec, double x, double t_end,
                          const Grid& grid, double dt,
                          const std::vector<double>& record_times,
                          double theta) {
  if (!(dt > 0.0 && dt <= grid.h))
    throw std::invalid_argument("dt must satisfy 0 < dt <= h");
  bool neg = false;
  KernelField kf =
      run_scheme(spec, x, t_end, grid, dt, record_times, theta, &neg);
  if (neg) {
    if (theta >= 1.0) throw StabilityError("negative node values at theta=1");
    kf = run_scheme(spec, x, t_end, grid, dt, record_times, 1.0, &neg);
    if (neg) throw StabilityError("negative node values at theta=1");
    kf.theta_fallback = true;
  }
  return kf;
}

std::vector<double> gradient_row(const Grid& g, const std::vector<double>& p) {
  const int N = g.N;
  if (N < 5) throw std::invalid_argument("gradient needs N >= 5");
  const double h = g.h;
  std::vector<double> d(N);
  d[0] = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h);
  d[1] = (-3.0 * p[1] + 4.0 * p[2] - p[3]) / (2.0 * h);
  for (int j = 2; j < N - 2; ++j)
    d[j] = (p[j - 2] - 8.0 * p[j - 1] + 8.0 * p[j + 1] - p[j + 2]) /
           (12.0 * h);
  d[N - 2] = (3.0 * p[N - 2] - 4.0 * p[N - 3] + p[N - 4]) / (2.0 * h);
  d[N - 1] = (3.0 * p[N - 1] - 4.0 * p[N - 2] + p[N - 3]) / (2.0 * h);
  return d;
}

std::vector<std::vector<double>> gradient(const KernelField& kf) {
  std::vector<std::vector<double>> out;
  out.reserve(kf.p.size());
  for (const auto& row : kf.p) out.push_back(gradient_row(kf.grid, row));
  return out;
}

namespace {

double trapz(const std::vector<double>& f, double h, int stride = 1) {
  const int n = static_cast<int>(f.size());
  double acc = 0.0;
  int last = 0;
  for (int j = stride; j < n; j += stride) {
    acc += 0.5 * (f[j] + f[j - stride]) * (h * stride);
    last = j;
  }
  (void)last;
  return acc;
}

double trapz_t(const std::vector<double>& t, const std::vector<double>& f,
               int stride = 1) {
  double acc = 0.0;
  for (std::size_t i = stride; i < t.size(); i += stride)
    acc += 0.5 * (f[i] + f[i - stride]) * (t[i] - t[i - stride]);
  return acc;
}

}  // namespace

FunctionalReport functionals(const OperatorSpec& spec, const KernelField& kf,
                             const WeightFamily& wf, const Window& win,
                             double r) {
  FunctionalReport rep;
  const Grid& g = kf.grid;
  const int N = g.N;

  std::vector<int> idx_window;  // snapshots in [a0, b0]
  for (std::size_t i = 0; i < kf.times.size(); ++i)
    if (kf.times[i] >= win.a0 - 1e-12 && kf.times[i] <= win.b0 + 1e-12)
      idx_window.push_back(static_cast<int>(i));
  if (idx_window.size() < 3)
    throw std::invalid_argument("window not covered by recorded snapshots");

  double pmax = 0.0;
  for (int i : idx_window)
    pmax = std::max(pmax, *std::max_element(kf.p[i].begin(), kf.p[i].end()));
  const double p_floor = 1e-30 * pmax;

  // cached per-node fields
  std::vector<double> fnode(N), vnode(N);
  for (int j = 0; j < N; ++j) {
    const FieldValues fv = spec.eval(g.y[j]);
    fnode[j] = fv.f;
    vnode[j] = fv.v;
  }

  auto xi_at = [&](int i, int which, int ystride) {
    const double t = kf.times[i];
    std::vector<double> f;
    f.reserve(N / ystride + 1);
    for (int j = 0; j < N; j += ystride) {
      const double w = which == 1 ? wf.w1(t, g.y[j]) : wf.w2(t, g.y[j]);
      f.push_back(kf.p[i][j] * w);
    }
    return trapz(f, g.h * ystride);
  };

  for (int i : idx_window) {
    rep.times.push_back(kf.times[i]);
    rep.xi1.push_back(xi_at(i, 1, 1));
    rep.xi2.push_back(xi_at(i, 2, 1));
  }
  rep.Xi1 = trapz_t(rep.times, rep.xi1);
  rep.Xi2 = trapz_t(rep.times, rep.xi2);
  rep.H1 = *std::max_element(rep.xi1.begin(), rep.xi1.end());
  rep.H2 = *std::max_element(rep.xi2.begin(), rep.xi2.end());

  // inner-window quadratures over (a, b)
  std::vector<int> idx_inner;
  for (std::size_t i = 0; i < kf.times.size(); ++i)
    if (kf.times[i] >= win.a - 1e-12 && kf.times[i] <= win.b + 1e-12)
      idx_inner.push_back(static_cast<int>(i));
  if (idx_inner.size() < 3)
    throw std::invalid_argument("inner window not covered by snapshots");

  auto space_integrals = [&](int i, int ystride) {
    const auto& p = kf.p[i];
    const std::vector<double> gr = gradient_row(g, p);
    double fisher = 0.0, e2 = 0.0, fvm = 0.0, sob = 0.0, wint = 0.0;
    const double t = kf.times[i];
    auto add = [&](double& acc, int j, double v) {
      acc += (j == 0 || j >= N - ystride) ? 0.5 * v : v;
    };
    for (int j = 0; j < N; j += ystride) {
      if (p[j] >= p_floor) {
        add(fisher, j, gr[j] * gr[j] / p[j]);
        const double l = std::log(p[j]);
        add(e2, j, p[j] * l * l);
      }
      add(fvm, j, (fnode[j] * fnode[j] + vnode[j] * vnode[j]) * p[j]);
      add(sob, j, std::pow(std::abs(gr[j]), r));
      add(wint, j, std::pow(wf.w(t, g.y[j]), -r));
    }
    const double hh = g.h * ystride;
    return std::array<double, 5>{fisher * hh, e2 * hh, fvm * hh, sob * hh,
                                 wint * hh};
  };

  auto inner_quads = [&](int tstride, int ystride) {
    std::vector<double> ts, fi, e2, fvm, sob, wint;
    for (std::size_t ii = 0; ii < idx_inner.size(); ii += tstride) {
      const int i = idx_inner[ii];
      const auto s = space_integrals(i, ystride);
      ts.push_back(kf.times[i]);
      fi.push_back(s[0]);
      e2.push_back(s[1]);
      fvm.push_back(s[2]);
      sob.push_back(s[3]);
      wint.push_back(s[4]);
    }
    return std::array<double, 5>{trapz_t(ts, fi), trapz_t(ts, e2),
                                 trapz_t(ts, fvm), trapz_t(ts, sob),
                                 trapz_t(ts, wint)};
  };

  const auto fine = inner_quads(1, 1);
  rep.fisher = fine[0];
  rep.E2 = fine[1];
  rep.fv_moment = fine[2];
  rep.sobolev_grad_r = std::pow(fine[3], 1.0 / r);
  rep.weight_integral_r = fine[4];

  // endpoint entropy difference
  auto plogp = [&](double t) {
    const int i = kf.time_index(t);
    double acc = 0.0;
    const auto& p = kf.p[i];
    for (int j = 0; j < N; ++j)
      if (p[j] >= p_floor) {
        const double v = p[j] * std::log(p[j]);
        acc += (j == 0 || j == N - 1) ? 0.5 * v : v;
      }
    return acc * g.h;
  };
  rep.Eb = plogp(win.b) - plogp(win.a);

  // coarsened re-evaluation for the quadrature diagnostic
  const auto coarse = inner_quads(2, 2);
  double worst = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double denom = std::max(std::abs(fine[q]), 1e-300);
    worst = std::max(worst, std::abs(fine[q] - coarse[q]) / denom);
  }
  rep.refine_diff = worst;
  rep.quadrature_warning = worst > 0.01;
  return rep;
}

std::vector<KernelField> solve_approximated(const OperatorSpec& spec,
                                            const WeightFamily& wf,
                                            const std::vector<int>& ns,
                                            double x, double t_end,
                                            const Grid& grid, double dt,
                                            const std::vector<double>& record_times) {
  const double t0 = wf.params().t0;
  auto w1 = [&wf, t0](double y) { return wf.w1(t0, y); };
  auto w1dy = [&wf, t0](double y) { return wf.w1_eval(t0, y).wy; };
  std::vector<KernelField> out;
  out.reserve(ns.size());
  for (int n : ns) {
    const ApproximatedSpec ap = approximate_spec(spec, n, t0, w1, w1dy);
    out.push_back(solve_forward(ap.spec, x, t_end, grid, dt, record_times));
  }
  return out;
}

}  // namespace kb
