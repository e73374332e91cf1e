#include "kb/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kb {

LyapunovParams default_params(const OperatorSpec& spec, double k,
                              const ParamOverrides& ov) {
  if (spec.family != OperatorSpec::Family::polynomial)
    throw ConstraintViolation("default_params requires the polynomial family");
  const double m = spec.poly.m, s = spec.poly.s;
  LyapunovParams par;
  par.beta = (s - m + 2.0) / 2.0;
  par.k = k;
  par.alpha = ov.alpha ? *ov.alpha : 1.05 * par.beta / (par.beta + m - 2.0);
  par.eps2 = ov.eps2 ? *ov.eps2 : 0.8 / par.beta;
  par.eps1 = ov.eps1 ? *ov.eps1 : 0.6 / par.beta;
  par.eps = ov.eps ? *ov.eps : par.eps1 / (4.0 * k);
  if (ov.t0) par.t0 = *ov.t0;
  if (ov.eps_int) par.eps_int = *ov.eps_int;
  if (ov.sigma) par.sigma = *ov.sigma;
  if (ov.c0) par.c0 = *ov.c0;

  if (!(par.beta > 0.0)) throw ConstraintViolation("beta > 0");
  if (!(k > 2.0 * (spec.dim + 2)))
    throw ConstraintViolation("k > 2(d+2)");
  if (!(par.eps > 0.0 && 2.0 * k * par.eps < par.eps1 &&
        par.eps1 < par.eps2 && par.eps2 < 1.0 / par.beta))
    throw ConstraintViolation("0 < 2k·eps < eps1 < eps2 < 1/beta");
  if (!(par.alpha > par.beta / (par.beta + m - 2.0)))
    throw ConstraintViolation("alpha > beta/(beta+m−2)");
  if (!(par.t0 > 0.0 && par.t0 < par.T))
    throw ConstraintViolation("t0 in (0,T)");
  if (!(par.eps_int > 0.0 && par.eps_int < 1.0))
    throw ConstraintViolation("eps_int in (0,1)");
  return par;
}

double peak_bound(double gamma, double beta, double tau) {
  if (!(gamma > 0.0 && beta > 0.0 && tau > 0.0))
    throw std::domain_error("peak_bound requires positive arguments");
  const double r = gamma / beta;
  return std::pow(r, r) * std::exp(-r) * std::pow(tau, -r);
}

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

// peak_bound with the z^gamma factor dropped when gamma <= 0 (then
// z^gamma <= 1 on z >= 1 and the exponential is <= 1).
double pbo(double gamma, double beta, double tau) {
  return gamma > 0.0 ? peak_bound(gamma, beta, tau) : 1.0;
}

}  // namespace

std::array<double, 12> closed_form_constants(const LyapunovParams& par,
                                             const PolyParams& poly, double a0,
                                             int d) {
  const double m = poly.m, p = poly.p, s = poly.s;
  const double al = par.alpha, be = par.beta;
  const double e = par.eps, e1 = par.eps1, e2 = par.eps2, k = par.k;
  const double sd = std::sqrt(static_cast<double>(d));

  std::array<double, 12> c{};
  c[0] = 1.0;  // c1: 2 eps <= eps1 makes the ratio at most one

  // c2: |Q grad w| <= 2 eps beta t^a r^{beta+m-1} exp(-tau t^a r^beta)
  {
    const double tau = (e1 - 2.0 * k * e) / (2.0 * k);
    c[1] = 2.0 * e * be * pbo(be + m - 1.0, be, tau) *
           std::pow(a0, -al * pos(m - 1.0) / be);
  }
  // c3: |Q D^2 w|, two radial terms
  {
    const double tau = (e1 - k * e) / k;
    const double cb = 2.0 * std::sqrt(3.0) * e * be *
                      ((pos(be - 2.0) + sd) * pbo(be + m - 2.0, be, tau) +
                       e * be * pbo(2.0 * be + m - 2.0, be, tau));
    c[2] = cb * std::pow(a0, -al * pos(m - 2.0) / be);
  }
  // c4: |dw/dt| against w^{(k-2)/k} W1^{1/(2k)}
  {
    const double tau = (e1 - 4.0 * e) / (2.0 * k);
    c[3] = e * al * pbo(be, be, tau) / a0;
  }
  // c5: V^{1/2} w^{1/k} W2^{-1/(2k)}
  {
    const double tau = (e2 - 2.0 * e) / (2.0 * k);
    c[4] = pbo(s / 2.0, be, tau) * std::pow(a0, -al * s / (2.0 * be));
  }
  // c6: |F| w^{1/k} W2^{-1/(2k)}
  {
    const double tau = (e2 - 2.0 * e) / (2.0 * k);
    c[5] = pbo(p, be, tau) * std::pow(a0, -al * p / be);
  }
  // c7: |grad Q| w^{1/k} W1^{-1/(2k)}
  {
    const double tau = (e1 - 2.0 * e) / (2.0 * k);
    c[6] = sd * m * pbo(m - 1.0, be, tau) *
           std::pow(a0, -al * pos(m - 1.0) / be);
  }
  // c8: |grad F| w^{1/k} W2^{-1/k}
  {
    const double tau = (e2 - e) / k;
    c[7] = (p - 1.0 + sd) * pbo(p - 1.0, be, tau) *
           std::pow(a0, -al * (p - 1.0) / be);
  }
  // c9: |grad V| w^{2/k} W2^{-2/k}
  {
    const double tau = 2.0 * (e2 - e) / k;
    c[8] = s * pbo(s - 1.0, be, tau) * std::pow(a0, -al * pos(s - 1.0) / be);
  }
  // c10: |D^3 w| W1^{-3/(2k)}; three radial terms, all t-powers positive
  {
    const double tau = 3.0 * e1 / (2.0 * k) - e;
    const double eb = e * be;
    c[9] = eb * eb * eb * pbo(3.0 * be - 3.0, be, tau) +
           3.0 * eb * eb * (1.0 + be + sd) * pbo(2.0 * be - 3.0, be, tau) +
           eb * (1.0 + be) * (2.0 + be) * (1.0 + d) *
               pbo(be - 3.0, be, tau);
  }
  // c11: |dt grad w| W1^{-1/k}
  {
    const double tau = (e1 - k * e) / k;
    c[10] = e * al * be *
            (pbo(be - 1.0, be, tau) + e * pbo(2.0 * be - 1.0, be, tau)) / a0;
  }
  // c12: |Q| |grad W1(t0,.)| against W1(t0,.) w^{-1/k} W1^{1/(2k)}.
  // When t0 <= a0 the anchor power is absorbed into the running time and
  // the exponent matches c2/c7; otherwise the exact chain keeps t0^alpha
  // as a separate factor.
  {
    const double tau = (e1 - 2.0 * e) / (2.0 * k);
    const double cb = 2.0 * sd * be * e1 * pbo(be + m - 1.0, be, tau);
    if (par.t0 <= a0) {
      c[11] = cb * std::pow(a0, -al * pos(m - 1.0) / be);
    } else {
      c[11] = cb * std::pow(par.t0, al) *
              std::pow(a0, -al * (be + m - 1.0) / be);
    }
  }
  return c;
}

namespace {

struct RatioGrid {
  std::vector<double> radii;  // |y| >= 1, geometric
  std::vector<double> times;  // [a0, b0]
};

RatioGrid make_grid(double a0, double b0, double radius, int nr, int nt) {
  RatioGrid g;
  g.radii.resize(nr);
  const double lr = std::log(radius);
  for (int i = 0; i < nr; ++i)
    g.radii[i] = std::exp(lr * i / double(nr - 1));
  g.times.resize(nt);
  for (int i = 0; i < nt; ++i)
    g.times[i] = a0 + (b0 - a0) * i / double(nt - 1);
  return g;
}

struct RatioSet {
  // the eleven certified ratios plus c12 and the sigma condition
  std::array<double, 13> sup{};
};

RatioSet measure_ratios(const OperatorSpec& spec, const WeightFamily& wf,
                        const RatioGrid& g, double sigma) {
  const LyapunovParams& par = wf.params();
  const double k = par.k;
  const double sd = std::sqrt(static_cast<double>(spec.dim));
  RatioSet rs;
  for (double t : g.times) {
    for (double r : g.radii) {
      for (double y : {r, -r}) {
        const FieldValues fv = spec.eval(y);
        const WeightEval w = wf.w_eval(t, y);
        const WeightEval w1 = wf.w1_eval(t, y);
        const WeightEval w2 = wf.w2_eval(t, y);
        auto upd = [&](int i, double v) {
          if (std::isnan(v)) throw NonFinite("ratio " + std::to_string(i + 1));
          rs.sup[i] = std::max(rs.sup[i], v);
        };
        const double wk = std::pow(w.w, 1.0 / k);
        const double w1k2 = std::pow(w1.w, 1.0 / (2.0 * k));
        const double w1k = std::pow(w1.w, 1.0 / k);
        const double w2k2 = std::pow(w2.w, 1.0 / (2.0 * k));
        const double w2k = std::pow(w2.w, 1.0 / k);
        // (i) w <= c1 w^{(k-2)/k} W1^{1/k}
        upd(0, wk * wk / w1k);
        // (ii) |Q grad w| <= c2 W1^{1/2k}
        upd(1, fv.q * std::abs(w.wy) / w1k2);
        // (iii) |Q D^2 w| <= c3 W1^{1/k}
        upd(2, fv.q * std::abs(w.wyy) / w1k);
        // (iv) |dt w| <= c4 w^{(k-2)/k} W1^{1/2k}
        upd(3, std::abs(w.wt) * wk * wk / (w.w * w1k2));
        // (v) V^{1/2} <= c5 w^{-1/k} W2^{1/2k}
        upd(4, std::sqrt(fv.v) * wk / w2k2);
        // (vi) |F| <= c6 w^{-1/k} W2^{1/2k}
        upd(5, std::abs(fv.f) * wk / w2k2);
        // (vii) |grad Q| <= c7 w^{-1/k} W1^{1/2k}
        upd(6, sd * std::abs(fv.dq) * wk / w1k2);
        // (viii) |grad F| <= c8 w^{-1/k} W2^{1/k}
        upd(7, std::abs(fv.df) * wk / w2k);
        // (ix) |grad V| <= c9 w^{-2/k} W2^{2/k}
        upd(8, std::abs(fv.dv) * wk * wk / (w2k * w2k));
        // (x) |D^3 w| <= c10 W1^{3/2k}
        upd(9, std::abs(w.wyyy) / (w1k2 * w1k2 * w1k2));
        // (xi) |dt grad w| <= c11 W1^{1/k}
        upd(10, std::abs(w.wty) / w1k);
        // Hyp 3.1(a): |Q| |grad W1(t0,.)| <= c12 W1(t0,.) w^{-1/k} W1^{1/2k}
        const WeightEval w1a = wf.w1_eval(par.t0, y);
        upd(11, sd * fv.q * std::abs(w1a.wy) * wk / (w1a.w * w1k2));
        // Hyp 3.1(b): W2 <= c0 Z^{1-sigma}
        upd(12, w2.w / (par.c0 * std::pow(wf.z(y), 1.0 - sigma)));
      }
    }
  }
  return rs;
}

}  // namespace

HypothesisReport check_hypotheses(const OperatorSpec& spec,
                                  const LyapunovParams& par, double a0,
                                  double b0, double radius, int n_radial,
                                  int n_time) {
  if (!(b0 < par.T)) throw WindowError("b0 < T required");
  if (!(a0 > 0.0 && a0 < b0)) throw WindowError("0 < a0 < b0 required");
  WeightFamily wf(par, spec.poly);
  const double sigma =
      par.sigma > 0.0 ? par.sigma : 0.95 * (1.0 - std::pow(b0, par.alpha));

  const RatioGrid coarse = make_grid(a0, b0, radius, n_radial, n_time);
  const RatioGrid fine = make_grid(a0, b0, radius, 2 * n_radial, 2 * n_time);
  const RatioSet rc = measure_ratios(spec, wf, coarse, sigma);
  const RatioSet rf = measure_ratios(spec, wf, fine, sigma);

  std::array<double, 13> closed{};
  if (spec.family == OperatorSpec::Family::polynomial) {
    const auto c = closed_form_constants(par, spec.poly, a0, spec.dim);
    for (int i = 0; i < 12; ++i) closed[i] = c[i];
  }
  closed[12] = 1.0;  // sigma condition certifies against 1 directly

  static const char* ids[13] = {
      "H2.3(c)(i)",  "H2.3(c)(ii)",  "H2.3(c)(iii)", "H2.3(c)(iv)",
      "H2.3(c)(v)",  "H2.3(c)(vi)",  "H2.3(c)(vii)", "H2.3(c)(viii)",
      "H2.3(c)(ix)", "H2.3(c)(x)",   "H2.3(c)(xi)",  "H3.1(a)c12"};

  HypothesisReport rep;
  const double tol_cert = 0.05;
  for (int i = 0; i < 13; ++i) {
    ConditionRecord rec;
    rec.id = (i < 12) ? ids[i] : "H3.1(b)sigma";
    rec.measured = rf.sup[i];
    rec.measured_coarse = rc.sup[i];
    rec.has_closed_form =
        (spec.family == OperatorSpec::Family::polynomial) || i == 12;
    rec.closed_form = rec.has_closed_form ? closed[i] : rf.sup[i];
    const bool stable =
        std::abs(rec.measured - rec.measured_coarse) <=
        0.02 * std::max(rec.measured, 1e-300);
    rec.pass = std::isfinite(rec.measured) && stable &&
               rec.measured <= rec.closed_form * (1.0 + tol_cert);
    rep.conditions.push_back(rec);
  }

  // Hyp 2.3(b) boundedness ratios, |y| >= 1 only; the exponential weight
  // has vanishing gradient at the origin, where two of these blow up as
  // literally written (recorded, not certified).
  double bmax = 0.0;
  for (double t : coarse.times) {
    for (double r : coarse.radii) {
      const WeightEval w = wf.w_eval(t, r);
      const double iw2 = 1.0 / (w.w * w.w);
      const double iw3 = iw2 / w.w;
      const double g = std::abs(w.wy);
      const double gk = std::pow(g, -(par.k + 1.0));
      for (double v :
           {std::abs(w.wy) * iw2, std::abs(w.wt) * iw2, std::abs(w.wyy) * iw2,
            w.wy * w.wy * iw3, std::abs(w.wty) * iw2,
            std::abs(w.wt * w.wy) * iw3, gk * std::abs(w.wyy),
            gk * std::abs(w.wty)})
        bmax = std::max(bmax, v);
    }
  }
  rep.boundedness_max = bmax;

  // plain max of the weight-derivative magnitudes near the origin
  double omax = 0.0;
  for (double t : coarse.times) {
    for (int i = 0; i <= 64; ++i) {
      const double y = -1.0 + 2.0 * i / 64.0;
      const WeightEval w = wf.w_eval(t, y);
      omax = std::max({omax, std::abs(w.wy), std::abs(w.wyy),
                       std::abs(w.wt), std::abs(w.wty)});
    }
  }
  rep.origin_max = omax;

  // Hyp 2.3(a): space integral at the small end of the window (where the
  // weight is weakest) plus the space-time integral, trapezoid + tail.
  {
    const double lam = 1.0 - par.eps_int;
    auto space_integral = [&](double t) {
      const int n = 4096;
      double acc = 0.0;
      const double h = 2.0 * radius / n;
      for (int i = 0; i <= n; ++i) {
        const double y = -radius + i * h;
        const double f = std::pow(wf.w(t, y), -lam);
        acc += (i == 0 || i == n) ? 0.5 * f : f;
      }
      acc *= h;
      const double rate = lam * par.eps * std::pow(t, par.alpha);
      const double tail =
          std::exp(-rate * std::pow(radius, par.beta)) /
          (rate * par.beta * std::pow(radius, par.beta - 1.0));
      return acc + 2.0 * tail;
    };
    rep.integrability_space = space_integral(a0);
    double st = 0.0;
    const int nt = 33;
    for (int i = 0; i < nt; ++i) {
      const double t = a0 + (b0 - a0) * i / double(nt - 1);
      const double f = space_integral(t);
      st += (i == 0 || i == nt - 1) ? 0.5 * f : f;
    }
    rep.integrability_spacetime = st * (b0 - a0) / (nt - 1);
    rep.integrability_finite = std::isfinite(rep.integrability_space) &&
                               std::isfinite(rep.integrability_spacetime);
  }

  rep.lyap_w1 = check_lyapunov(spec, wf, par.eps1, radius, b0);
  rep.lyap_w2 = check_lyapunov(spec, wf, par.eps2, radius, b0);
  rep.z_sup_AZ = measure_az(spec, wf, radius, /*drop_potential=*/false);
  rep.z0_sup_AZ0 = measure_az(spec, wf, radius, /*drop_potential=*/true);

  rep.notes =
      "k-threshold: enforcing k > 2(d+2) (the gradient hypothesis); the "
      "kernel estimate alone needs only k > d+2";

  rep.all_pass = rep.integrability_finite && std::isfinite(bmax) &&
                 std::isfinite(omax) && rep.lyap_w1.pass_eq21 &&
                 rep.lyap_w1.pass_eq22 && rep.lyap_w2.pass_eq21 &&
                 rep.lyap_w2.pass_eq22 && std::isfinite(rep.z_sup_AZ) &&
                 std::isfinite(rep.z0_sup_AZ0);
  for (const auto& c : rep.conditions) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

namespace {

// (dW/dt + A W)/W at (t, y); eta_laplacian replaces div(Q grad) by eta*D^2.
double drift_ratio(const OperatorSpec& spec, const WeightFamily& wf,
                   double rate, double t, double y, bool eta_laplacian) {
  const FieldValues fv = spec.eval(y);
  const WeightEval w = wf.eval(rate, t, y);
  double aw;
  if (eta_laplacian)
    aw = spec.eta * w.wyy + fv.f * w.wy - fv.v * w.w;
  else
    aw = fv.dq * w.wy + fv.q * w.wyy + fv.f * w.wy - fv.v * w.w;
  return (w.wt + aw) / w.w;
}

double hbar_at(const OperatorSpec& spec, const WeightFamily& wf, double rate,
               double t, double radius, int n_radial, bool eta_laplacian) {
  double sup = 0.0;
  // uniform nodes through the smoothing region, geometric beyond
  for (int i = 0; i <= 64; ++i) {
    const double y = -1.0 + 2.0 * i / 64.0;
    const double v = drift_ratio(spec, wf, rate, t, y, eta_laplacian);
    if (std::isnan(v)) throw NonFinite("drift ratio at origin region");
    sup = std::max(sup, v);
  }
  const double lr = std::log(radius);
  for (int i = 0; i < n_radial; ++i) {
    const double r = std::exp(lr * i / double(n_radial - 1));
    for (double y : {r, -r}) {
      const double v = drift_ratio(spec, wf, rate, t, y, eta_laplacian);
      if (std::isnan(v)) throw NonFinite("drift ratio");
      sup = std::max(sup, v);
    }
  }
  return sup;
}

}  // namespace

LyapunovCheck check_lyapunov(const OperatorSpec& spec, const WeightFamily& wf,
                             double rate, double radius, double t_max,
                             int n_radial, int n_time) {
  LyapunovCheck out;
  // geometric head resolves a possible t -> 0 singularity, uniform tail
  // carries the quadrature mass
  const double t_min = 1e-6;
  const double pivot = t_max / 8.0;
  const int n_head = n_time / 2;
  const double lgr = std::log(pivot / t_min);
  out.times.resize(n_time);
  out.hbar.resize(n_time);
  bool finite21 = true, finite22 = true;
  for (int i = 0; i < n_time; ++i) {
    const double t =
        i < n_head
            ? t_min * std::exp(lgr * i / double(n_head))
            : pivot + (t_max - pivot) * (i - n_head) / double(n_time - 1 - n_head);
    out.times[i] = t;
    const double h21 = hbar_at(spec, wf, rate, t, radius, n_radial, false);
    const double h22 = hbar_at(spec, wf, rate, t, radius, n_radial, true);
    finite21 = finite21 && std::isfinite(h21);
    finite22 = finite22 && std::isfinite(h22);
    out.hbar[i] = h21;
  }
  // trapezoid on the geometric time grid, full vs half resolution
  // anchored at the endpoint so every stride covers the same range
  auto integrate = [&](int stride) {
    double acc = 0.0;
    int i = n_time - 1;
    for (; i - stride >= 0; i -= stride) {
      const double dt = out.times[i] - out.times[i - stride];
      acc += 0.5 * (out.hbar[i] + out.hbar[i - stride]) * dt;
    }
    if (i > 0)
      acc += 0.5 * (out.hbar[i] + out.hbar[0]) * (out.times[i] - out.times[0]);
    return acc;
  };
  out.hbar_integral = integrate(1);
  const double coarse = integrate(2);
  out.refinement_ratio =
      coarse != 0.0 ? out.hbar_integral / coarse
                    : (out.hbar_integral == 0.0 ? 1.0 : 0.0);
  const bool integrable = std::isfinite(out.hbar_integral) &&
                          std::abs(out.refinement_ratio - 1.0) <= 0.02;
  out.pass_eq21 = finite21 && integrable;
  out.pass_eq22 = finite22 && integrable;
  return out;
}

double hbar_integral(const OperatorSpec& spec, const WeightFamily& wf,
                     double rate, double radius, double t_end, int n_radial,
                     int n_time) {
  return check_lyapunov(spec, wf, rate, radius, t_end, n_radial, n_time)
      .hbar_integral;
}

double measure_az(const OperatorSpec& spec, const WeightFamily& wf,
                  double radius, bool drop_potential, int n_radial) {
  const LyapunovParams& par = wf.params();
  // Z = exp(eps2 |y|_*^beta); Z0 = exp(eps2 |y|_*^{p+1-m})
  double sup = -std::numeric_limits<double>::infinity();
  const double lr = std::log(radius);
  for (int i = 0; i <= 64 + n_radial; ++i) {
    double y;
    if (i <= 64)
      y = -1.0 + 2.0 * i / 64.0;
    else
      y = std::exp(lr * (i - 65) / double(n_radial - 1));
    for (double yy : {y, -y}) {
      const FieldValues fv = spec.eval(yy);
      WeightEval z;
      if (drop_potential) {
        double expo = par.beta;
        if (spec.family == OperatorSpec::Family::polynomial)
          expo = spec.poly.p + 1.0 - spec.poly.m;
        z = wf.static_eval(par.eps2, expo, yy);
      } else {
        z = wf.static_eval(par.eps2, par.beta, yy);
      }
      double az = fv.dq * z.wy + fv.q * z.wyy + fv.f * z.wy;
      if (!drop_potential) az -= fv.v * z.w;
      double az_eta = spec.eta * z.wyy + fv.f * z.wy;
      if (!drop_potential) az_eta -= fv.v * z.w;
      sup = std::max({sup, az, az_eta});
    }
  }
  return sup;
}

}  // namespace kb
