#ifndef KB_SMOOTHED_NORM_HPP
#define KB_SMOOTHED_NORM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace kb {

// C^2 regularization of the Euclidean norm: equals |x| outside the unit
// ball, and the even quartic 3/8 + (3/4)r^2 - (1/8)r^4 inside, which matches
// value, first and second radial derivative at r = 1.  Minimum value 3/8.
namespace smoothed_norm {

inline double profile(double r) {
  r = std::abs(r);
  if (r >= 1.0) return r;
  const double r2 = r * r;
  return 0.375 + 0.75 * r2 - 0.125 * r2 * r2;
}

// d/dr of the radial profile (one-sided limits agree at r = 1).
inline double profile_d1(double r) {
  r = std::abs(r);
  if (r >= 1.0) return 1.0;
  return 1.5 * r - 0.5 * r * r * r;
}

inline double profile_d2(double r) {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return 1.5 - 1.5 * r * r;
}

// Third radial derivative; jumps at r = 1 (the profile is C^2, not C^3).
inline double profile_d3(double r) {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return -3.0 * r;
}

inline double value(const std::vector<double>& x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return profile(std::sqrt(r2));
}

inline std::vector<double> gradient(const std::vector<double>& x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  std::vector<double> g(x.size(), 0.0);
  if (r == 0.0) return g;  // profile_d1(0) = 0, radial symmetry
  const double s = profile_d1(r) / r;
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * x[i];
  return g;
}

// Action of the Hessian on a direction v.  For a radial function g(|x|) the
// Hessian is g'' P_rad + (g'/r) P_tan; at the origin it degenerates to
// g''(0) I = (3/2) I.
inline std::vector<double> hessian_action(const std::vector<double>& x,
                                          const std::vector<double>& v) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  std::vector<double> out(x.size(), 0.0);
  if (r == 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 1.5 * v[i];
    return out;
  }
  double xv = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) xv += x[i] * v[i];
  const double radial = profile_d2(r) * xv / r2;
  const double tangential = profile_d1(r) / r;
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = tangential * v[i] + (radial - tangential * xv / r2) * x[i];
  return out;
}

}  // namespace smoothed_norm
}  // namespace kb

#endif
