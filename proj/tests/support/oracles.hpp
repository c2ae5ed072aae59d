#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "youden_napg/core.hpp"

namespace oracle {

using youden::Index;
using youden::Matrix;
using youden::Vector;

/// Normal CDF in 50-digit arithmetic, rounded to double.
inline double phi_cdf(double x) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big z = -big(x) / boost::multiprecision::sqrt(big(2));
  return static_cast<double>(big(0.5) * boost::multiprecision::erfc(z));
}

/// f(omega, c) summed in long double with the high-precision CDF.
inline double smooth_f(const Vector& omega, double c, const Matrix& diseased, const Matrix& healthy,
                       double pi, double h) {
  long double sd = 0.0L, sh = 0.0L;
  for (Index i = 0; i < diseased.rows(); ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < omega.size(); ++j) s += static_cast<long double>(omega(j)) * diseased(i, j);
    sd += phi_cdf(static_cast<double>((c - s) / h));
  }
  for (Index i = 0; i < healthy.rows(); ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < omega.size(); ++j) s += static_cast<long double>(omega(j)) * healthy(i, j);
    sh += phi_cdf(static_cast<double>((c - s) / h));
  }
  return static_cast<double>(pi * sd / diseased.rows() - (1.0 - pi) * sh / healthy.rows());
}

/// Central differences of a scalar function of a vector.
inline Vector central_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                               double step) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up(i) += step;
    down(i) -= step;
    g(i) = (fn(up) - fn(down)) / (2.0 * step);
  }
  return g;
}

/// SCAD penalty straight from its definition: integral of p'(t) from 0 to x.
inline double scad_derivative_def(double t, double lambda, double a) {
  if (t <= lambda) return lambda;
  return std::max(a * lambda - t, 0.0) / (a - 1.0);
}

inline double scad_integral(double x, double lambda, double a) {
  using boost::math::quadrature::gauss_kronrod;
  auto dp = [&](double t) { return scad_derivative_def(t, lambda, a); };
  // Integrate piecewise so each panel is smooth.
  const double knots[] = {0.0, lambda, a * lambda};
  double total = 0.0, lo = 0.0;
  for (double k : knots) {
    if (k <= lo) continue;
    const double hi = std::min(k, x);
    if (hi > lo) total += gauss_kronrod<double, 61>::integrate(dp, lo, hi, 15, 1e-14);
    lo = std::max(lo, hi);
    if (lo >= x) return total;
  }
  if (x > lo) total += gauss_kronrod<double, 61>::integrate(dp, lo, x, 15, 1e-14);
  return total;
}

/// Closed-form SCAD value used only to score grid points (verified separately
/// against scad_integral).
inline double scad_value_def(double x, double lambda, double a) {
  x = std::abs(x);
  if (x <= lambda) return lambda * x;
  if (x <= a * lambda) return (2.0 * a * lambda * x - x * x - lambda * lambda) / (2.0 * (a - 1.0));
  return lambda * lambda * (a + 1.0) / 2.0;
}

inline double prox_objective(double z, double x, double step, double lambda, double a) {
  return (z - x) * (z - x) / (2.0 * step) + scad_value_def(z, lambda, a);
}

/// Grid minimizer of the SCAD prox objective at 1e-6 resolution: a coarse
/// scan at 1e-4 over [min(0,x), max(0,x)] locates every local basin, then each
/// basin is rescanned at 1e-6. Returns the best grid point.
inline double scad_prox_grid(double x, double step, double lambda, double a) {
  const double lo = std::min(0.0, x), hi = std::max(0.0, x);
  const double coarse = 1e-4, fine = 1e-6;
  const long n = static_cast<long>(std::ceil((hi - lo) / coarse)) + 1;
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = prox_objective(std::min(lo + i * coarse, hi), x, step, lambda, a);
  double best_z = 0.0, best_v = prox_objective(0.0, x, step, lambda, a);
  auto consider = [&](double z) {
    const double v = prox_objective(z, x, step, lambda, a);
    if (v < best_v) {
      best_v = v;
      best_z = z;
    }
  };
  consider(x);
  for (long i = 0; i < n; ++i) {
    const double v = vals[static_cast<std::size_t>(i)];
    const bool left_ok = i == 0 || v <= vals[static_cast<std::size_t>(i - 1)];
    const bool right_ok = i == n - 1 || v <= vals[static_cast<std::size_t>(i + 1)];
    if (!(left_ok && right_ok)) continue;
    const double centre = std::min(lo + i * coarse, hi);
    for (int j = -110; j <= 110; ++j) {
      const double z = centre + j * fine;
      if (z < lo || z > hi) continue;
      consider(z);
    }
  }
  return best_z;
}

/// Weighted Youden of fixed scores at cutoff c, counted directly.
inline double youden_at(const std::vector<double>& sd, const std::vector<double>& sh, double c,
                        double pi) {
  double se = 0, sp = 0;
  for (double s : sd) se += s > c ? 1 : 0;
  for (double s : sh) sp += s <= c ? 1 : 0;
  return 2.0 * (pi * se / sd.size() + (1.0 - pi) * sp / sh.size()) - 1.0;
}

/// Maximum weighted Youden over every threshold interval: one cutoff in each
/// gap between distinct pooled scores and one on either side.
inline double brute_force_best_youden(const std::vector<double>& sd, const std::vector<double>& sh,
                                      double pi) {
  std::vector<double> all = sd;
  all.insert(all.end(), sh.begin(), sh.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  double best = youden_at(sd, sh, all.front() - 1.0, pi);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double c = i + 1 < all.size() ? 0.5 * (all[i] + all[i + 1]) : all[i] + 1.0;
    best = std::max(best, youden_at(sd, sh, c, pi));
  }
  return best;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

inline double sample_correlation(const Vector& x, const Vector& y) {
  const double mx = x.mean(), my = y.mean();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double sxx = (x.array() - mx).square().sum();
  const double syy = (y.array() - my).square().sum();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
