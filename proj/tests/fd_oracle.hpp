#ifndef DYNBC_TESTS_FD_ORACLE_HPP
#define DYNBC_TESTS_FD_ORACLE_HPP

// Finite-difference residuals of the bulk equation and of the dynamic
// boundary condition on the unit circle, for problems with an exact solution.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "dynbc/problems.hpp"

namespace oracle {

using namespace dynbc;

// Fourth-order central second difference; exact for polynomials up to degree 5.
template <class F>
double second_diff(F f, double s, double d) {
  return (-f(s + 2 * d) + 16 * f(s + d) - 30 * f(s) + 16 * f(s - d) - f(s - 2 * d)) / (12 * d * d);
}

template <class F>
double first_diff(F f, double s, double d) {
  return (f(s + d) - f(s - d)) / (2 * d);
}

constexpr double kFirst = 1e-5;
constexpr double kSecond = 1e-3;

inline double bulk_residual(const ProblemSpec& s, double t, Point x) {
  const auto u = [&](double tt, double xx, double yy) { return s.exact(tt, {xx, yy}); };
  const double ut = first_diff([&](double tt) { return u(tt, x.x, x.y); }, t, kFirst);
  const double lap = second_diff([&](double xx) { return u(t, xx, x.y); }, x.x, kSecond) +
                     second_diff([&](double yy) { return u(t, x.x, yy); }, x.y, kSecond);
  const double k = s.kappa.on_element(0);
  const double val = u(t, x.x, x.y);
  return ut - k * lap + s.alpha_omega * val - s.f_omega(t, x, val);
}

inline double boundary_residual(const ProblemSpec& s, double t, double theta) {
  const auto u = [&](double tt, double r, double th) {
    return s.exact(tt, {r * std::cos(th), r * std::sin(th)});
  };
  const Point x{std::cos(theta), std::sin(theta)};
  const double ut = first_diff([&](double tt) { return u(tt, 1.0, theta); }, t, kFirst);
  const double lap_gamma = second_diff([&](double th) { return u(t, 1.0, th); }, theta, kSecond);
  const double dnu = first_diff([&](double r) { return u(t, r, theta); }, 1.0, kFirst);
  const double val = u(t, 1.0, theta);
  return ut - s.beta * lap_gamma + s.kappa.on_element(0) * dnu + s.alpha_gamma * val -
         s.f_gamma(t, x, val);
}

/// Largest bulk and boundary residual magnitudes over `samples` random
/// points (bulk points in the disk of radius 0.95, times in [0, T]).
inline std::pair<double, double> max_forcing_residuals(const ProblemSpec& s, unsigned seed,
                                                       int samples = 100) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_bulk = 0.0;
  double worst_bnd = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = unit(rng) * s.T;
    const double r = 0.95 * std::sqrt(unit(rng));
    const double phi = 2 * M_PI * unit(rng);
    worst_bulk = std::max(worst_bulk, std::abs(bulk_residual(s, t, {r * std::cos(phi), r * std::sin(phi)})));
    worst_bnd = std::max(worst_bnd, std::abs(boundary_residual(s, t, 2 * M_PI * unit(rng))));
  }
  return {worst_bulk, worst_bnd};
}

}  // namespace oracle

#endif
