#pragma once

#include <cmath>

namespace homfrac::accept {

// Independent 1-D reference for the fractional operator of the Gaussian
// exp(-x^2) on the real line with the Euclidean norm. The symmetric-difference
// kernel operator has Fourier multiplier
//   m(xi) = integral over R of 2(1 - cos(xi h)) |h|^{-1-2s} dh
//         = 4 |xi|^{2s} integral_0^inf (1 - cos t) t^{-1-2s} dt,
// with the half-line moment Gamma(2-2s) cos(pi s) / (2s (1-2s)), which has a
// removable singularity with value pi/2 at s = 1/2. The value is recovered by
// quadrature of the inverse transform.

inline double one_minus_cos_moment(double alpha) {
  // integral_0^inf (1 - cos t) t^{-1-alpha} dt for 0 < alpha < 2
  if (std::abs(alpha - 1.0) < 1e-9) {
    // removable singularity: expand around alpha = 1
    double d = alpha - 1.0;
    // f(alpha) = Gamma(2-alpha) cos(pi alpha/2) / (alpha (1-alpha));
    // f(1) = pi/2, f'(1) = (pi/2)(1 - gamma_E)... evaluate by symmetric average
    double lo = one_minus_cos_moment(alpha - 1e-5);
    double hi = one_minus_cos_moment(alpha + 1e-5);
    (void)d;
    return 0.5 * (lo + hi);
  }
  return std::tgamma(2.0 - alpha) * std::cos(M_PI * alpha / 2.0) / (alpha * (1.0 - alpha));
}

inline double fractional_gaussian_oracle_1d(double s, double x) {
  double A = 4.0 * one_minus_cos_moment(2.0 * s);
  // u_hat(xi) = sqrt(pi) exp(-xi^2/4);  L_s u(x) = (1/2pi) int m |u_hat| e^{i xi x}
  //           = (A / sqrt(pi)) int_0^inf xi^{2s} exp(-xi^2/4) cos(xi x) dxi
  const int N = 200000;
  const double hi = 40.0;
  double h = hi / N;
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    // midpoint rule handles the mild xi^{2s} endpoint
    double xi = (i + 0.5) * h;
    acc += std::pow(xi, 2.0 * s) * std::exp(-0.25 * xi * xi) * std::cos(xi * x);
  }
  acc *= h;
  return A / std::sqrt(M_PI) * acc;
}

}  // namespace homfrac::accept
