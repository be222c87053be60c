#pragma once

#include <cmath>
#include <cstdint>

#include "shapuq/errors.hpp"

namespace shapuq {

/// Compensated (Kahan-Neumaier) accumulator. Summation order still matters
/// for bit reproducibility, so callers keep a fixed iteration order.
struct KahanAccumulator {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

/// x^k by repeated squaring. Deterministic across platforms, unlike
/// std::pow for integer exponents.
inline double pow_i(double x, unsigned k) {
  double r = 1.0;
  double base = x;
  while (k != 0) {
    if (k & 1u) r *= base;
    k >>= 1u;
    if (k != 0) base *= base;
  }
  return r;
}

/// Exact binomial coefficient. Valid for n <= 63 over the full range of k.
inline std::uint64_t binomial_u64(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return static_cast<std::uint64_t>(r);
}

/// (k-1)!! = 1*3*5*...*(k-1) for even k >= 2; the k-th central moment of a
/// standard normal divided by sigma^k.
inline double double_factorial_odd(int k) {
  double r = 1.0;
  for (int m = 3; m <= k - 1; m += 2) r *= static_cast<double>(m);
  return r;
}

inline double normal_pdf(double z) {
  static const double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
  static const double kInvSqrt2 = 0.70710678118654752440;
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

/// Inverse standard normal CDF. Rational approximation (Acklam) polished
/// with one Halley step, giving ~1 ulp over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie strictly inside (0,1)");
  }
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  static const double kSqrt2Pi = 2.50662827463100050242;
  const double e = normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

/// Partial moments of a normal law over a window [a, b]:
///   m0 = P(a <= X <= b), m1 = E[X; a<=X<=b], m2 = E[X^2; a<=X<=b].
struct WindowedNormalMoments {
  double m0;
  double m1;
  double m2;
};

inline WindowedNormalMoments windowed_normal_moments(double mu, double sigma,
                                                     double a, double b) {
  const double alpha = (a - mu) / sigma;
  const double beta = (b - mu) / sigma;
  const double phi_a = normal_pdf(alpha);
  const double phi_b = normal_pdf(beta);
  const double z0 = normal_cdf(beta) - normal_cdf(alpha);
  const double z1 = phi_a - phi_b;
  const double z2 = z0 + alpha * phi_a - beta * phi_b;
  WindowedNormalMoments w;
  w.m0 = z0;
  w.m1 = mu * z0 + sigma * z1;
  w.m2 = mu * mu * z0 + 2.0 * mu * sigma * z1 + sigma * sigma * z2;
  return w;
}

}  // namespace shapuq
