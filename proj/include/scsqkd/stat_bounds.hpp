#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scsqkd/errors.hpp"

namespace scsqkd {

// A failure probability xi held as log2(1/xi). Postselection penalties push xi
// to magnitudes like 2^-2456, far below double range, so xi itself is never
// formed anywhere in the library.
struct LogFailureProb {
  double log2_inv_xi = 0.0;  // 0 encodes xi = 1

  static LogFailureProb from_log2_inv(double v) {
    if (!(std::isfinite(v)) || v < 0.0)
      throw invariant_error("LogFailureProb: log2(1/xi) must be finite and >= 0");
    return {v};
  }

  // Convenience for xi representable as a double (tests, CLI flags).
  static LogFailureProb from_xi(double xi) {
    if (!(xi > 0.0) || xi > 1.0) throw invariant_error("LogFailureProb: xi must be in (0, 1]");
    return {-std::log2(xi)};
  }

  double ln_inv_xi() const { return log2_inv_xi * 0.6931471805599453094; }
};

namespace detail {

// g(delta) = delta + (1-delta)*ln(1-delta) = sum_{k>=2} delta^k / (k(k-1)),
// evaluated from t = 1 - delta so roots with t near underflow stay exact. The
// series has all-positive terms, so it stays fully conditioned where the
// direct form cancels catastrophically (delta -> 0).
inline double chernoff_lower_g_from_t(double t) {
  const double delta = 1.0 - t;
  if (delta < 0.5) {
    double term = delta * delta / 2.0;  // delta^k / 2 as k advances
    double sum = term;
    for (int k = 3; k < 400; ++k) {
      term *= delta;
      const double contrib = term * (2.0 / (static_cast<double>(k) * (k - 1)));
      sum += contrib;
      if (contrib < sum * 1e-18) break;
    }
    return sum;
  }
  return delta + t * std::log(t);
}

// h(delta) = (1+delta)*ln(1+delta) - delta = sum_{k>=2} (-1)^k delta^k / (k(k-1)).
inline double chernoff_upper_h(double delta) {
  if (delta < 0.5) {
    double term = delta * delta / 2.0;
    double sum = term;
    double sign = -1.0;
    for (int k = 3; k < 400; ++k) {
      term *= delta;
      const double contrib = sign * term * (2.0 / (static_cast<double>(k) * (k - 1)));
      sum += contrib;
      sign = -sign;
      if (std::abs(contrib) < sum * 1e-18) break;
    }
    return sum;
  }
  return (1.0 + delta) * std::log1p(delta) - delta;
}

}  // namespace detail

// Upper Chernoff bound on the expectation given an observed count X:
// E^U(X) = X / (1 - delta1), where delta1 solves
//   (X / (1 - delta1)) * g(delta1) = ln(1/xi).
// Solved by bisection in log(1 - delta1), which is monotone and covers roots
// arbitrarily close to delta1 = 1. For X = 0 the defining equation degenerates
// and the bound P(observe 0 | expectation E) <= e^-E gives E^U = ln(1/xi).
inline double expectation_upper(double x_observed, LogFailureProb xi) {
  if (!std::isfinite(x_observed) || x_observed < 0.0)
    throw std::domain_error("expectation_upper: observed count must be finite and >= 0");
  const double big_l = xi.ln_inv_xi();
  if (big_l == 0.0) return x_observed;
  if (x_observed == 0.0) return big_l;

  // f(u) = (X/t) * g(1-t) - L with t = e^u; strictly decreasing in t.
  const auto residual = [&](double u) {
    const double t = std::exp(u);
    return (x_observed / t) * detail::chernoff_lower_g_from_t(t) - big_l;
  };
  double ulo = -709.0, uhi = 0.0;  // t in [~1e-308, 1]
  for (int i = 0; i < 200; ++i) {
    const double um = 0.5 * (ulo + uhi);
    if (residual(um) > 0.0)
      ulo = um;
    else
      uhi = um;
  }
  const double t = std::exp(0.5 * (ulo + uhi));
  return x_observed / t;
}

// Upper Chernoff bound on the observation given an expected value Y:
// O^U(Y) = (1 + delta1') * Y, where delta1' solves Y * h(delta1') = ln(1/xi).
// For Y = 0 the bound on ever observing an event at failure probability xi is
// ln(1/xi).
inline double observed_upper(double y_expected, LogFailureProb xi) {
  if (!std::isfinite(y_expected) || y_expected < 0.0)
    throw std::domain_error("observed_upper: expected value must be finite and >= 0");
  const double big_l = xi.ln_inv_xi();
  if (big_l == 0.0) return y_expected;
  if (y_expected == 0.0) return big_l;

  const auto residual = [&](double d) { return y_expected * detail::chernoff_upper_h(d) - big_l; };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) < 0.0 && hi < 1e300) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    if (residual(m) < 0.0)
      lo = m;
    else
      hi = m;
  }
  return (1.0 + 0.5 * (lo + hi)) * y_expected;
}

// Shannon entropy of a binary variable, in bits; endpoints return 0 by the
// x*log2(x) -> 0 limit.
inline double binary_entropy(double x) {
  if (!(x >= 0.0) || x > 1.0) throw std::domain_error("binary_entropy: argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace scsqkd
