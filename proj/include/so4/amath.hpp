#pragma once

// Angular-momentum arithmetic that stays finite at large quantum numbers:
// log-factorials, Clebsch-Gordan coefficients and SU(2) coherent-state
// coefficient vectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "so4/double_double.hpp"
#include "so4/errors.hpp"
#include "so4/half_int.hpp"

namespace so4 {

class LogFactorialTable {
 public:
  explicit LogFactorialTable(int max_arg) : values_(static_cast<std::size_t>(max_arg) + 1) {
    // Running sum in double-double; each stored value is then within half an
    // ulp of ln(k!) up to the rounding of the individual ln(k).
    DoubleDouble acc(0.0);
    values_[0] = 0.0;
    for (int k = 1; k <= max_arg; ++k) {
      acc += DoubleDouble(std::log(static_cast<double>(k)));
      values_[static_cast<std::size_t>(k)] = acc.to_double();
    }
  }

  [[nodiscard]] int max_arg() const { return static_cast<int>(values_.size()) - 1; }

  [[nodiscard]] double operator()(int k) const {
    if (k < 0 || k > max_arg()) {
      throw RangeError("log_factorial: argument " + std::to_string(k) + " outside [0, " +
                       std::to_string(max_arg()) + "]");
    }
    return values_[static_cast<std::size_t>(k)];
  }

 private:
  std::vector<double> values_;
};

/// Largest argument of the shared table: covers the Racah sum
/// (j1 + j2 + l + 1) for j <= 200.
inline constexpr int kLogFactorialMax = 1024;

inline const LogFactorialTable& log_factorial_table() {
  static const LogFactorialTable table(kLogFactorialMax);
  return table;
}

inline double log_factorial(int k) { return log_factorial_table()(k); }

/// ln((2k-1)!!) for k >= 0, i.e. ln(1*3*5*...*(2k-1)).
inline double log_double_factorial_odd(int k) {
  // (2k-1)!! = (2k)! / (2^k k!)
  return log_factorial(2 * k) - k * std::numbers::ln2 - log_factorial(k);
}

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | l m>.
///
/// Racah single sum. Term magnitudes come from the log-factorial table;
/// the alternating sum is normalized to its largest term and accumulated in
/// double-double through exact integer term ratios, which keeps the
/// relative error near 1e-13 at j ~ 70 where the terms cancel by ~1e15.
inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt l, HalfInt m) {
  if (!is_projection_of(m1, j1) || !is_projection_of(m2, j2) || !is_projection_of(m, l)) {
    throw DomainError("clebsch_gordan: invalid projection among (" + j1.str() + "," + m1.str() + "), (" +
                      j2.str() + "," + m2.str() + "), (" + l.str() + "," + m.str() + ")");
  }
  if (m1 + m2 != m) return 0.0;
  const int tj1 = j1.twice(), tj2 = j2.twice(), tl = l.twice();
  if (tl < std::abs(tj1 - tj2) || tl > tj1 + tj2 || (tj1 + tj2 + tl) % 2 != 0) return 0.0;

  // Integer arguments of the Racah sum.
  const int a = (tj1 + tj2 - tl) / 2;
  const int b = (tj1 - m1.twice()) / 2;
  const int c = (tj2 + m2.twice()) / 2;
  const int d = (tl - tj2 + m1.twice()) / 2;
  const int e = (tl - tj1 - m2.twice()) / 2;
  const int kmin = std::max({0, -d, -e});
  const int kmax = std::min({a, b, c});
  if (kmin > kmax) return 0.0;

  const auto& lf = log_factorial_table();
  const auto log_term = [&](int k) {
    return -(lf(k) + lf(a - k) + lf(b - k) + lf(c - k) + lf(d + k) + lf(e + k));
  };

  int kpeak = kmin;
  double peak = log_term(kmin);
  for (int k = kmin + 1; k <= kmax; ++k) {
    const double t = log_term(k);
    if (t > peak) {
      peak = t;
      kpeak = k;
    }
  }

  // Sum of term_k / term_kpeak. Ratios are quotients of integer triples
  // below 2^53, so each ratio is formed exactly before the dd division.
  DoubleDouble sum(1.0);
  DoubleDouble term(1.0);
  for (int k = kpeak; k < kmax; ++k) {
    const double num = static_cast<double>(a - k) * (b - k) * (c - k);
    const double den = static_cast<double>(k + 1) * (d + k + 1) * (e + k + 1);
    term = -(term * DoubleDouble(num)) / DoubleDouble(den);
    sum += term;
  }
  term = DoubleDouble(1.0);
  for (int k = kpeak; k > kmin; --k) {
    const double num = static_cast<double>(k) * (d + k) * (e + k);
    const double den = static_cast<double>(a - k + 1) * (b - k + 1) * (c - k + 1);
    term = -(term * DoubleDouble(num)) / DoubleDouble(den);
    sum += term;
  }

  const int tm = m.twice();
  const double log_prefactor =
      0.5 * (std::log(static_cast<double>(tl + 1)) + lf((tl + tj1 - tj2) / 2) + lf((tl - tj1 + tj2) / 2) +
             lf(a) - lf((tj1 + tj2 + tl) / 2 + 1) + lf((tj1 + m1.twice()) / 2) + lf(b) + lf(c) +
             lf((tj2 - m2.twice()) / 2) + lf((tl + tm) / 2) + lf((tl - tm) / 2));
  const double sign = (kpeak % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(log_prefactor + peak) * sum.to_double();
}

/// SU(2) coherent state |j, zeta> expanded over |j, m>, m = -j..j.
struct CoherentCoeffVector {
  HalfInt j;
  std::complex<double> zeta;
  std::vector<std::complex<double>> coeffs;  // index m + j

  [[nodiscard]] std::size_t size() const { return coeffs.size(); }
  [[nodiscard]] const std::complex<double>& at(HalfInt m) const {
    return coeffs.at(static_cast<std::size_t>((m.twice() + j.twice()) / 2));
  }
};

/// coeffs[m] = sqrt(C(2j, j+m)) zeta^(j+m) / (1+|zeta|^2)^j.
///
/// Magnitudes are assembled in log space; the phase (j+m) arg(zeta) is applied
/// separately, and real zeta keeps the coefficients exactly real.
inline CoherentCoeffVector so3_coherent_coeffs(HalfInt j, std::complex<double> zeta) {
  if (j.twice() < 0) throw DomainError("so3_coherent_coeffs: negative j");
  const int dim = j.twice() + 1;
  const int two_j = j.twice();
  CoherentCoeffVector out{j, zeta, std::vector<std::complex<double>>(static_cast<std::size_t>(dim))};

  const double mod = std::abs(zeta);
  if (mod == 0.0) {
    out.coeffs[0] = 1.0;
    return out;
  }
  const double log_mod = std::log(mod);
  const double log_norm = j.value() * std::log1p(mod * mod);
  const double arg = std::arg(zeta);
  const bool real_zeta = zeta.imag() == 0.0;

  double norm2 = 0.0;
  for (int p = 0; p < dim; ++p) {  // p = j + m
    const double log_mag =
        0.5 * (log_factorial(two_j) - log_factorial(p) - log_factorial(two_j - p)) + p * log_mod - log_norm;
    const double mag = std::exp(log_mag);
    std::complex<double> c;
    if (real_zeta) {
      c = (zeta.real() < 0.0 && p % 2 == 1) ? -mag : mag;
    } else {
      c = std::polar(mag, std::remainder(p * arg, 2.0 * std::numbers::pi));
    }
    out.coeffs[static_cast<std::size_t>(p)] = c;
    norm2 += std::norm(c);
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& c : out.coeffs) c *= scale;
  return out;
}

}  // namespace so4
