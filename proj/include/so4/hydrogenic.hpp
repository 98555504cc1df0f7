#pragma once

// Hydrogenic shell physics in Hartree atomic units (hbar = m = e = 1,
// c = 1/alpha). SI enters only through PhysicalConstants at reporting edges.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "so4/amath.hpp"
#include "so4/errors.hpp"
#include "so4/half_int.hpp"

namespace so4 {

struct PhysicalConstants {
  double alpha = 7.2973525693e-3;
  double atomic_time_si = 2.4188843265857e-17;  // s per atomic time unit
  double bohr_radius_si = 5.29177210903e-11;    // m per atomic length unit
  double speed_of_light_si = 299792458.0;       // m/s
  double hbar_si = 1.054571817e-34;             // J s

  /// Same constants with alpha scaled; used by sensitivity checks.
  [[nodiscard]] PhysicalConstants with_alpha_scaled(double factor) const {
    PhysicalConstants c = *this;
    c.alpha *= factor;
    return c;
  }
};

inline constexpr PhysicalConstants kCodata2018{};

struct ShellSpec {
  int n = 1;
  int Z = 1;

  ShellSpec() = default;
  ShellSpec(int n_, int z_) : n(n_), Z(z_) {
    if (n < 1) throw DomainError("ShellSpec: n must be >= 1, got " + std::to_string(n));
    if (Z < 1) throw DomainError("ShellSpec: Z must be >= 1, got " + std::to_string(Z));
  }

  /// j of the two SO(3) factors, n = 2j + 1.
  [[nodiscard]] HalfInt j() const { return HalfInt::from_twice(n - 1); }
  [[nodiscard]] int twice_j() const { return n - 1; }

  friend bool operator==(const ShellSpec&, const ShellSpec&) = default;
};

// --- energies -------------------------------------------------------------

/// Unperturbed level -Z^2 / (2 n^2) hartree.
inline double energy0(const ShellSpec& s) {
  return -static_cast<double>(s.Z) * s.Z / (2.0 * s.n * static_cast<double>(s.n));
}

inline void require_l_in_shell(const ShellSpec& s, int l, const char* who) {
  if (l < 0 || l > s.n - 1) {
    throw DomainError(std::string(who) + ": l = " + std::to_string(l) + " outside [0, " + std::to_string(s.n - 1) +
                      "]");
  }
}

/// First-order shift from the -p^4/(8 m^3 c^2) kinetic correction, hartree.
inline double energy1(const ShellSpec& s, int l, const PhysicalConstants& pc = kCodata2018) {
  require_l_in_shell(s, l, "energy1");
  const double z2 = static_cast<double>(s.Z) * s.Z;
  const double n = s.n;
  return -(z2 * z2 * pc.alpha * pc.alpha / (2.0 * n * n * n)) * (1.0 / (l + 0.5) - 3.0 / (4.0 * n));
}

/// Second-order Taylor model of energy0 about a mean principal number.
inline double energy0_taylor(double n_mean, double n, int Z) {
  const double d = n - n_mean;
  const double z2 = static_cast<double>(Z) * Z;
  return -0.5 * z2 * (1.0 / (n_mean * n_mean) - 2.0 * d / (n_mean * n_mean * n_mean) + 3.0 * d * d / std::pow(n_mean, 4));
}

/// Second-order Taylor model of energy1 about l_mean (expansion in l - l_mean).
inline double energy1_taylor(const ShellSpec& s, double l_mean, double l, const PhysicalConstants& pc = kCodata2018) {
  const double z2 = static_cast<double>(s.Z) * s.Z;
  const double n = s.n;
  const double pre = z2 * z2 * pc.alpha * pc.alpha / (2.0 * n * n * n);
  const double le = l_mean + 0.5;
  const double d = l - l_mean;
  return pre * (-(1.0 / le - 3.0 / (4.0 * n)) + d / (le * le) - d * d / (le * le * le));
}

// --- time scales and rates --------------------------------------------------

inline void require_positive(double v, const char* who, const char* what) {
  if (!(v > 0.0)) throw DomainError(std::string(who) + ": " + what + " must be positive");
}

/// Classical Kepler period 2 pi n^3 / Z^2 in atomic time units.
inline double t_classical_au(const ShellSpec& s) {
  const double n = s.n;
  return 2.0 * std::numbers::pi * n * n * n / (static_cast<double>(s.Z) * s.Z);
}

inline double t_classical(const ShellSpec& s, const PhysicalConstants& pc = kCodata2018) {
  return t_classical_au(s) * pc.atomic_time_si;
}

/// Shell radius n^2 / Z in bohr.
inline double mean_radius(const ShellSpec& s) { return static_cast<double>(s.n) * s.n / s.Z; }

/// Precession period (4 pi n^3 / (Z^4 alpha^2)) l_eff^2 in atomic time units,
/// where l_eff stands for <l> + 1/2.
inline double t_precession_au(const ShellSpec& s, double l_eff, const PhysicalConstants& pc = kCodata2018) {
  require_positive(l_eff, "t_precession", "l_eff");
  const double n = s.n;
  const double z2 = static_cast<double>(s.Z) * s.Z;
  return 4.0 * std::numbers::pi * n * n * n / (z2 * z2 * pc.alpha * pc.alpha) * l_eff * l_eff;
}

inline double t_precession(const ShellSpec& s, double l_eff, const PhysicalConstants& pc = kCodata2018) {
  return t_precession_au(s, l_eff, pc) * pc.atomic_time_si;
}

/// Special-relativistic perihelion advance per classical period,
/// pi Z^2 alpha^2 / l_eff^2 radians.
inline double precession_rate_sr(int Z, double l_eff, const PhysicalConstants& pc = kCodata2018) {
  require_positive(l_eff, "precession_rate_sr", "l_eff");
  const double za = Z * pc.alpha;
  return std::numbers::pi * za * za / (l_eff * l_eff);
}

/// Kepler-problem form pi (G M m)^2 / (c^2 L^2), SI inputs: gmm in J m, L in J s.
inline double precession_rate_classical_gravity(double gmm, double ang_mom, const PhysicalConstants& pc = kCodata2018) {
  require_positive(gmm, "precession_rate_classical_gravity", "G M m");
  require_positive(ang_mom, "precession_rate_classical_gravity", "angular momentum");
  const double ratio = gmm / (pc.speed_of_light_si * ang_mom);
  return std::numbers::pi * ratio * ratio;
}

/// General-relativistic rate: six times the special-relativistic Kepler form.
inline double precession_rate_gr(double gmm, double ang_mom, const PhysicalConstants& pc = kCodata2018) {
  return 6.0 * precession_rate_classical_gravity(gmm, ang_mom, pc);
}

/// SI strength Z e^2 / (4 pi eps0) of the Coulomb potential, for plugging into the Kepler form.
inline double coulomb_strength_si(int Z, const PhysicalConstants& pc = kCodata2018) {
  return Z * pc.alpha * pc.hbar_si * pc.speed_of_light_si;
}

/// Quadratic-term phase at the distribution edge after one classical period.
inline double dephasing_test_n(double n_mean, double n_var) {
  require_positive(n_mean, "dephasing_test_n", "n_mean");
  if (n_var < 0.0) throw DomainError("dephasing_test_n: negative variance");
  return 3.0 * std::numbers::pi * n_var / n_mean;
}

/// Quadratic-term phase at the distribution edge after one precession period.
inline double dephasing_test_l(double l_eff, double l_var) {
  require_positive(l_eff, "dephasing_test_l", "l_eff");
  if (l_var < 0.0) throw DomainError("dephasing_test_l: negative variance");
  return 2.0 * std::numbers::pi * l_var / l_eff;
}

struct SemiclassicalReport {
  double t_cl = 0.0;         // s
  double t_p = 0.0;          // s
  double ratio = 0.0;        // t_p / t_cl
  double delta_omega = 0.0;  // rad per classical period
  double l_eff = 0.0;
};

inline SemiclassicalReport semiclassical_report(const ShellSpec& s, double l_eff,
                                                const PhysicalConstants& pc = kCodata2018) {
  SemiclassicalReport r;
  r.l_eff = l_eff;
  r.t_cl = t_classical(s, pc);
  r.t_p = t_precession(s, l_eff, pc);
  r.ratio = t_precession_au(s, l_eff, pc) / t_classical_au(s);
  r.delta_omega = precession_rate_sr(s.Z, l_eff, pc);
  return r;
}

// --- basis functions ---------------------------------------------------------

/// Associated Laguerre L_k^(a)(x) as sign * exp(log_abs); three-term
/// recurrence with a running scale so intermediate values never overflow.
struct ScaledValue {
  double sign = 0.0;
  double log_abs = -std::numeric_limits<double>::infinity();
};

inline ScaledValue laguerre_scaled(int k, double a, double x) {
  double prev = 1.0;
  if (k == 0) return {1.0, 0.0};
  double cur = 1.0 + a - x;
  double log_scale = 0.0;
  for (int i = 1; i < k; ++i) {
    const double next = ((2.0 * i + 1.0 + a - x) * cur - (i + a) * prev) / (i + 1.0);
    prev = cur;
    cur = next;
    const double big = std::max(std::abs(prev), std::abs(cur));
    if (big > 1e150 || (big < 1e-150 && big > 0.0)) {
      const int e = std::ilogb(big);
      prev = std::scalbn(prev, -e);
      cur = std::scalbn(cur, -e);
      log_scale += e * std::numbers::ln2;
    }
  }
  if (cur == 0.0) return {};
  return {cur > 0.0 ? 1.0 : -1.0, std::log(std::abs(cur)) + log_scale};
}

/// Normalized hydrogenic radial function R_nl(r), r in bohr.
inline double radial_wavefunction(const ShellSpec& s, int l, double r) {
  require_l_in_shell(s, l, "radial_wavefunction");
  if (r < 0.0) throw DomainError("radial_wavefunction: negative radius");
  const int n = s.n;
  const double rho = 2.0 * s.Z * r / n;
  if (rho == 0.0 && l > 0) return 0.0;
  const ScaledValue lag = laguerre_scaled(n - l - 1, 2.0 * l + 1.0, rho);
  if (lag.sign == 0.0) return 0.0;
  const double log_norm =
      0.5 * (3.0 * std::log(2.0 * s.Z / n) + log_factorial(n - l - 1) - std::log(2.0 * n) - log_factorial(n + l));
  const double log_rho_l = (l == 0) ? 0.0 : l * std::log(rho);
  return lag.sign * std::exp(log_norm + log_rho_l - 0.5 * rho + lag.log_abs);
}

/// Real factor f with Y_lm(pi/2, phi) = f e^{i m phi} (Condon-Shortley).
inline double equatorial_harmonic_factor(int l, int m) {
  if (l < 0 || std::abs(m) > l) {
    throw DomainError("sph_harm_equatorial: |m| > l for (" + std::to_string(l) + ", " + std::to_string(m) + ")");
  }
  const int am = std::abs(m);
  if ((l - am) % 2 != 0) return 0.0;
  const int p = (l + am) / 2;  // (l+|m|-1)!! = (2p-1)!!
  const int q = (l - am) / 2;  // (l-|m|)!!  = 2^q q!
  const double log_p = log_double_factorial_odd(p) - (q * std::numbers::ln2 + log_factorial(q));
  const double log_n = 0.5 * (std::log((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) + log_factorial(l - am) -
                              log_factorial(l + am));
  double v = std::exp(log_p + log_n);
  if (p % 2 != 0) v = -v;             // (-1)^((l+|m|)/2) from P_l^m(0)
  if (m < 0 && am % 2 != 0) v = -v;   // Y_{l,-m} = (-1)^m conj(Y_{l,m})
  return v;
}

inline std::complex<double> sph_harm_equatorial(int l, int m, double phi) {
  return equatorial_harmonic_factor(l, m) * std::polar(1.0, m * phi);
}

/// Y_lm(theta, phi) at general polar angle via the normalized associated
/// Legendre recurrence in l.
inline std::complex<double> sph_harm(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw DomainError("sph_harm: |m| > l");
  const int am = std::abs(m);
  const double x = std::cos(theta);
  const double sn = std::sin(theta);
  // P_mm normalized: (-1)^m sqrt((2m+1)/(4 pi) (2m-1)!!/(2m)!!) sin^m
  double pmm;
  if (am == 0) {
    pmm = std::sqrt(1.0 / (4.0 * std::numbers::pi));
  } else if (sn == 0.0) {
    pmm = 0.0;
  } else {
    const double log_ratio = log_double_factorial_odd(am) - (am * std::numbers::ln2 + log_factorial(am));
    pmm = std::exp(0.5 * (std::log((2.0 * am + 1.0) / (4.0 * std::numbers::pi)) + log_ratio) +
                   am * std::log(std::abs(sn)));
    if (sn < 0.0 && am % 2 != 0) pmm = -pmm;
    if (am % 2 != 0) pmm = -pmm;
  }
  double plm = pmm;
  if (l > am) {
    double p_prev = pmm;
    double p_cur = x * std::sqrt(2.0 * am + 3.0) * pmm;
    for (int ll = am + 2; ll <= l; ++ll) {
      const double a = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - am * am));
      const double b = std::sqrt((static_cast<double>(ll - 1) * (ll - 1) - am * am) / (4.0 * (ll - 1) * (ll - 1) - 1.0));
      const double p_next = a * (x * p_cur - b * p_prev);
      p_prev = p_cur;
      p_cur = p_next;
    }
    plm = p_cur;
  }
  std::complex<double> y = plm * std::polar(1.0, am * phi);
  if (m < 0) {
    y = std::conj(y);
    if (am % 2 != 0) y = -y;
  }
  return y;
}

}  // namespace so4
