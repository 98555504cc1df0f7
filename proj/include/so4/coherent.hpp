#pragma once

// SO(4) = SO(3) x SO(3) coherent states of one hydrogenic shell.
//
// Product basis |j m1>|j m2> diagonalizes M3 = (L3 + A3)/2 and N3 = (L3 - A3)/2;
// the coupled basis |l m> is the hydrogenic |n l m>. Both are dense in
// memory: (2j+1)^2 = n^2 amplitudes either way.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "so4/amath.hpp"
#include "so4/coupling_table.hpp"
#include "so4/errors.hpp"
#include "so4/hydrogenic.hpp"
#include "so4/parallel.hpp"

namespace so4 {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct CoherentParams {
  ShellSpec shell;
  cplx zeta1;
  cplx zeta2;
  std::optional<double> eta;  // set by the planar constructor

  /// zeta2 = -zeta1 = -eta: <L> along +z or -z, <A> along +x.
  static CoherentParams planar(const ShellSpec& shell, double eta) {
    if (!(eta >= 0.0)) throw DomainError("CoherentParams::planar: eta must be >= 0");
    return {shell, cplx(eta, 0.0), cplx(-eta, 0.0), eta};
  }

  /// eta = 1 is the linear (eccentricity 1) orbit.
  [[nodiscard]] bool degenerate() const { return eta && std::abs(*eta - 1.0) < 1e-12; }
};

class ProductState {
 public:
  ProductState() = default;
  explicit ProductState(const ShellSpec& shell)
      : shell_(shell), dim_(shell.n), amps_(static_cast<std::size_t>(shell.n) * shell.n) {}

  [[nodiscard]] const ShellSpec& shell() const { return shell_; }
  [[nodiscard]] int dim() const { return dim_; }

  /// Index i = m + j for either factor.
  [[nodiscard]] cplx& at(int i1, int i2) { return amps_[static_cast<std::size_t>(i1) * dim_ + i2]; }
  [[nodiscard]] const cplx& at(int i1, int i2) const { return amps_[static_cast<std::size_t>(i1) * dim_ + i2]; }

  [[nodiscard]] const std::vector<cplx>& amplitudes() const { return amps_; }
  [[nodiscard]] std::vector<cplx>& amplitudes() { return amps_; }

  [[nodiscard]] double norm2() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

 private:
  ShellSpec shell_;
  int dim_ = 0;
  std::vector<cplx> amps_;
};

/// Amplitudes over |n l m>, laid out as l-blocks: index l^2 + l + m.
class CoupledState {
 public:
  CoupledState() = default;
  explicit CoupledState(const ShellSpec& shell)
      : shell_(shell), amps_(static_cast<std::size_t>(shell.n) * shell.n) {}

  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }

  [[nodiscard]] const ShellSpec& shell() const { return shell_; }
  [[nodiscard]] cplx& at(int l, int m) { return amps_[index(l, m)]; }
  [[nodiscard]] const cplx& at(int l, int m) const { return amps_[index(l, m)]; }
  [[nodiscard]] const std::vector<cplx>& amplitudes() const { return amps_; }
  [[nodiscard]] std::vector<cplx>& amplitudes() { return amps_; }

  [[nodiscard]] double norm2() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int l = 0; l < shell_.n; ++l) {
      for (int m = -l; m <= l; ++m) fn(l, m, at(l, m));
    }
  }

 private:
  ShellSpec shell_;
  std::vector<cplx> amps_;
};

inline constexpr double kDefaultTruncation = 1e-12;

/// |n, zeta1, zeta2> = |j, zeta1>|j, zeta2>, with amplitudes below
/// truncation * max dropped and the remainder renormalized.
inline ProductState build_product_state(const CoherentParams& params, double truncation = kDefaultTruncation) {
  if (!(truncation >= 0.0 && truncation < 1e-6)) {
    throw DomainError("build_product_state: truncation must lie in [0, 1e-6)");
  }
  const HalfInt j = params.shell.j();
  const auto c1 = so3_coherent_coeffs(j, params.zeta1);
  const auto c2 = so3_coherent_coeffs(j, params.zeta2);
  ProductState s(params.shell);
  double peak = 0.0;
  for (int i1 = 0; i1 < s.dim(); ++i1) {
    for (int i2 = 0; i2 < s.dim(); ++i2) {
      s.at(i1, i2) = c1.coeffs[static_cast<std::size_t>(i1)] * c2.coeffs[static_cast<std::size_t>(i2)];
      peak = std::max(peak, std::abs(s.at(i1, i2)));
    }
  }
  const double cut = truncation * peak;
  double kept = 0.0;
  for (auto& a : s.amplitudes()) {
    if (std::abs(a) < cut) a = 0.0;
    kept += std::norm(a);
  }
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& a : s.amplitudes()) a *= scale;
  return s;
}

namespace detail {

// Sector M collects (m1, m2 = M - m1); in product indices i1 + i2 = M + 2j.
inline int sector_i1_min(int M) { return std::max(0, M); }

}  // namespace detail

/// |l m> amplitudes: sum over m1 + m2 = m of <j m1; j m2 | l m> psi(m1, m2).
inline CoupledState to_coupled(const ProductState& ps) {
  const ShellSpec& shell = ps.shell();
  const int tj = shell.twice_j();
  const CouplingTable& table = coupling_table(tj);
  CoupledState out(shell);
  const std::size_t sectors = static_cast<std::size_t>(2 * tj + 1);
  parallel_for(sectors, [&](std::size_t s) {
    const int M = static_cast<int>(s) - tj;
    const int absM = std::abs(M);
    const int size = tj + 1 - absM;
    const int i1_min = detail::sector_i1_min(M);
    std::vector<cplx> v(static_cast<std::size_t>(size));
    bool any = false;
    for (int c = 0; c < size; ++c) {
      const int i1 = i1_min + c;
      const int i2 = M + tj - i1;
      v[static_cast<std::size_t>(c)] = ps.at(i1, i2);
      any = any || v[static_cast<std::size_t>(c)] != cplx(0.0);
    }
    if (!any) return;
    const auto& block = table.block(M);
    for (int r = 0; r < size; ++r) {
      cplx acc = 0.0;
      for (int c = 0; c < size; ++c) acc += block(r, c) * v[static_cast<std::size_t>(c)];
      out.at(absM + r, M) = acc;
    }
  });
  return out;
}

/// Inverse (transpose) of to_coupled.
inline ProductState to_product(const CoupledState& cs) {
  const ShellSpec& shell = cs.shell();
  const int tj = shell.twice_j();
  const CouplingTable& table = coupling_table(tj);
  ProductState out(shell);
  const std::size_t sectors = static_cast<std::size_t>(2 * tj + 1);
  parallel_for(sectors, [&](std::size_t s) {
    const int M = static_cast<int>(s) - tj;
    const int absM = std::abs(M);
    const int size = tj + 1 - absM;
    std::vector<cplx> w(static_cast<std::size_t>(size));
    bool any = false;
    for (int r = 0; r < size; ++r) {
      w[static_cast<std::size_t>(r)] = cs.at(absM + r, M);
      any = any || w[static_cast<std::size_t>(r)] != cplx(0.0);
    }
    if (!any) return;
    const auto& block = table.block(M);
    const int i1_min = detail::sector_i1_min(M);
    for (int c = 0; c < size; ++c) {
      cplx acc = 0.0;
      for (int r = 0; r < size; ++r) acc += block(r, c) * w[static_cast<std::size_t>(r)];
      const int i1 = i1_min + c;
      out.at(i1, M + tj - i1) = acc;
    }
  });
  return out;
}

struct ObservableReport {
  Vec3 L_vec{};  // <L>, hbar
  Vec3 A_vec{};  // <A>, scaled Laplace-Runge-Lenz
  Vec3 M_vec{};
  Vec3 N_vec{};
  double L2 = 0.0;     // <L^2>
  double A2 = 0.0;     // <A^2>
  double l_var = 0.0;  // <L3^2> - <L3>^2
  double C1 = 0.0;     // <L^2 + A^2>
  double C2 = 0.0;     // <L . A>
  double eccentricity = 0.0;
  double norm = 0.0;
};

/// Expectation values evaluated exactly in the product basis from the
/// diagonal J3 and ladder J+- matrix elements of M and N.
inline ObservableReport observables(const ProductState& ps) {
  const double nrm = ps.norm2();
  if (std::abs(nrm - 1.0) > 1e-8) {
    throw ContractError("observables: state norm^2 = " + std::to_string(nrm) + " differs from 1");
  }
  const int dim = ps.dim();
  const double j = 0.5 * ps.shell().twice_j();
  const auto mval = [&](int i) { return i - j; };
  const auto up = [&](int i) {  // <m+1| J+ |m>
    const double m = mval(i);
    return std::sqrt((j - m) * (j + m + 1.0));
  };

  double m3 = 0.0, n3 = 0.0, l3sq = 0.0, m_sq = 0.0, n_sq = 0.0, m3n3 = 0.0;
  cplx m_plus = 0.0, n_plus = 0.0, mp_nm = 0.0;
  for (int i1 = 0; i1 < dim; ++i1) {
    const double m1 = mval(i1);
    for (int i2 = 0; i2 < dim; ++i2) {
      const cplx a = ps.at(i1, i2);
      if (a == cplx(0.0)) continue;
      const double m2 = mval(i2);
      const double p = std::norm(a);
      m3 += p * m1;
      n3 += p * m2;
      l3sq += p * (m1 + m2) * (m1 + m2);
      m3n3 += p * m1 * m2;
      // J^2 = J3^2 + (J+J- + J-J+)/2 is diagonal in m.
      m_sq += p * (m1 * m1 + 0.5 * ((j + m1) * (j - m1 + 1.0) + (j - m1) * (j + m1 + 1.0)));
      n_sq += p * (m2 * m2 + 0.5 * ((j + m2) * (j - m2 + 1.0) + (j - m2) * (j + m2 + 1.0)));
      if (i1 + 1 < dim) m_plus += std::conj(ps.at(i1 + 1, i2)) * a * up(i1);
      if (i2 + 1 < dim) n_plus += std::conj(ps.at(i1, i2 + 1)) * a * up(i2);
      if (i1 + 1 < dim && i2 > 0) mp_nm += std::conj(ps.at(i1 + 1, i2 - 1)) * a * up(i1) * up(i2 - 1);
    }
  }

  ObservableReport r;
  r.norm = nrm;
  r.M_vec = {m_plus.real(), m_plus.imag(), m3};
  r.N_vec = {n_plus.real(), n_plus.imag(), n3};
  for (int k = 0; k < 3; ++k) {
    r.L_vec[static_cast<std::size_t>(k)] = r.M_vec[static_cast<std::size_t>(k)] + r.N_vec[static_cast<std::size_t>(k)];
    r.A_vec[static_cast<std::size_t>(k)] = r.M_vec[static_cast<std::size_t>(k)] - r.N_vec[static_cast<std::size_t>(k)];
  }
  // <M.N> = <M3 N3> + Re<M+ N->, since <M- N+> = conj<M+ N->.
  const double mn = m3n3 + mp_nm.real();
  r.L2 = m_sq + n_sq + 2.0 * mn;
  r.A2 = m_sq + n_sq - 2.0 * mn;
  r.C1 = r.L2 + r.A2;
  r.C2 = m_sq - n_sq;  // L.A = M^2 - N^2 because [M_i, N_k] = 0
  r.l_var = l3sq - r.L_vec[2] * r.L_vec[2];
  const double two_j = 2.0 * j;
  r.eccentricity = two_j > 0.0 ? std::min(1.0, norm(r.A_vec) / two_j) : 0.0;
  return r;
}

// --- coupled-basis diagnostics --------------------------------------------

/// sum l(l+1)|a_lm|^2, independent of the product-basis operator algebra.
inline double l_squared_coupled(const CoupledState& cs) {
  double s = 0.0;
  cs.for_each([&](int l, int, const cplx& a) { s += l * (l + 1.0) * std::norm(a); });
  return s;
}

inline double mean_l_coupled(const CoupledState& cs) {
  double s = 0.0;
  cs.for_each([&](int l, int, const cplx& a) { s += l * std::norm(a); });
  return s;
}

inline double l3_coupled(const CoupledState& cs) {
  double s = 0.0;
  cs.for_each([&](int, int m, const cplx& a) { s += m * std::norm(a); });
  return s;
}

/// How <l> + 1/2 is estimated for the precession period.
enum class LEffConvention {
  AbsL3,          // |<L3>|; reproduces the reference n = 141 periods
  AbsL3PlusHalf,  // |<L3>| + 1/2
  RootL2,         // sqrt(<L^2> + 1/4)
  MeanLPlusHalf,  // <l> + 1/2 from the coupled distribution
};

inline const char* to_string(LEffConvention c) {
  switch (c) {
    case LEffConvention::AbsL3: return "abs_l3";
    case LEffConvention::AbsL3PlusHalf: return "abs_l3_plus_half";
    case LEffConvention::RootL2: return "root_l2";
    case LEffConvention::MeanLPlusHalf: return "mean_l_plus_half";
  }
  return "?";
}

inline double effective_l(const CoupledState& cs, LEffConvention c = LEffConvention::AbsL3) {
  switch (c) {
    case LEffConvention::AbsL3: return std::abs(l3_coupled(cs));
    case LEffConvention::AbsL3PlusHalf: return std::abs(l3_coupled(cs)) + 0.5;
    case LEffConvention::RootL2: return std::sqrt(l_squared_coupled(cs) + 0.25);
    case LEffConvention::MeanLPlusHalf: return mean_l_coupled(cs) + 0.5;
  }
  return 0.0;
}

// --- closed forms for the planar family ------------------------------------

/// Orbit eccentricity 2 eta / (1 + eta^2).
inline double eccentricity_of_eta(double eta) {
  if (!(eta >= 0.0)) throw DomainError("eccentricity_of_eta: eta must be >= 0");
  return 2.0 * eta / (1.0 + eta * eta);
}

enum class EtaBranch { Lower, Upper };  // eta < 1, eta > 1

/// Inverse of eccentricity_of_eta on one branch.
inline double eta_of_eccentricity(double eps, EtaBranch branch) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("eta_of_eccentricity: eps must lie in [0, 1]");
  const double q = std::sqrt((1.0 - eps) * (1.0 + eps));
  if (branch == EtaBranch::Lower) return eps / (1.0 + q);
  if (eps == 0.0) throw DomainError("eta_of_eccentricity: upper branch diverges at eps = 0");
  return (1.0 + q) / eps;
}

inline double closed_form_l3(HalfInt j, double eta) {
  return 2.0 * j.value() * (eta * eta - 1.0) / (1.0 + eta * eta);
}

inline double closed_form_a1(HalfInt j, double eta) { return 4.0 * j.value() * eta / (1.0 + eta * eta); }

inline double closed_form_l2(HalfInt j, double eta) {
  const double jj = j.value();
  const double e2 = eta * eta;
  return 2.0 * jj * (jj + 1.0) + 2.0 * jj * jj * (e2 * e2 - 6.0 * e2 + 1.0) / ((1.0 + e2) * (1.0 + e2));
}

/// (Delta L3)^2 = (Delta M3)^2 + (Delta N3)^2 with (Delta J3)^2 = 2j eta^2/(1+eta^2)^2 each.
inline double l_variance_closed_form(HalfInt j, double eta) {
  if (!(eta >= 0.0)) throw DomainError("l_variance_closed_form: eta must be >= 0");
  const double d = 1.0 + eta * eta;
  return 2.0 * (2.0 * j.value() * eta * eta / (d * d));
}

/// Signed test phase 2 pi eta^2 / (eta^4 - 1); diverges on the linear orbit.
inline double dephasing_phi_eta(double eta) {
  if (!(eta >= 0.0)) throw DomainError("dephasing_phi_eta: eta must be >= 0");
  const double e2 = eta * eta;
  if (std::abs(e2 - 1.0) < 1e-12) throw DomainError("dephasing_phi_eta: eta = 1 (linear orbit) is singular");
  if (e2 == 0.0) return 0.0;
  return 2.0 * std::numbers::pi * e2 / ((e2 - 1.0) * (e2 + 1.0));
}

/// Test phase in terms of eccentricity on the chosen eta branch.
///
/// With q = sqrt(1 - eps^2) the two-branch form
///   2 pi eps^2 (2 - eps^2 +- 2q) / (8 - 8 eps^2 +- 4 (2 - eps^2) q)
/// has numerator factor (1 +- q)^2 and denominator 4q (1 +- q)^2 up to sign;
/// cancelling them avoids the eps^4 / eps^4 cancellation near eps = 0.
inline double dephasing_phi_eps(double eps, EtaBranch branch) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("dephasing_phi_eps: eps must lie in [0, 1)");
  const double q = std::sqrt((1.0 - eps) * (1.0 + eps));
  const double mag = std::numbers::pi * eps * eps / (2.0 * q);
  return branch == EtaBranch::Upper ? mag : -mag;
}

}  // namespace so4
