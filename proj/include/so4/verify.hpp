#pragma once

// Self-check suite behind `so4sim verify`: invariants against independent
// oracles plus regressions on the reference n = 141 numbers.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "so4/coherent.hpp"
#include "so4/dynamics.hpp"
#include "so4/hydrogenic.hpp"
#include "so4/render.hpp"
#include "so4/testing/cg_oracle.hpp"
#include "so4/testing/dense_oracle.hpp"

namespace so4 {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  bool quick = false;          // skip the n = 141 density grids
  double alpha_scale = 1.0;    // perturbs alpha everywhere; regressions should then fail
  int grid_resolution = 128;
};

namespace verify_detail {

inline bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Collects the worst deviation across sub-cases and the first failure message.
struct Tally {
  bool ok = true;
  double worst = 0.0;
  std::string first;

  void check(bool cond, double dev, const std::string& what) {
    worst = std::max(worst, dev);
    if (!cond && ok) {
      ok = false;
      first = what;
    }
  }
  [[nodiscard]] std::string detail() const { return ok ? "worst " + fmt(worst) : first; }
};

inline double quoted_relative(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline Tally cg_exact_small() {
  Tally t;
  auto H = [](int tw) { return HalfInt::from_twice(tw); };
  for (int a = 0; a <= 12; ++a) {
    for (int b = 0; b <= 12; ++b) {
      const testing::ExactCoupling ex(a, b);
      for (int tl = std::abs(a - b); tl <= a + b; tl += 2) {
        for (int m1 = -a; m1 <= a; m1 += 2) {
          for (int m2 = -b; m2 <= b; m2 += 2) {
            if (std::abs(m1 + m2) > tl) continue;
            const double got = clebsch_gordan(H(a), H(m1), H(b), H(m2), H(tl), H(m1 + m2));
            const double want = ex.cg(H(m1), H(m2), H(tl), H(m1 + m2));
            const double d = std::abs(got - want);
            t.check(d < 1e-12, d, "CG mismatch at 2j1=" + std::to_string(a) + " 2j2=" + std::to_string(b));
          }
        }
      }
    }
  }
  return t;
}

inline Tally cg_orthogonality_large() {
  Tally t;
  const CouplingTable& table = coupling_table(140);
  for (int M : {0, 1, -37, 100, 139, -140}) {
    const auto& blk = table.block(M);
    for (int r = 0; r < blk.size; ++r) {
      for (int s = r; s < blk.size; ++s) {
        double dotp = 0.0;
        for (int c = 0; c < blk.size; ++c) dotp += blk(r, c) * blk(s, c);
        const double d = std::abs(dotp - (r == s ? 1.0 : 0.0));
        t.check(d < 1e-10, d, "CG rows not orthonormal at j=70, M=" + std::to_string(M));
      }
    }
  }
  return t;
}

/// <J> of |j, zeta> against 2j/(1+|z|^2) (Re z, -Im z, (|z|^2-1)/2).
inline Tally coherent_expectations() {
  Tally t;
  const std::complex<double> zetas[] = {{0.0, 0.0}, {0.2, 0.0}, {-0.7, 0.3}, {1.5, -2.0}, {0.0, 0.9}};
  for (int n : {2, 11, 141}) {
    const ShellSpec shell(n, 1);
    for (const auto& z1 : zetas) {
      const auto z2 = std::complex<double>(0.3, 0.1);
      const auto r = observables(build_product_state({shell, z1, z2, std::nullopt}, 0.0));
      const double tj = shell.twice_j();
      auto expect = [&](std::complex<double> z) {
        const double m2 = std::norm(z);
        const double f = tj / (1.0 + m2);
        return Vec3{f * z.real(), -f * z.imag(), 0.5 * f * (m2 - 1.0)};
      };
      const Vec3 em = expect(z1), en = expect(z2);
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = std::max(std::abs(r.M_vec[k] - em[k]), std::abs(r.N_vec[k] - en[k])) / std::max(1.0, tj);
        t.check(d < 1e-10, d, "coherent <J> off at n=" + std::to_string(n));
      }
      t.check(std::abs(r.norm - 1.0) < 1e-10, std::abs(r.norm - 1.0), "coherent norm off");
    }
  }
  return t;
}

inline Tally algebraic_invariants() {
  Tally t;
  for (int n : {5, 21, 141}) {
    const ShellSpec shell(n, 1);
    const HalfInt j = shell.j();
    const double n2 = static_cast<double>(n) * n;
    for (double eta : {0.0, 0.2, 0.4, 1.5}) {
      const std::string tag = " (n=" + std::to_string(n) + ", eta=" + fmt(eta) + ")";
      const ProductState ps = build_product_state(CoherentParams::planar(shell, eta));
      const CoupledState cs = to_coupled(ps);
      const ProductState back = to_product(cs);
      double rt = 0.0;
      for (std::size_t k = 0; k < ps.amplitudes().size(); ++k) {
        rt = std::max(rt, std::abs(ps.amplitudes()[k] - back.amplitudes()[k]));
      }
      t.check(rt < 1e-10, rt, "round trip" + tag);
      const auto r = observables(ps);
      t.check(std::abs(cs.norm2() - 1.0) < 1e-10, std::abs(cs.norm2() - 1.0), "norm" + tag);
      t.check(rel_close(r.C1, n2 - 1.0, 1e-8), quoted_relative(r.C1, n2 - 1.0), "C1" + tag);
      t.check(std::abs(r.C2) < 1e-8 * n2, std::abs(r.C2) / n2, "C2" + tag);
      auto rel = [&](double got, double want, const char* what) {
        const double d = want == 0.0 ? std::abs(got) : quoted_relative(got, want);
        t.check(d < 1e-8, d, std::string(what) + tag);
      };
      rel(r.L_vec[2], closed_form_l3(j, eta), "<L3>");
      rel(r.A_vec[0], closed_form_a1(j, eta), "<A1>");
      rel(r.L2, closed_form_l2(j, eta), "<L^2>");
      rel(r.l_var, l_variance_closed_form(j, eta), "(dL3)^2");
      rel(l_squared_coupled(cs), closed_form_l2(j, eta), "coupled <L^2>");
    }
  }
  return t;
}

inline Tally dense_oracle(const PhysicalConstants& pc) {
  Tally t;
  const ShellSpec shell(21, 1);
  const testing::DenseShell dense(shell, pc);
  for (double eta : {0.2, 0.4, 1.5}) {
    const auto params = CoherentParams::planar(shell, eta);
    const CoupledState cs = to_coupled(build_product_state(params));
    const double l_eff = effective_l(cs);
    const auto psi0 = dense.coherent_state(params.zeta1, params.zeta2);
    for (double frac : {0.0, 1.0 / 7.0, 1.0 / 3.0}) {
      const TimeSpec ts = TimeSpec::precession_periods(frac);
      const double t_au = to_atomic_time(ts, shell, l_eff, pc);
      const auto r = observables(to_product(evolve(cs, {shell, ts}, pc)));
      const auto m = dense.moments(dense.evolve(psi0, t_au));
      const std::string tag = " (eta=" + fmt(eta) + ", t=" + fmt(frac) + " Tp)";
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = std::max(std::abs(r.L_vec[k] - m.L[k]), std::abs(r.A_vec[k] - m.A[k]));
        t.check(d < 1e-8, d, "<L>/<A> vs dense" + tag);
      }
      for (auto [got, want] : {std::pair{r.L2, m.L2}, {r.A2, m.A2}, {r.l_var, m.l_var}, {r.C1, m.C1}, {r.C2, m.C2}}) {
        const double d = std::abs(got - want);
        t.check(d < 1e-8, d, "second moments vs dense" + tag);
      }
    }
  }
  return t;
}

inline Tally conservation(const PhysicalConstants& pc) {
  Tally t;
  const ShellSpec shell(141, 1);
  const CoupledState cs = to_coupled(build_product_state(CoherentParams::planar(shell, 0.4)));
  const auto r0 = observables(to_product(cs));
  for (double frac : {0.1, 1.0}) {
    EvolutionSpec free{shell, TimeSpec::precession_periods(frac)};
    free.include_perturbation = false;
    const auto rf = observables(to_product(evolve(cs, free, pc)));
    const auto rp = observables(to_product(evolve(cs, {shell, TimeSpec::precession_periods(frac)}, pc)));
    for (std::size_t k = 0; k < 3; ++k) {
      const double d = std::max(std::abs(rf.A_vec[k] - r0.A_vec[k]), std::abs(rf.L_vec[k] - r0.L_vec[k]));
      t.check(d < 1e-10 * shell.n, d, "E0-only evolution moved <A> or <L>");
    }
    t.check(std::abs(rp.L_vec[2] - r0.L_vec[2]) < 1e-10 * shell.n, std::abs(rp.L_vec[2] - r0.L_vec[2]),
            "<L3> not conserved");
    t.check(std::abs(rp.l_var - r0.l_var) < 1e-10 * shell.n, std::abs(rp.l_var - r0.l_var), "(dL3)^2 not conserved");
    t.check(std::abs(rp.norm - 1.0) < 1e-12, std::abs(rp.norm - 1.0), "norm drift");
  }
  return t;
}

inline Tally identities(const PhysicalConstants& pc) {
  Tally t;
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> pick_n(2, 400), pick_z(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const ShellSpec s(pick_n(rng), pick_z(rng));
    const double l_eff = 0.5 + (s.n - 0.5) * unit(rng);
    const double ratio = t_precession_au(s, l_eff, pc) / t_classical_au(s);
    const double want = 2.0 * l_eff * l_eff / (s.Z * s.Z * pc.alpha * pc.alpha);
    t.check(rel_close(ratio, want, 1e-12), quoted_relative(ratio, want), "Tp/Tcl identity");
    const double cycle = precession_rate_sr(s.Z, l_eff, pc) * ratio;
    t.check(rel_close(cycle, 2.0 * std::numbers::pi, 1e-12), quoted_relative(cycle, 2.0 * std::numbers::pi),
            "delta_omega * Tp/Tcl != 2 pi");
    // Kepler form with G M m -> Z e^2/(4 pi eps0) and L -> l_eff hbar.
    const double kepler =
        precession_rate_classical_gravity(coulomb_strength_si(s.Z, pc), l_eff * pc.hbar_si, pc);
    const double sr = precession_rate_sr(s.Z, l_eff, pc);
    t.check(rel_close(kepler, sr, 1e-12), quoted_relative(kepler, sr), "Kepler form != atomic form");
  }
  return t;
}

inline Tally regressions(const PhysicalConstants& pc) {
  Tally t;
  const ShellSpec shell(141, 1);
  auto quote = [&](double got, double want, double tol, const std::string& what) {
    const double d = quoted_relative(got, want);
    t.check(d <= tol, d, what + " = " + fmt(got) + ", expected " + fmt(want));
  };
  quote(t_classical(shell, pc), 4.25e-10, 0.005, "T_cl(141)");
  for (auto [eta, tp] : {std::pair{0.2, 0.266}, {0.4, 0.164}}) {
    const CoupledState cs = to_coupled(build_product_state(CoherentParams::planar(shell, eta)));
    const double l_eff = effective_l(cs);
    quote(t_precession(shell, l_eff, pc), tp, 0.01, "T_p(eta=" + fmt(eta) + ")");
    if (eta == 0.2) quote(t_precession_au(shell, l_eff, pc) / t_classical_au(shell), 6.26e8, 0.01, "T_p/T_cl");
  }
  for (auto [eta, eps] : {std::pair{0.2, 0.385}, {0.3, 0.550}, {0.4, 0.690}}) {
    const double got = eccentricity_of_eta(eta);
    t.check(std::abs(got - eps) <= 0.001, std::abs(got - eps), "eps(" + fmt(eta) + ") = " + fmt(got));
  }
  quote(kDefaultExtentAu * pc.bohr_radius_si, 4.23e-6, 0.005, "field of view");
  return t;
}

inline Tally precession(const PhysicalConstants& pc) {
  Tally t;
  const ShellSpec shell(141, 1);
  TraceOptions opt;
  opt.constants = pc;
  const auto tr = trace_precession(CoherentParams::planar(shell, 0.2), TimeSpec::precession_periods(0.25), 26, opt);
  t.check(tr.relative_error < 0.01, tr.relative_error, "fitted rate off by " + fmt(tr.relative_error));
  const double quarter = std::abs(tr.samples.back().theta);
  const double d = quoted_relative(quarter, 0.5 * std::numbers::pi);
  t.check(d <= 0.02, d, "|theta(Tp/4)| = " + fmt(quarter));
  t.check(tr.fit_rms < 0.01, tr.fit_rms, "fit residual " + fmt(tr.fit_rms));
  t.check(std::abs(tr.samples.front().fidelity - 1.0) < 1e-10, std::abs(tr.samples.front().fidelity - 1.0),
          "fidelity(0) != 1");
  const auto wide = trace_precession(CoherentParams::planar(shell, 0.4), TimeSpec::precession_periods(0.25), 26, opt);
  t.check(wide.samples.back().fidelity < tr.samples.back().fidelity, 0.0,
          "fidelity(Tp/4): eta=0.4 " + fmt(wide.samples.back().fidelity) + " not below eta=0.2 " +
              fmt(tr.samples.back().fidelity));
  return t;
}

inline Tally dephasing() {
  Tally t;
  const double eps = 0.1;
  const double lead = 0.5 * std::numbers::pi * eps * eps;
  for (auto b : {EtaBranch::Lower, EtaBranch::Upper}) {
    const double d = std::abs(std::abs(dephasing_phi_eps(eps, b)) - lead);
    t.check(d < 5e-4, d, "|dphi(0.1)| vs pi eps^2/2");
  }
  for (double eta : {0.05, 0.2, 0.4, 0.9, 1.2, 3.0}) {
    const auto b = eta < 1.0 ? EtaBranch::Lower : EtaBranch::Upper;
    const double a = dephasing_phi_eta(eta);
    const double c = dephasing_phi_eps(eccentricity_of_eta(eta), b);
    t.check(rel_close(c, a, 1e-10), quoted_relative(c, a), "dphi(eps(eta)) != dphi(eta)");
  }
  return t;
}

inline Tally alignment(int resolution) {
  Tally t;
  const ShellSpec shell(141, 1);
  const CoupledState cs = to_coupled(build_product_state(CoherentParams::planar(shell, 0.2)));
  for (double frac : {0.0, 0.125, 0.25}) {
    EvolutionSpec spec{shell, TimeSpec::precession_periods(frac)};
    const CoupledState psi = evolve(cs, spec);
    const double t_s = to_atomic_time(spec.time, shell, effective_l(cs)) * kCodata2018.atomic_time_si;
    const DensityGrid g = density_grid(psi, kDefaultExtentAu, resolution, t_s);
    const double d = axis_difference(principal_axis(g), precession_angle(psi));
    t.check(d < 0.02, d, "axis vs <A> at " + fmt(frac) + " Tp differs by " + fmt(d) + " rad");
  }
  return t;
}

}  // namespace verify_detail

/// Runs every check in order, reporting each as it completes.
inline std::vector<CheckResult> run_verify(const VerifyOptions& opt,
                                           const std::function<void(const CheckResult&)>& report = {}) {
  namespace vd = verify_detail;
  const PhysicalConstants pc = kCodata2018.with_alpha_scaled(opt.alpha_scale);
  std::vector<std::pair<std::string, std::function<vd::Tally()>>> checks = {
      {"cg_exact_small_j", [] { return vd::cg_exact_small(); }},
      {"cg_orthonormal_j70", [] { return vd::cg_orthogonality_large(); }},
      {"coherent_expectations", [] { return vd::coherent_expectations(); }},
      {"algebraic_invariants", [] { return vd::algebraic_invariants(); }},
      {"dense_oracle_n21", [&] { return vd::dense_oracle(pc); }},
      {"conservation", [&] { return vd::conservation(pc); }},
      {"period_identities", [&] { return vd::identities(pc); }},
      {"quoted_numbers", [&] { return vd::regressions(pc); }},
      {"precession_n141", [&] { return vd::precession(pc); }},
      {"dephasing_closed_forms", [] { return vd::dephasing(); }},
  };
  if (!opt.quick) {
    checks.emplace_back("grid_alignment_n141", [&] { return vd::alignment(opt.grid_resolution); });
  }

  std::vector<CheckResult> out;
  for (auto& [name, fn] : checks) {
    CheckResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      const vd::Tally t = fn();
      r.pass = t.ok;
      r.detail = t.detail();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace so4
