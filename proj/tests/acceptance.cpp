// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// SO4_ACCEPT_RES overrides the density grid resolution (default 512).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "so4/dynamics.hpp"
#include "so4/io.hpp"
#include "so4/render.hpp"
#include "so4/testing/dense_oracle.hpp"

using namespace so4;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) pass = false;
    if (!cond || detail.tellp() < 400) detail << (cond ? "" : "[x] ") << what << "; ";
  }
};

std::string g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

CoupledState planar(int n, double eta) {
  return to_coupled(build_product_state(CoherentParams::planar(ShellSpec(n, 1), eta)));
}

const ShellSpec kShell(141, 1);

void c1(Outcome& o) {
  const double t = t_classical(kShell);
  o.require(rel(t, 4.25e-10) <= 0.005, "T_cl = " + g(t) + " s");
}

void c2(Outcome& o) {
  const CoupledState cs = planar(141, 0.2);
  const double l_eff = effective_l(cs);
  const double tp = t_precession(kShell, l_eff);
  const double ratio = t_precession_au(kShell, l_eff) / t_classical_au(kShell);
  o.require(rel(tp, 0.266) <= 0.01, "T_p = " + g(tp) + " s (l_eff " + g(l_eff) + ")");
  o.require(rel(ratio, 6.26e8) <= 0.01, "T_p/T_cl = " + g(ratio));
}

void c3(Outcome& o) {
  const double tp = t_precession(kShell, effective_l(planar(141, 0.4)));
  o.require(rel(tp, 0.164) <= 0.01, "T_p = " + g(tp) + " s");
}

void c4(Outcome& o) {
  for (auto [eta, eps] : {std::pair{0.2, 0.385}, {0.3, 0.550}, {0.4, 0.690}}) {
    const double got = eccentricity_of_eta(eta);
    o.require(std::abs(got - eps) <= 0.001, "eps(" + g(eta) + ") = " + g(got));
  }
}

void c5(Outcome& o) {
  const auto tr = trace_precession(CoherentParams::planar(kShell, 0.2), TimeSpec::precession_periods(0.25), 26);
  o.require(tr.relative_error < 0.01, "rate rel. error " + g(tr.relative_error));
  const double q = std::abs(tr.samples.back().theta);
  o.require(rel(q, 0.5 * std::numbers::pi) <= 0.02, "|theta(T_p/4)| = " + g(q));
}

void c6(Outcome& o) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pick_n(2, 400), pick_z(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PhysicalConstants& pc = kCodata2018;
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ShellSpec s(pick_n(rng), pick_z(rng));
    const double l_eff = 0.5 + (s.n - 0.5) * unit(rng);
    const double ratio = t_precession_au(s, l_eff) / t_classical_au(s);
    w1 = std::max(w1, rel(ratio, 2.0 * l_eff * l_eff / (s.Z * s.Z * pc.alpha * pc.alpha)));
    w2 = std::max(w2, rel(precession_rate_sr(s.Z, l_eff) * ratio, 2.0 * std::numbers::pi));
    const double kepler = precession_rate_classical_gravity(coulomb_strength_si(s.Z), l_eff * pc.hbar_si);
    w3 = std::max(w3, rel(kepler, precession_rate_sr(s.Z, l_eff)));
  }
  o.require(w1 < 1e-12, "T_p/T_cl identity worst " + g(w1));
  o.require(w2 < 1e-12, "delta_omega T_p/T_cl = 2 pi worst " + g(w2));
  o.require(w3 < 1e-12, "Kepler form vs atomic form worst " + g(w3));
}

void c7(Outcome& o) {
  double worst_rt = 0.0, worst_norm = 0.0, worst_c1 = 0.0, worst_c2 = 0.0, worst_cf = 0.0;
  for (int n : {5, 21, 141}) {
    const ShellSpec s(n, 1);
    const double n2 = static_cast<double>(n) * n;
    for (double eta : {0.0, 0.2, 0.4, 1.5}) {
      const ProductState ps = build_product_state(CoherentParams::planar(s, eta));
      const CoupledState cs = to_coupled(ps);
      const ProductState back = to_product(cs);
      for (std::size_t k = 0; k < ps.amplitudes().size(); ++k) {
        worst_rt = std::max(worst_rt, std::abs(ps.amplitudes()[k] - back.amplitudes()[k]));
      }
      const auto r = observables(ps);
      worst_norm = std::max({worst_norm, std::abs(r.norm - 1.0), std::abs(cs.norm2() - 1.0)});
      worst_c1 = std::max(worst_c1, rel(r.C1, n2 - 1.0));
      worst_c2 = std::max(worst_c2, std::abs(r.C2) / n2);
      auto cf = [&](double got, double want) { return want == 0.0 ? std::abs(got) : rel(got, want); };
      worst_cf = std::max({worst_cf, cf(r.L_vec[2], closed_form_l3(s.j(), eta)),
                           cf(r.A_vec[0], closed_form_a1(s.j(), eta)), cf(r.L2, closed_form_l2(s.j(), eta)),
                           cf(r.l_var, l_variance_closed_form(s.j(), eta))});
    }
  }
  o.require(worst_norm < 1e-10, "norm " + g(worst_norm));
  o.require(worst_c1 < 1e-8, "C1 rel " + g(worst_c1));
  o.require(worst_c2 < 1e-8, "C2/n^2 " + g(worst_c2));
  o.require(worst_cf < 1e-8, "closed forms rel " + g(worst_cf));
  o.require(worst_rt < 1e-10, "CG round trip " + g(worst_rt));
}

void c8(Outcome& o) {
  const ShellSpec shell(21, 1);
  const testing::DenseShell dense(shell);
  double worst = 0.0;
  for (double eta : {0.2, 0.4, 1.5}) {
    const auto params = CoherentParams::planar(shell, eta);
    const CoupledState cs = to_coupled(build_product_state(params));
    const auto psi0 = dense.coherent_state(params.zeta1, params.zeta2);
    for (double frac : {0.0, 1.0 / 7.0, 1.0 / 3.0}) {
      const TimeSpec ts = TimeSpec::precession_periods(frac);
      const auto r = observables(to_product(evolve(cs, {shell, ts})));
      const auto m = dense.moments(dense.evolve(psi0, to_atomic_time(ts, shell, effective_l(cs))));
      for (std::size_t k = 0; k < 3; ++k) {
        worst = std::max({worst, std::abs(r.L_vec[k] - m.L[k]), std::abs(r.A_vec[k] - m.A[k])});
      }
      worst = std::max({worst, std::abs(r.L2 - m.L2), std::abs(r.A2 - m.A2), std::abs(r.l_var - m.l_var),
                        std::abs(r.C1 - m.C1), std::abs(r.C2 - m.C2)});
    }
  }
  o.require(worst < 1e-8, "max observable deviation " + g(worst));
}

void c9(Outcome& o, int resolution) {
  const CoupledState cs = planar(141, 0.2);
  const double l_eff = effective_l(cs);
  for (double frac : {0.0, 0.125, 0.25}) {
    const EvolutionSpec spec{kShell, TimeSpec::precession_periods(frac)};
    const CoupledState psi = evolve(cs, spec);
    DensityGrid grid = density_grid(psi, kDefaultExtentAu, resolution,
                                    to_atomic_time(spec.time, kShell, l_eff) * kCodata2018.atomic_time_si);
    grid.eta = 0.2;
    const double d = axis_difference(principal_axis(grid), precession_angle(psi));
    o.require(d < 0.02, "axis - <A> at " + g(frac) + " T_p: " + g(d) + " rad");
    if (frac == 0.0) {
      std::stringstream file;
      write_grid(file, grid);
      std::string first;
      std::getline(file, first);
      const double extent = parse_double(first.substr(first.find('=') + 1));
      const double fov = extent * kCodata2018.bohr_radius_si;
      o.require(rel(fov, 4.23e-6) <= 0.005, "header field of view " + g(fov * 1e6) + " um");
    }
  }
  o.require(true, "resolution " + std::to_string(resolution));
}

void c10(Outcome& o) {
  const TimeSpec quarter = TimeSpec::precession_periods(0.25);
  const double f2 = trace_precession(CoherentParams::planar(kShell, 0.2), quarter, 26).samples.back().fidelity;
  const double f4 = trace_precession(CoherentParams::planar(kShell, 0.4), quarter, 26).samples.back().fidelity;
  o.require(f4 < f2, "fidelity(T_p/4): eta=0.4 " + g(f4) + " vs eta=0.2 " + g(f2));
  const double lead = 0.5 * std::numbers::pi * 0.01;
  for (auto b : {EtaBranch::Lower, EtaBranch::Upper}) {
    const double d = std::abs(std::abs(dephasing_phi_eps(0.1, b)) - lead);
    o.require(d < 5e-4, std::string(b == EtaBranch::Lower ? "lower" : "upper") + " |dphi(0.1)| - pi eps^2/2 = " + g(d));
  }
}

}  // namespace

int main() {
  int resolution = kDefaultResolution;
  if (const char* env = std::getenv("SO4_ACCEPT_RES")) resolution = std::atoi(env);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"classical period n=141", c1},
      {"precession period eta=0.2 and ratio", c2},
      {"precession period eta=0.4", c3},
      {"eccentricities of the snapshot states", c4},
      {"measured precession rate and quarter-period angle", c5},
      {"period and rate identities", c6},
      {"algebraic invariants", c7},
      {"dense n=21 oracle equivalence", c8},
      {"density axis alignment and field of view", [&](Outcome& o) { c9(o, resolution); }},
      {"dephasing ordering and small-eccentricity limit", c10},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu  %-50s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}
