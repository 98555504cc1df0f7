#pragma once

// Time evolution of a single shell under E0 + E1(l), and the precession
// diagnostics built on it.

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "so4/coherent.hpp"
#include "so4/double_double.hpp"
#include "so4/errors.hpp"
#include "so4/hydrogenic.hpp"
#include "so4/parallel.hpp"

namespace so4 {

enum class TimeUnit { Seconds, ClassicalPeriods, PrecessionPeriods };

struct TimeSpec {
  double value = 0.0;
  TimeUnit unit = TimeUnit::Seconds;

  static TimeSpec seconds(double v) { return {v, TimeUnit::Seconds}; }
  static TimeSpec classical_periods(double v) { return {v, TimeUnit::ClassicalPeriods}; }
  static TimeSpec precession_periods(double v) { return {v, TimeUnit::PrecessionPeriods}; }

  /// Parses "0.25Tp", "3Tcl", "1e-10s". The unit suffix is mandatory.
  static TimeSpec parse(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) throw DomainError("time '" + std::string(text) + "': no leading number");
    const std::string_view suffix(ptr, static_cast<std::size_t>(last - ptr));
    TimeSpec t;
    t.value = v;
    if (suffix == "s") {
      t.unit = TimeUnit::Seconds;
    } else if (suffix == "Tcl") {
      t.unit = TimeUnit::ClassicalPeriods;
    } else if (suffix == "Tp") {
      t.unit = TimeUnit::PrecessionPeriods;
    } else {
      throw DomainError("time '" + std::string(text) + "': unit must be one of s, Tcl, Tp");
    }
    if (!(v >= 0.0)) throw DomainError("time '" + std::string(text) + "': must be >= 0");
    return t;
  }

  [[nodiscard]] std::string str() const {
    std::string s = std::to_string(value);
    switch (unit) {
      case TimeUnit::Seconds: return s + "s";
      case TimeUnit::ClassicalPeriods: return s + "Tcl";
      case TimeUnit::PrecessionPeriods: return s + "Tp";
    }
    return s;
  }
};

/// Converts to atomic time units; l_eff is only consulted for Tp multiples.
inline double to_atomic_time(const TimeSpec& t, const ShellSpec& shell, double l_eff,
                             const PhysicalConstants& pc = kCodata2018) {
  switch (t.unit) {
    case TimeUnit::Seconds: return t.value / pc.atomic_time_si;
    case TimeUnit::ClassicalPeriods: return t.value * t_classical_au(shell);
    case TimeUnit::PrecessionPeriods: return t.value * t_precession_au(shell, l_eff, pc);
  }
  return 0.0;
}

struct EvolutionSpec {
  ShellSpec shell;
  TimeSpec time;
  bool drop_global_phase = true;
  LEffConvention l_eff_convention = LEffConvention::AbsL3;
  bool include_perturbation = true;  // false: E0 only, nothing should move
};

/// Per-l phases for time t_au (atomic units):
/// phase_l = -(E1(l) - E1(l_ref)) t, plus -(E0 + E1(l_ref)) t when the global
/// phase is kept. Differences and the 2 pi reduction are done in
/// double-double.
inline std::vector<double> shell_phases(const ShellSpec& shell, double t_au, int l_ref, bool drop_global_phase,
                                        const PhysicalConstants& pc = kCodata2018, bool include_e1 = true) {
  const int n = shell.n;
  const double z2 = static_cast<double>(shell.Z) * shell.Z;
  // E1(l) - E1(l_ref) = pre (l - l_ref) / ((l + 1/2)(l_ref + 1/2))
  const DoubleDouble alpha2 = DoubleDouble(pc.alpha) * DoubleDouble(pc.alpha);
  const DoubleDouble pre = (DoubleDouble(z2 * z2) * alpha2) / DoubleDouble(2.0 * n * static_cast<double>(n) * n);
  const DoubleDouble t(t_au);
  std::vector<double> phases(static_cast<std::size_t>(n));
  DoubleDouble global(0.0);
  if (!drop_global_phase) {
    const DoubleDouble e0 = -DoubleDouble(z2) / DoubleDouble(2.0 * n * static_cast<double>(n));
    const DoubleDouble e1_ref =
        include_e1 ? -pre * (DoubleDouble(1.0) / DoubleDouble(l_ref + 0.5) - DoubleDouble(3.0) / DoubleDouble(4.0 * n))
                   : DoubleDouble(0.0);
    global = -(e0 + e1_ref) * t;
  }
  for (int l = 0; l < n; ++l) {
    DoubleDouble delta(0.0);
    if (include_e1) {
      delta = pre * DoubleDouble(static_cast<double>(l - l_ref)) /
              (DoubleDouble(l + 0.5) * DoubleDouble(l_ref + 0.5));
    }
    phases[static_cast<std::size_t>(l)] = reduce_two_pi(global - delta * t);
  }
  return phases;
}

/// exp(-i E(l) t) applied to every |l m> amplitude.
inline CoupledState evolve(const CoupledState& state, const EvolutionSpec& spec,
                           const PhysicalConstants& pc = kCodata2018) {
  if (!(state.shell() == spec.shell)) throw ContractError("evolve: state shell differs from evolution shell");
  const double l3 = std::abs(l3_coupled(state));
  const double t_au = to_atomic_time(spec.time, spec.shell, effective_l(state, spec.l_eff_convention), pc);
  const int l_ref = std::clamp(static_cast<int>(std::lround(l3)), 0, spec.shell.n - 1);
  const auto phases = shell_phases(spec.shell, t_au, l_ref, spec.drop_global_phase, pc, spec.include_perturbation);
  CoupledState out = state;
  for (int l = 0; l < spec.shell.n; ++l) {
    const cplx f = std::polar(1.0, phases[static_cast<std::size_t>(l)]);
    for (int m = -l; m <= l; ++m) out.at(l, m) *= f;
  }
  return out;
}

/// Rigid rotation about z: |l m> -> e^{-i m theta} |l m>.
inline CoupledState rotate_about_z(const CoupledState& state, double theta) {
  CoupledState out = state;
  const int n = state.shell().n;
  for (int m = -(n - 1); m <= n - 1; ++m) {
    const cplx f = std::polar(1.0, -m * theta);
    for (int l = std::abs(m); l < n; ++l) out.at(l, m) *= f;
  }
  return out;
}

inline cplx inner_product(const CoupledState& a, const CoupledState& b) {
  cplx s = 0.0;
  const auto& x = a.amplitudes();
  const auto& y = b.amplitudes();
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

/// Azimuth of <A> in the x-y plane.
inline double precession_angle(const CoupledState& state) {
  const ObservableReport r = observables(to_product(state));
  const double in_plane = std::hypot(r.A_vec[0], r.A_vec[1]);
  if (in_plane <= 1e-6 * state.shell().n) {
    throw UndefinedOrientation("precession_angle: <A> vanishes in the orbital plane (circular state)");
  }
  return std::atan2(r.A_vec[1], r.A_vec[0]);
}

struct PrecessionSample {
  double t = 0.0;      // s
  double theta = 0.0;  // rad, unwrapped
  double fidelity = 0.0;
};

struct PrecessionTrace {
  std::vector<PrecessionSample> samples;
  double fitted_rate = 0.0;     // rad/s, signed
  double predicted_rate = 0.0;  // 2 pi / T_p, rad/s
  double relative_error = 0.0;  // | |fitted| - predicted | / predicted
  double t_p = 0.0;             // s
  double l_eff = 0.0;
  double fit_rms = 0.0;         // rad
};

struct TraceOptions {
  double truncation = kDefaultTruncation;
  LEffConvention l_eff_convention = LEffConvention::AbsL3;
  PhysicalConstants constants = kCodata2018;
};

/// Ordinary least squares slope and RMS residual of y against x.
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (my + slope * (x[i] - mx));
    rss += r * r;
  }
  return {slope, std::sqrt(rss / static_cast<double>(n))};
}

/// Samples theta(t) and the fidelity against the rigidly rotated initial
/// state on an even grid over [0, t_max], then fits the precession rate.
inline PrecessionTrace trace_precession(const CoherentParams& params, const TimeSpec& t_max, int n_samples,
                                        const TraceOptions& opt = {}) {
  if (n_samples < 1) throw DomainError("trace_precession: need at least one sample");
  const CoupledState psi0 = to_coupled(build_product_state(params, opt.truncation));
  const ShellSpec& shell = params.shell;
  PrecessionTrace out;
  out.l_eff = effective_l(psi0, opt.l_eff_convention);
  if (!(out.l_eff > 0.0)) throw UndefinedOrientation("trace_precession: <L> vanishes, precession period undefined");
  out.t_p = t_precession(shell, out.l_eff, opt.constants);
  out.predicted_rate = 2.0 * std::numbers::pi / out.t_p;

  const double theta0 = precession_angle(psi0);
  const double t_max_au = to_atomic_time(t_max, shell, out.l_eff, opt.constants);
  if (t_max_au == 0.0) n_samples = 1;
  if (n_samples > 1 && n_samples < 3) throw DomainError("trace_precession: need at least 3 samples");
  const double t_p_au = t_precession_au(shell, out.l_eff, opt.constants);
  if (n_samples > 1 && n_samples < 4.0 * (t_max_au / t_p_au) + 2.0) {
    throw DomainError("trace_precession: too few samples to unwrap the angle (need >= 4 t_max/T_p + 2)");
  }

  out.samples.resize(static_cast<std::size_t>(n_samples));
  parallel_for(out.samples.size(), [&](std::size_t k) {
    const double t_au = n_samples == 1 ? 0.0 : t_max_au * static_cast<double>(k) / (n_samples - 1);
    EvolutionSpec spec{shell, TimeSpec::seconds(t_au * opt.constants.atomic_time_si), true, opt.l_eff_convention, true};
    const CoupledState psi = evolve(psi0, spec, opt.constants);
    const double theta = precession_angle(psi) - theta0;
    const double fid = std::norm(inner_product(rotate_about_z(psi0, theta), psi));
    out.samples[k] = {t_au * opt.constants.atomic_time_si, theta, fid};
  });

  // Unwrap against the previous sample.
  for (std::size_t k = 1; k < out.samples.size(); ++k) {
    double d = out.samples[k].theta - out.samples[k - 1].theta;
    d = std::remainder(d, 2.0 * std::numbers::pi);
    out.samples[k].theta = out.samples[k - 1].theta + d;
  }
  out.samples[0].theta = 0.0;

  if (out.samples.size() >= 2) {
    std::vector<double> t, th;
    for (const auto& s : out.samples) {
      t.push_back(s.t);
      th.push_back(s.theta);
    }
    const auto [slope, rms] = fit_line(t, th);
    out.fitted_rate = slope;
    out.fit_rms = rms;
    out.relative_error = std::abs(std::abs(slope) - out.predicted_rate) / out.predicted_rate;
  } else {
    out.fitted_rate = 0.0;
    out.relative_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace so4
