// so4sim: build, evolve and render SO(4) coherent states of a hydrogen shell.
//
// Exit codes: 0 ok, 2 bad configuration, 3 verification failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "so4/coherent.hpp"
#include "so4/dynamics.hpp"
#include "so4/io.hpp"
#include "so4/render.hpp"
#include "so4/scenario.hpp"
#include "so4/verify.hpp"

namespace {

using namespace so4;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitIo = 4;

struct RawFlags {
  double eta = 0.0;
  std::string zeta1, zeta2;
  std::string time = "0s";
  std::string t_max = "0.25Tp";
  std::string l_eff = "abs_l3";
  // One entry per subcommand; only the parsed subcommand's options count.
  std::vector<CLI::Option*> eta_opts, zeta1_opts, zeta2_opts;

  static bool given(const std::vector<CLI::Option*>& opts) {
    for (const auto* o : opts) {
      if (o->count()) return true;
    }
    return false;
  }
};

void add_shell_flags(CLI::App* cmd, ScenarioConfig& cfg) {
  cmd->add_option("--n", cfg.n, "principal quantum number")->capture_default_str();
  cmd->add_option("--Z", cfg.Z, "nuclear charge")->capture_default_str();
  cmd->add_option("--alpha-scale", cfg.alpha_scale, "multiply the fine-structure constant")->capture_default_str();
}

void add_state_flags(CLI::App* cmd, ScenarioConfig& cfg, RawFlags& raw) {
  add_shell_flags(cmd, cfg);
  raw.eta_opts.push_back(cmd->add_option("--eta", raw.eta, "planar family parameter (zeta1 = eta, zeta2 = -eta)"));
  raw.zeta1_opts.push_back(cmd->add_option("--zeta1", raw.zeta1, "first SO(3) label, 're' or 're,im'"));
  raw.zeta2_opts.push_back(cmd->add_option("--zeta2", raw.zeta2, "second SO(3) label, 're' or 're,im'"));
  cmd->add_option("--truncation", cfg.truncation, "drop product amplitudes below this fraction of the peak")
      ->capture_default_str();
  cmd->add_option("--l-eff", raw.l_eff, "abs_l3 | abs_l3_plus_half | root_l2 | mean_l_plus_half")
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, ScenarioConfig& cfg) {
  cmd->add_option("--outdir", cfg.outdir, "output directory")->envname("SO4SIM_OUTDIR")->capture_default_str();
  cmd->add_option("--out", cfg.out, "primary output file (default: inside --outdir)");
}

void resolve(ScenarioConfig& cfg, const RawFlags& raw) {
  if (RawFlags::given(raw.eta_opts)) cfg.eta = raw.eta;
  if (RawFlags::given(raw.zeta1_opts)) cfg.zeta1 = parse_complex(raw.zeta1);
  if (RawFlags::given(raw.zeta2_opts)) cfg.zeta2 = parse_complex(raw.zeta2);
  try {
    cfg.time = TimeSpec::parse(raw.time);
    cfg.t_max = TimeSpec::parse(raw.t_max);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  cfg.l_eff_convention = parse_l_eff_convention(raw.l_eff);
  cfg.validate_truncation();
  (void)cfg.constants();
  (void)cfg.shell();
}

void ensure_outdir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string primary_path(const ScenarioConfig& cfg, const std::string& fallback) {
  return cfg.out.empty() ? cfg.path(fallback) : cfg.out;
}

std::string sibling(const std::string& path, const std::string& new_ext) {
  return std::filesystem::path(path).replace_extension(new_ext).string();
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Sense of rotation for the classical overlay: perihelion advance follows the
// orbital circulation, whose sign is that of <L3>.
double overlay_angle(const CoupledState& psi0, double t_au, const ShellSpec& shell, double l_eff,
                     const PhysicalConstants& pc) {
  const double l3 = l3_coupled(psi0);
  const double sense = l3 < 0.0 ? -1.0 : 1.0;
  const double theta0 = precession_angle(psi0);
  return theta0 + sense * 2.0 * std::numbers::pi * t_au / t_precession_au(shell, l_eff, pc);
}

int cmd_state(const ScenarioConfig& cfg) {
  const CoherentParams params = cfg.params();
  const PhysicalConstants pc = cfg.constants();
  const ProductState ps = build_product_state(params, cfg.truncation);
  const CoupledState cs = to_coupled(ps);
  const ObservableReport obs = observables(ps);
  const double l_eff = effective_l(cs, cfg.l_eff_convention);

  json out;
  out["config"] = to_json(cfg);
  out["observables"] = to_json(obs);
  out["eccentricity"] = obs.eccentricity;
  out["t_cl_seconds"] = t_classical(params.shell, pc);
  if (l_eff > 0.0) {
    const auto rep = semiclassical_report(params.shell, l_eff, pc);
    out["semiclassical"] = to_json(rep);
    out["t_p_seconds"] = rep.t_p;
    out["delta_omega_rad_per_period"] = rep.delta_omega;
  } else {
    out["semiclassical"] = nullptr;
    out["t_p_seconds"] = nullptr;
    out["delta_omega_rad_per_period"] = nullptr;
  }
  out["l_eff"] = l_eff;
  out["delta_phi"] = nullptr;
  if (params.eta && !params.degenerate()) out["delta_phi"] = dephasing_phi_eta(*params.eta);

  ensure_outdir(cfg.outdir);
  const std::string path = primary_path(cfg, "state.json");
  write_json_file(path, out);
  if (!cfg.amplitudes.empty()) {
    write_file(cfg.amplitudes, [&](std::ostream& os) { write_amplitudes_csv(os, cs); });
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_evolve(const ScenarioConfig& cfg) {
  const CoherentParams params = cfg.params();
  TraceOptions opt;
  opt.truncation = cfg.truncation;
  opt.l_eff_convention = cfg.l_eff_convention;
  opt.constants = cfg.constants();
  const PrecessionTrace tr = trace_precession(params, cfg.t_max, cfg.samples, opt);

  ensure_outdir(cfg.outdir);
  const std::string csv = primary_path(cfg, "trace.csv");
  write_file(csv, [&](std::ostream& os) { write_trace_csv(os, tr); });
  json out = trace_summary_json(tr);
  out["config"] = to_json(cfg);
  out["trace_csv"] = csv;
  write_json_file(sibling(csv, ".json"), out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct RenderedFrame {
  DensityGrid grid;
  EllipseOverlay overlay;
  json summary;
};

RenderedFrame render_frame(const CoherentParams& params, const CoupledState& psi0, const TimeSpec& when,
                           const ScenarioConfig& cfg) {
  const PhysicalConstants pc = cfg.constants();
  const ShellSpec& shell = params.shell;
  const double l_eff = effective_l(psi0, cfg.l_eff_convention);
  const bool needs_tp = when.unit == TimeUnit::PrecessionPeriods;
  if (needs_tp && !(l_eff > 0.0)) throw ConfigError("time in Tp needs a state with nonzero <L3>");
  const double t_au = to_atomic_time(when, shell, needs_tp ? l_eff : 1.0, pc);
  EvolutionSpec spec{shell, TimeSpec::seconds(t_au * pc.atomic_time_si), true, cfg.l_eff_convention, true};
  const CoupledState psi = evolve(psi0, spec, pc);

  RenderedFrame f;
  f.grid = density_grid(psi, cfg.extent, cfg.resolution, t_au * pc.atomic_time_si);
  if (params.eta) f.grid.eta = *params.eta;

  const ObservableReport obs = observables(to_product(psi));
  json s;
  s["time_s"] = f.grid.time;
  s["field_of_view_um"] = cfg.extent * pc.bohr_radius_si * 1e6;
  s["eccentricity"] = obs.eccentricity;
  double axis = std::numeric_limits<double>::quiet_NaN();
  double angle = std::numeric_limits<double>::quiet_NaN();
  try {
    axis = principal_axis(f.grid);
  } catch (const UndefinedOrientation&) {
  }
  try {
    angle = precession_angle(psi);
  } catch (const UndefinedOrientation&) {
  }
  s["principal_axis_rad"] = nullable(axis);
  s["precession_angle_rad"] = nullable(angle);
  s["axis_difference_rad"] = nullable(std::isfinite(axis + angle) ? axis_difference(axis, angle) : angle);

  if (obs.eccentricity < 1.0 && l_eff > 0.0 && std::isfinite(angle)) {
    const double rot = overlay_angle(psi0, t_au, shell, l_eff, pc);
    f.overlay = classical_overlay(shell, obs.eccentricity, rot, 360);
    s["overlay_rotation_rad"] = rot;
  } else {
    s["overlay_rotation_rad"] = nullptr;
  }
  f.summary = s;
  return f;
}

void write_frame(const RenderedFrame& f, const std::string& grid_path, const std::string& overlay_path) {
  write_file(grid_path, [&](std::ostream& os) { write_grid(os, f.grid); });
  if (!f.overlay.points.empty()) {
    write_file(overlay_path, [&](std::ostream& os) { write_overlay_csv(os, f.overlay); });
  }
}

int cmd_density(const ScenarioConfig& cfg) {
  cfg.validate_grid();
  const CoherentParams params = cfg.params();
  const CoupledState psi0 = to_coupled(build_product_state(params, cfg.truncation));
  RenderedFrame f = render_frame(params, psi0, cfg.time, cfg);

  ensure_outdir(cfg.outdir);
  const std::string grid = primary_path(cfg, "density.grid");
  const std::string overlay = sibling(grid, ".overlay.csv");
  write_frame(f, grid, overlay);
  json out = f.summary;
  out["config"] = to_json(cfg);
  out["grid"] = grid;
  out["overlay"] = f.overlay.points.empty() ? json(nullptr) : json(overlay);
  write_json_file(sibling(grid, ".json"), out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_figures(ScenarioConfig cfg) {
  cfg.validate_grid();
  ensure_outdir(cfg.outdir);
  json index;
  index["config"] = to_json(cfg);

  write_file(cfg.path("fig1.csv"), [](std::ostream& os) {
    os << "eta,eps\n";
    for (int k = 0; k <= 500; ++k) {
      const double eta = k / 100.0;
      os << format_double(eta) << ',' << format_double(eccentricity_of_eta(eta)) << '\n';
    }
  });
  write_file(cfg.path("fig2.csv"), [](std::ostream& os) {
    os << "eps,abs_dphi_lower,abs_dphi_upper\n";
    for (int k = 0; k <= 99; ++k) {
      const double eps = k / 100.0;
      const double lo = std::abs(dephasing_phi_eps(eps, EtaBranch::Lower));
      const double hi = eps == 0.0 ? 0.0 : std::abs(dephasing_phi_eps(eps, EtaBranch::Upper));
      os << format_double(eps) << ',' << format_double(lo) << ',' << format_double(hi) << '\n';
    }
  });
  index["fig1"] = cfg.path("fig1.csv");
  index["fig2"] = cfg.path("fig2.csv");

  json frames = json::array();
  for (double eta : {0.2, 0.3, 0.4}) {
    const CoherentParams params = CoherentParams::planar(ShellSpec(cfg.n, cfg.Z), eta);
    const CoupledState psi0 = to_coupled(build_product_state(params, cfg.truncation));
    for (auto [frac, tag] : {std::pair{0.0, "t0"}, {0.25, "tquarter"}}) {
      const RenderedFrame f = render_frame(params, psi0, TimeSpec::precession_periods(frac), cfg);
      const std::string stem = "fig3_eta" + format_double(eta) + "_" + tag;
      write_frame(f, cfg.path(stem + ".grid"), cfg.path(stem + "_overlay.csv"));
      json e = f.summary;
      e["eta"] = eta;
      e["t_over_tp"] = frac;
      e["grid"] = cfg.path(stem + ".grid");
      e["overlay"] = cfg.path(stem + "_overlay.csv");
      frames.push_back(e);
    }
  }
  index["fig3"] = frames;
  write_json_file(cfg.path("figures.json"), index);
  std::cout << index.dump(2) << '\n';
  return 0;
}

int cmd_verify(const ScenarioConfig& cfg, bool quick) {
  VerifyOptions opt;
  opt.quick = quick;
  opt.alpha_scale = cfg.alpha_scale;
  opt.grid_resolution = cfg.resolution;
  (void)cfg.constants();
  const auto results = run_verify(opt, [](const CheckResult& r) {
    std::printf("%s  %-24s %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  int failed = 0;
  json rep = json::array();
  for (const auto& r : results) {
    failed += r.pass ? 0 : 1;
    rep.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failed, results.size());
  if (!cfg.out.empty()) {
    json out;
    out["config"] = to_json(cfg);
    out["quick"] = quick;
    out["checks"] = rep;
    write_json_file(cfg.out, out);
  }
  return failed ? kExitVerify : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SO(4) coherent states of a hydrogen shell: observables, precession, densities"};
  app.require_subcommand(1);

  ScenarioConfig cfg;
  RawFlags raw;
  bool quick = false;

  auto* state = app.add_subcommand("state", "build a state and report observables and time scales");
  add_state_flags(state, cfg, raw);
  add_output_flags(state, cfg);
  state->add_option("--amplitudes", cfg.amplitudes, "also write coupled amplitudes to this CSV");

  auto* evolve = app.add_subcommand("evolve", "trace the precession angle and fidelity over time");
  add_state_flags(evolve, cfg, raw);
  add_output_flags(evolve, cfg);
  evolve->add_option("--t-max", raw.t_max, "end of the time grid, e.g. 0.25Tp, 3Tcl, 1e-3s")->capture_default_str();
  evolve->add_option("--samples", cfg.samples, "number of evenly spaced samples")->capture_default_str();

  auto* density = app.add_subcommand("density", "orbital-plane density grid at one time");
  add_state_flags(density, cfg, raw);
  add_output_flags(density, cfg);
  density->add_option("--time", raw.time, "evolution time, e.g. 0.25Tp")->capture_default_str();
  density->add_option("--extent", cfg.extent, "full grid width in bohr")->capture_default_str();
  density->add_option("--res", cfg.resolution, "pixels per side")->capture_default_str();

  auto* figures = app.add_subcommand("figures", "write the eccentricity, test-phase and snapshot data sets");
  add_shell_flags(figures, cfg);
  figures->add_option("--outdir", cfg.outdir, "output directory")->envname("SO4SIM_OUTDIR")->capture_default_str();
  figures->add_option("--extent", cfg.extent, "full grid width in bohr")->capture_default_str();
  figures->add_option("--res", cfg.resolution, "pixels per side")->capture_default_str();
  figures->add_option("--truncation", cfg.truncation, "product amplitude cutoff")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the built-in self-checks");
  verify->add_flag("--quick", quick, "skip the n = 141 density grids");
  verify->add_option("--alpha-scale", cfg.alpha_scale, "multiply the fine-structure constant")->capture_default_str();
  int verify_res = 128;
  verify->add_option("--res", verify_res, "grid resolution for alignment checks")->capture_default_str();
  verify->add_option("--out", cfg.out, "also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*verify) {
      cfg.resolution = verify_res;
      return cmd_verify(cfg, quick);
    }
    resolve(cfg, raw);
    if (*state) return cmd_state(cfg);
    if (*evolve) return cmd_evolve(cfg);
    if (*density) return cmd_density(cfg);
    if (*figures) return cmd_figures(cfg);
  } catch (const IoError& e) {
    std::cerr << "so4sim: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "so4sim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "so4sim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UndefinedOrientation& e) {
    std::cerr << "so4sim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "so4sim: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
