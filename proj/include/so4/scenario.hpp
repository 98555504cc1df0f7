#pragma once

// Resolved command-line scenario, validated once and echoed into every JSON
// output.

#include <complex>
#include <optional>
#include <string>

#include <json.hpp>

#include "so4/coherent.hpp"
#include "so4/dynamics.hpp"
#include "so4/errors.hpp"
#include "so4/hydrogenic.hpp"
#include "so4/render.hpp"

namespace so4 {

/// Invalid combination or value of scenario settings (exit code 2 in the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "re" or "re,im".
inline std::complex<double> parse_complex(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      const double re = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return {re, 0.0};
    }
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument("trailing characters");
    const double im = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument("trailing characters");
    return {re, im};
  } catch (const std::exception&) {
    throw ConfigError("complex value '" + text + "' must be 're' or 're,im'");
  }
}

inline LEffConvention parse_l_eff_convention(const std::string& s) {
  for (auto c : {LEffConvention::AbsL3, LEffConvention::AbsL3PlusHalf, LEffConvention::RootL2,
                 LEffConvention::MeanLPlusHalf}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown l_eff convention '" + s + "'");
}

struct ScenarioConfig {
  int n = 141;
  int Z = 1;
  std::optional<double> eta;
  std::optional<std::complex<double>> zeta1;
  std::optional<std::complex<double>> zeta2;
  TimeSpec time = TimeSpec::seconds(0.0);
  TimeSpec t_max = TimeSpec::precession_periods(0.25);
  int samples = 26;
  double extent = kDefaultExtentAu;
  int resolution = kDefaultResolution;
  double truncation = kDefaultTruncation;
  LEffConvention l_eff_convention = LEffConvention::AbsL3;
  double alpha_scale = 1.0;
  std::string outdir = ".";
  std::string out;         // primary output file, command-specific default when empty
  std::string amplitudes;  // optional coupled-amplitude CSV

  [[nodiscard]] ShellSpec shell() const {
    try {
      return ShellSpec(n, Z);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }

  [[nodiscard]] PhysicalConstants constants() const {
    if (!(alpha_scale > 0.0)) throw ConfigError("alpha scale must be positive");
    return kCodata2018.with_alpha_scaled(alpha_scale);
  }

  /// Exactly one of eta or the (zeta1, zeta2) pair.
  [[nodiscard]] CoherentParams params() const {
    const bool has_zeta = zeta1.has_value() || zeta2.has_value();
    if (eta && has_zeta) throw ConfigError("give either --eta or --zeta1/--zeta2, not both");
    if (!eta && !has_zeta) throw ConfigError("a state needs --eta or --zeta1 and --zeta2");
    if (has_zeta && !(zeta1 && zeta2)) throw ConfigError("--zeta1 and --zeta2 must be given together");
    if (eta) {
      if (!(*eta >= 0.0)) throw ConfigError("--eta must be >= 0");
      return CoherentParams::planar(shell(), *eta);
    }
    return {shell(), *zeta1, *zeta2, std::nullopt};
  }

  void validate_grid() const {
    if (resolution < 16) throw ConfigError("--res must be >= 16");
    if (!(extent > 0.0)) throw ConfigError("--extent must be positive");
  }

  void validate_truncation() const {
    if (!(truncation >= 0.0 && truncation < 1e-6)) throw ConfigError("--truncation must lie in [0, 1e-6)");
  }

  std::string path(const std::string& name) const { return outdir + "/" + name; }
};

inline nlohmann::json time_json(const TimeSpec& t) {
  const char* unit = t.unit == TimeUnit::Seconds ? "s" : t.unit == TimeUnit::ClassicalPeriods ? "Tcl" : "Tp";
  return {{"value", t.value}, {"unit", unit}};
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
  auto cx = [](const std::optional<std::complex<double>>& z) {
    return z ? nlohmann::json::array({z->real(), z->imag()}) : nlohmann::json(nullptr);
  };
  return {{"n", c.n},
          {"Z", c.Z},
          {"eta", c.eta ? nlohmann::json(*c.eta) : nlohmann::json(nullptr)},
          {"zeta1", cx(c.zeta1)},
          {"zeta2", cx(c.zeta2)},
          {"time", time_json(c.time)},
          {"t_max", time_json(c.t_max)},
          {"samples", c.samples},
          {"extent_au", c.extent},
          {"resolution", c.resolution},
          {"truncation", c.truncation},
          {"l_eff_convention", to_string(c.l_eff_convention)},
          {"alpha_scale", c.alpha_scale},
          {"outdir", c.outdir}};
}

}  // namespace so4
