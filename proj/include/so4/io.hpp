#pragma once

// File formats shared with downstream plotting scripts. Every float is
// written as the shortest decimal that round-trips, so outputs are
// byte-for-byte reproducible.

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

#include "so4/coherent.hpp"
#include "so4/dynamics.hpp"
#include "so4/render.hpp"

namespace so4 {

/// Failure to read or write a file; carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("parse_double: '" + std::string(s) + "' is not a number");
  }
  return v;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v[0], v[1], v[2]}); }

inline nlohmann::json to_json(const ObservableReport& r) {
  return {
      {"L", vec_json(r.L_vec)}, {"A", vec_json(r.A_vec)},   {"M", vec_json(r.M_vec)},
      {"N", vec_json(r.N_vec)}, {"L2", r.L2},               {"A2", r.A2},
      {"l_var", r.l_var},       {"C1", r.C1},               {"C2", r.C2},
      {"eccentricity", r.eccentricity}, {"norm", r.norm},
  };
}

inline nlohmann::json to_json(const SemiclassicalReport& s) {
  return {{"t_cl_seconds", s.t_cl},
          {"t_p_seconds", s.t_p},
          {"t_p_over_t_cl", s.ratio},
          {"delta_omega_rad_per_period", s.delta_omega},
          {"l_eff", s.l_eff}};
}

inline nlohmann::json trace_summary_json(const PrecessionTrace& t) {
  auto nan_to_null = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"fitted_rate", t.fitted_rate},
          {"predicted_rate", t.predicted_rate},
          {"relative_error", nan_to_null(t.relative_error)},
          {"t_p_seconds", t.t_p},
          {"l_eff", t.l_eff},
          {"fit_rms_rad", t.fit_rms},
          {"samples", t.samples.size()},
          {"final_theta_rad", t.samples.empty() ? 0.0 : t.samples.back().theta},
          {"final_fidelity", t.samples.empty() ? 0.0 : t.samples.back().fidelity}};
}

/// Columns l,m,re,im; rows with an exactly zero amplitude are omitted.
inline void write_amplitudes_csv(std::ostream& os, const CoupledState& cs) {
  os << "l,m,re,im\n";
  cs.for_each([&](int l, int m, const cplx& a) {
    if (a == cplx(0.0)) return;
    os << l << ',' << m << ',' << format_double(a.real()) << ',' << format_double(a.imag()) << '\n';
  });
}

inline void write_trace_csv(std::ostream& os, const PrecessionTrace& t) {
  os << "t_seconds,theta_rad,fidelity\n";
  for (const auto& s : t.samples) {
    os << format_double(s.t) << ',' << format_double(s.theta) << ',' << format_double(s.fidelity) << '\n';
  }
}

inline void write_overlay_csv(std::ostream& os, const EllipseOverlay& e) {
  os << "x_au,y_au\n";
  for (const auto& p : e.points) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

/// Header lines key=value in the order extent_au, resolution, time_s, n, Z,
/// eta; then `resolution` rows of comma-separated densities, row 0 at the
/// most negative y.
inline void write_grid(std::ostream& os, const DensityGrid& g) {
  os << "extent_au=" << format_double(g.extent) << '\n'
     << "resolution=" << g.resolution << '\n'
     << "time_s=" << format_double(g.time) << '\n'
     << "n=" << g.shell.n << '\n'
     << "Z=" << g.shell.Z << '\n'
     << "eta=" << format_double(g.eta) << '\n';
  for (int row = 0; row < g.resolution; ++row) {
    for (int col = 0; col < g.resolution; ++col) {
      if (col) os << ',';
      os << format_double(g.at(row, col));
    }
    os << '\n';
  }
}

inline DensityGrid read_grid(std::istream& is) {
  DensityGrid g;
  const char* keys[] = {"extent_au", "resolution", "time_s", "n", "Z", "eta"};
  std::string values[6];
  std::string line;
  for (int k = 0; k < 6; ++k) {
    if (!std::getline(is, line)) throw std::invalid_argument("grid: truncated header");
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq) != keys[k]) {
      throw std::invalid_argument("grid: header line " + std::to_string(k + 1) + " should start with '" + keys[k] + "='");
    }
    values[k] = line.substr(eq + 1);
  }
  g.extent = parse_double(values[0]);
  g.resolution = std::stoi(values[1]);
  g.time = parse_double(values[2]);
  g.shell = ShellSpec(std::stoi(values[3]), std::stoi(values[4]));
  g.eta = parse_double(values[5]);
  g.values.reserve(static_cast<std::size_t>(g.resolution) * g.resolution);
  for (int row = 0; row < g.resolution; ++row) {
    if (!std::getline(is, line)) throw std::invalid_argument("grid: missing row " + std::to_string(row));
    std::size_t start = 0;
    int cols = 0;
    while (start <= line.size()) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      g.values.push_back(parse_double(std::string_view(line).substr(start, end - start)));
      ++cols;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols != g.resolution) throw std::invalid_argument("grid: row " + std::to_string(row) + " has wrong width");
  }
  return g;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  auto out = open_for_write(path);
  writer(out);
  finish_write(out, path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace so4
