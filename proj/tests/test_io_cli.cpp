#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "so4/io.hpp"
#include "so4/scenario.hpp"

using namespace so4;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" SO4SIM_PATH "' " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
    rows.push_back(row);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("so4sim_test_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("density grids round-trip through the text format") {
  DensityGrid g;
  g.extent = 123.5;
  g.resolution = 4;
  g.time = 0.0665;
  g.shell = ShellSpec(21, 2);
  g.eta = 0.3;
  for (int k = 0; k < 16; ++k) g.values.push_back(std::exp(-0.37 * k) / 3.0);
  std::stringstream ss;
  write_grid(ss, g);
  const std::string text = ss.str();
  CHECK(text.rfind("extent_au=123.5\nresolution=4\ntime_s=0.0665\nn=21\nZ=2\neta=0.3\n", 0) == 0);
  const DensityGrid back = read_grid(ss);
  CHECK(back.extent == g.extent);
  CHECK(back.resolution == 4);
  CHECK(back.time == g.time);
  CHECK(back.shell == g.shell);
  CHECK(back.eta == g.eta);
  CHECK(back.values == g.values);

  std::stringstream bad_key("extent=1\n");
  CHECK_THROWS_AS(read_grid(bad_key), std::invalid_argument);
  std::stringstream short_header("extent_au=1\nresolution=2\n");
  CHECK_THROWS_AS(read_grid(short_header), std::invalid_argument);
  std::stringstream narrow("extent_au=1\nresolution=2\ntime_s=0\nn=1\nZ=1\neta=nan\n1,2\n3\n");
  CHECK_THROWS_AS(read_grid(narrow), std::invalid_argument);
  std::stringstream missing_row("extent_au=1\nresolution=2\ntime_s=0\nn=1\nZ=1\neta=nan\n1,2\n");
  CHECK_THROWS_AS(read_grid(missing_row), std::invalid_argument);
}

TEST_CASE("csv writers use the documented headers") {
  const CoupledState cs = to_coupled(build_product_state(CoherentParams::planar(ShellSpec(3, 1), 0.2)));
  std::stringstream a;
  write_amplitudes_csv(a, cs);
  CHECK(a.str().rfind("l,m,re,im\n", 0) == 0);
  std::stringstream t;
  PrecessionTrace tr;
  tr.samples.push_back({0.0, 0.0, 1.0});
  write_trace_csv(t, tr);
  CHECK(t.str() == "t_seconds,theta_rad,fidelity\n0,0,1\n");
  std::stringstream o;
  write_overlay_csv(o, classical_overlay(ShellSpec(3, 1), 0.0, 0.0, 4));
  CHECK(o.str().rfind("x_au,y_au\n9,0\n", 0) == 0);
}

TEST_CASE("writing into a missing directory is an IoError") {
  CHECK_THROWS_AS(write_json_file("/nonexistent_dir_so4/x.json", nlohmann::json::object()), IoError);
}

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  CHECK_THROWS_AS(c.params(), ConfigError);
  c.eta = 0.2;
  CHECK(c.params().zeta2 == cplx(-0.2, 0.0));
  c.zeta1 = cplx(0.1, 0.0);
  CHECK_THROWS_AS(c.params(), ConfigError);
  c.eta.reset();
  CHECK_THROWS_AS(c.params(), ConfigError);
  c.zeta2 = cplx(0.0, 1.0);
  CHECK_FALSE(c.params().eta.has_value());
  c.n = 0;
  CHECK_THROWS_AS(c.shell(), ConfigError);
  c = ScenarioConfig{};
  c.resolution = 8;
  CHECK_THROWS_AS(c.validate_grid(), ConfigError);
  c.truncation = 1e-3;
  CHECK_THROWS_AS(c.validate_truncation(), ConfigError);
  c.alpha_scale = 0.0;
  CHECK_THROWS_AS(c.constants(), ConfigError);
  CHECK(parse_complex("1.5") == cplx(1.5, 0.0));
  CHECK(parse_complex("-0.2,3") == cplx(-0.2, 3.0));
  CHECK_THROWS_AS(parse_complex("1,2,3"), ConfigError);
  CHECK_THROWS_AS(parse_complex("x"), ConfigError);
  CHECK(parse_l_eff_convention("root_l2") == LEffConvention::RootL2);
  CHECK_THROWS_AS(parse_l_eff_convention("bogus"), ConfigError);
  const auto j = to_json(ScenarioConfig{});
  CHECK(j["n"] == 141);
  CHECK(j["t_max"]["unit"] == "Tp");
  CHECK(j["eta"].is_null());
}

TEST_CASE("cli: state reports the quoted time scales") {
  TempDir dir("state");
  const Run r = run_cli("state --eta 0.2 --outdir '" + dir.path.string() + "' --amplitudes '" +
                        (dir.path / "amps.csv").string() + "'");
  INFO(r.out);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "state.json"));
  CHECK(j["eccentricity"].get<double>() == Approx(0.385).margin(1e-3));
  CHECK(j["t_p_seconds"].get<double>() == Approx(0.266).epsilon(0.01));
  CHECK(j["t_cl_seconds"].get<double>() == Approx(4.25e-10).epsilon(0.005));
  CHECK(j["delta_phi"].get<double>() == Approx(-0.2517).margin(5e-5));
  CHECK(j["config"]["l_eff_convention"] == "abs_l3");
  std::string header;
  const auto rows = read_csv(dir.path / "amps.csv", header);
  CHECK(header == "l,m,re,im");
  double norm = 0.0;
  for (const auto& row : rows) norm += row[2] * row[2] + row[3] * row[3];
  CHECK(norm == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("cli: exit codes") {
  TempDir dir("codes");
  const std::string od = " --outdir '" + dir.path.string() + "'";
  CHECK(run_cli("state" + od).code == 2);                                  // no state given
  CHECK(run_cli("state --eta 0.2 --zeta1 1 --zeta2 -1" + od).code == 2);  // both forms
  CHECK(run_cli("state --eta -1" + od).code == 2);
  CHECK(run_cli("state --n 0 --eta 0.2" + od).code == 2);
  CHECK(run_cli("density --eta 0.2 --res 8" + od).code == 2);
  CHECK(run_cli("evolve --eta 0.2 --t-max 0.25" + od).code == 2);      // missing unit
  CHECK(run_cli("evolve --eta 0.0 --n 21" + od).code == 2);            // circular: no orientation
  CHECK(run_cli("state --eta 0.2 --bogus" + od).code == 2);
  CHECK(run_cli("state --eta 0.2 --outdir /proc/so4sim_forbidden").code == 4);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("cli: evolve writes a trace and its summary") {
  TempDir dir("evolve");
  const Run r = run_cli("evolve --eta 0.2 --outdir '" + dir.path.string() + "'");
  INFO(r.out);
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = read_csv(dir.path / "trace.csv", header);
  CHECK(header == "t_seconds,theta_rad,fidelity");
  REQUIRE(rows.size() == 26);
  CHECK(std::abs(rows.back()[1]) == Approx(std::numbers::pi / 2).epsilon(0.02));
  const auto j = nlohmann::json::parse(slurp(dir.path / "trace.json"));
  CHECK(j["relative_error"].get<double>() < 0.01);

  const Run z = run_cli("evolve --eta 0.2 --t-max 0s --outdir '" + dir.path.string() + "'");
  REQUIRE(z.code == 0);
  CHECK(read_csv(dir.path / "trace.csv", header).size() == 1);
  CHECK(nlohmann::json::parse(slurp(dir.path / "trace.json"))["relative_error"].is_null());
}

TEST_CASE("cli: density output is deterministic and honours the env outdir") {
  TempDir a("det_a"), b("det_b");
  const std::string args = "density --n 21 --eta 0.3 --time 0.1Tp --extent 2000 --res 32";
  REQUIRE(run_cli(args + " --outdir '" + a.path.string() + "'").code == 0);
  REQUIRE(run_cli(args, "SO4SIM_OUTDIR='" + b.path.string() + "'").code == 0);
  for (const char* f : {"density.grid", "density.overlay.csv"}) {
    INFO(f);
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  }
  auto ja = nlohmann::json::parse(slurp(a.path / "density.json"));
  auto jb = nlohmann::json::parse(slurp(b.path / "density.json"));
  for (const char* key : {"config", "grid", "overlay"}) {
    ja.erase(key);
    jb.erase(key);
  }
  CHECK(ja == jb);

  std::ifstream in(a.path / "density.grid");
  const DensityGrid g = read_grid(in);
  CHECK(g.resolution == 32);
  CHECK(g.extent == 2000.0);
  CHECK(g.shell.n == 21);
  CHECK(g.eta == 0.3);
  CHECK(g.time > 0.0);
}

TEST_CASE("cli: figures data sets") {
  TempDir dir("figures");
  const Run r = run_cli("figures --n 21 --extent 2000 --res 16 --outdir '" + dir.path.string() + "'");
  INFO(r.out);
  REQUIRE(r.code == 0);
  std::string header;
  const auto fig1 = read_csv(dir.path / "fig1.csv", header);
  CHECK(header == "eta,eps");
  REQUIRE(fig1.size() == 501);
  CHECK(fig1[20][0] == 0.2);
  CHECK(fig1[20][1] == Approx(0.385).margin(1e-3));
  CHECK(fig1[100][1] == 1.0);
  CHECK(fig1[200][1] == Approx(fig1[50][1]).epsilon(1e-15));

  const auto fig2 = read_csv(dir.path / "fig2.csv", header);
  CHECK(header == "eps,abs_dphi_lower,abs_dphi_upper");
  REQUIRE(fig2.size() == 100);
  CHECK(fig2[0][1] == 0.0);
  CHECK(fig2[10][1] == Approx(0.5 * std::numbers::pi * 0.01).margin(5e-4));
  for (std::size_t k = 1; k < fig2.size(); ++k) {
    CHECK(fig2[k][1] > fig2[k - 1][1]);
    CHECK(fig2[k][1] == Approx(fig2[k][2]).epsilon(1e-12));
  }

  for (const char* eta : {"0.2", "0.3", "0.4"}) {
    for (const char* tag : {"t0", "tquarter"}) {
      const std::string stem = std::string("fig3_eta") + eta + "_" + tag;
      INFO(stem);
      CHECK(fs::exists(dir.path / (stem + ".grid")));
      CHECK(fs::exists(dir.path / (stem + "_overlay.csv")));
    }
  }
  const auto idx = nlohmann::json::parse(slurp(dir.path / "figures.json"));
  CHECK(idx["fig3"].size() == 6);
}
