#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "fsbc/commands.hpp"
#include "fsbc/io.hpp"
#include "fsbc/spectral.hpp"

using namespace fsbc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsbc_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

State random_state(const Grid& g, unsigned seed) {
  std::srand(seed);
  State s{0.37, make_vector(g), SurfaceField(g)};
  for (double& x : s.psi.values) x = std::rand() / double(RAND_MAX) - 0.5;
  for (auto& c : s.v)
    for (double& x : c.values) x = std::rand() / double(RAND_MAX) - 0.5;
  return s;
}

Config wave_config(const fs::path& out, int steps) {
  return parse_config_text(R"({"grid": {"nx": 16, "ny": 16, "nz": 9, "b": 3.0},
                               "initial_data": {"psi0": {"family": "wave", "eps": 0.02, "k1": 1, "k2": 1},
                                                "v0": {"family": "random_solenoidal", "amplitude": 0.05, "seed": 4}},
                               "stepping": {"t_end": 100.0}})",
                           {"stepping.max_steps=" + std::to_string(steps), "output.directory=" + out.string()});
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(EULER_FSBC_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string config_error_key(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config_text(text, ov);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("snapshot files") {
  const Grid g(8, 10, 9, 2.5);
  const auto dir = scratch("snap");
  const State s = random_state(g, 3);
  const std::string path = (dir / "a.snap").string();
  write_snapshot(path, g, 1.75, s);

  SUBCASE("round trip is bitwise") {
    const Snapshot r = read_snapshot(path, &g);
    CHECK(r.nx == 8);
    CHECK(r.ny == 10);
    CHECK(r.nz == 9);
    CHECK(r.b == 2.5);
    CHECK(r.sigma == 1.75);
    CHECK(r.state.t == s.t);
    CHECK(std::memcmp(r.state.psi.values.data(), s.psi.values.data(), s.psi.size() * sizeof(double)) == 0);
    for (int c = 0; c < 3; ++c)
      CHECK(std::memcmp(r.state.v[c].values.data(), s.v[c].values.data(), s.v[c].size() * sizeof(double)) == 0);
  }
  SUBCASE("layout: header then psi then v1, v2, v3") {
    const std::string bytes = slurp(path);
    const std::size_t header = 8 + 4 + 3 * 4 + 3 * 8;
    CHECK(bytes.size() == header + sizeof(double) * (g.surface_size() + 3 * g.volume_size()));
    CHECK(bytes.substr(0, 8) == "FSBCSNAP");
    double first_psi, first_v3;
    std::memcpy(&first_psi, bytes.data() + header, sizeof(double));
    std::memcpy(&first_v3, bytes.data() + header + sizeof(double) * (g.surface_size() + 2 * g.volume_size()),
                sizeof(double));
    CHECK(first_psi == s.psi.values[0]);
    CHECK(first_v3 == s.v[2].values[0]);
  }
  SUBCASE("rejections") {
    const Grid other(8, 10, 11, 2.5);
    CHECK_THROWS_AS(read_snapshot(path, &other), SnapshotError);
    const Grid deeper(8, 10, 9, 3.0);
    CHECK_THROWS_AS(read_snapshot(path, &deeper), SnapshotError);

    std::string bytes = slurp(path);
    bytes[8] = 2;  // version
    std::ofstream((dir / "v2.snap"), std::ios::binary) << bytes;
    CHECK_THROWS_WITH_AS(read_snapshot((dir / "v2.snap").string()), doctest::Contains("version"), SnapshotError);

    bytes = slurp(path);
    std::ofstream((dir / "short.snap"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(read_snapshot((dir / "short.snap").string()), SnapshotError);

    bytes[0] = 'X';
    std::ofstream((dir / "magic.snap"), std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_snapshot((dir / "magic.snap").string()), SnapshotError);
    CHECK_THROWS_AS(read_snapshot((dir / "missing.snap").string()), SnapshotError);
  }
}

TEST_CASE("time-series CSV") {
  const auto dir = scratch("csv");
  std::vector<DiagnosticsRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    auto& r = recs[static_cast<std::size_t>(i)];
    r.t = 0.1 * i + 1.0 / 3.0;
    r.E = std::exp(-i) * 1e-17;
    r.vort_sup = std::sqrt(2.0) * i;
    r.div_norm = 1e-300;
    r.energy_identity_residual = i < 2 ? std::numeric_limits<double>::quiet_NaN() : 2.0 / 7.0;
  }
  write_timeseries((dir / "ts.csv").string(), recs);
  std::ifstream in(dir / "ts.csv");
  std::string header;
  std::getline(in, header);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == kTimeseriesColumns);
  CHECK(header.rfind("t,E,psi_C3,", 0) == 0);

  const auto back = read_timeseries((dir / "ts.csv").string());
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto a = timeseries_row(recs[i]), b = timeseries_row(back[i]);
    for (int c = 0; c < kTimeseriesColumns; ++c) {
      const auto k = static_cast<std::size_t>(c);
      if (std::isnan(a[k])) CHECK(std::isnan(b[k]));
      else CHECK(a[k] == b[k]);
    }
  }
  std::ofstream(dir / "bad.csv") << "t,E\n1,2\n";
  CHECK_THROWS(read_timeseries((dir / "bad.csv").string()));
}

TEST_CASE("configuration") {
  SUBCASE("defaults and overrides") {
    const Config c = parse_config_text("", {"grid.nx=32", "physics.sigma=2.5", "output.directory=somewhere",
                                            "initial_data.v0.family=columnar_vortex", "dispersion.modes=[1,2]"});
    CHECK(c.grid.nx == 32);
    CHECK(c.physics.sigma == 2.5);
    CHECK(c.output.directory == "somewhere");
    CHECK(c.initial_data.v0.family == "columnar_vortex");
    CHECK(c.dispersion.modes == std::vector<int>{1, 2});
    CHECK(c.diagnostics.thresholds.eps_geo == c.tolerances.eps_geo);
  }
  SUBCASE("errors name the offending key") {
    CHECK(config_error_key(R"({"physics": {"sigma": 0}})") == "physics.sigma");
    CHECK(config_error_key("", {"physics.sigma=-1"}) == "physics.sigma");
    CHECK(config_error_key(R"({"tolerances": {"elliptic_tol": 0}})") == "tolerances.elliptic_tol");
    CHECK(config_error_key(R"({"tolerances": {"eps_geo": -1e-3}})") == "tolerances.eps_geo");
    CHECK(config_error_key(R"({"grid": {"nx": 15}})") == "grid.nx");
    CHECK(config_error_key(R"({"grid": {"nz": "many"}})") == "grid.nz");
    CHECK(config_error_key(R"({"grid": {"nzz": 9}})") == "grid.nzz");
    CHECK(config_error_key(R"({"gird": {}})") == "gird");
    CHECK(config_error_key(R"({"initial_data": {"psi0": {"family": "tsunami"}}})") == "initial_data.psi0.family");
    CHECK(config_error_key(R"({"initial_data": {"psi0": {"family": "wave", "eps": 12}}})") ==
          "initial_data.psi0.eps");
    CHECK(config_error_key(R"({"initial_data": {"psi0": {"family": "wave", "eps": 0.5}}})",
                           {"cutoff.delta0=4", "cutoff.delta1=5"}) == "cutoff.delta1");
    CHECK(config_error_key(R"({"physics": {"fixed_lid": true}, "initial_data": {"psi0": {"family": "wave"}}})") ==
          "physics.fixed_lid");
    CHECK(config_error_key("{not json") == "<root>");
    CHECK(config_error_key("", {"grid.nx"}) == "grid.nx");
    CHECK(config_error_key("", {"grid.nx.deeper=3"}) == "grid.nx");
  }
  SUBCASE("the sigma message states the requirement") {
    try {
      parse_config_text(R"({"physics": {"sigma": 0}})");
      FAIL("accepted sigma = 0");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("surface tension") != std::string::npos);
    }
  }
  SUBCASE("thread count from the environment") {
    ::setenv("EULER_FSBC_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("EULER_FSBC_THREADS", "zero", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("EULER_FSBC_THREADS");
  }
}

TEST_CASE("run: equilibrium stays exactly at rest") {
  const auto dir = scratch("rest");
  const Config c = parse_config_text(R"({"grid": {"nx": 16, "ny": 16, "nz": 9}})",
                                     {"stepping.max_steps=5", "stepping.t_end=10", "output.directory=" + dir.string()});
  const RunResult r = cmd_run(c);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.steps == 5);
  const Snapshot s = read_snapshot((dir / "final.snap").string());
  CHECK(s.state.t > 0.0);
  CHECK(max_abs(s.state.psi) == 0.0);
  for (const auto& comp : s.state.v) CHECK(max_abs(comp) == 0.0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(read_timeseries((dir / "timeseries.csv").string()).size() == 6);
}

TEST_CASE("run: restart from a snapshot continues the unbroken run") {
  const auto a_dir = scratch("unbroken"), b_dir = scratch("restarted");
  Config a = wave_config(a_dir, 10);
  a.output.snapshot_every = 5;
  const RunResult ra = cmd_run(a);
  REQUIRE(ra.exit_code == kExitOk);
  REQUIRE(fs::exists(a_dir / "snapshot_000005.snap"));

  Config b = wave_config(b_dir, 5);
  b.initial_data.snapshot = (a_dir / "snapshot_000005.snap").string();
  validate(b);
  const RunResult rb = cmd_run(b);
  REQUIRE(rb.exit_code == kExitOk);
  REQUIRE(ra.records.size() == 11);
  REQUIRE(rb.records.size() == 6);

  // Running integrals restart from zero, so compare their increments.
  const auto& h = timeseries_header();
  for (std::size_t n = 0; n < 6; ++n) {
    const auto x = timeseries_row(ra.records[n + 5]), y = timeseries_row(rb.records[n]);
    const auto x0 = timeseries_row(ra.records[5]);
    for (std::size_t c = 0; c < kTimeseriesColumns; ++c) {
      if (h[c] == "energy_identity_residual") continue;  // needs five records of history
      const bool integral = h[c] == "bkm_integral" || h[c] == "vbar_W1inf_integral";
      const double want = integral ? x[c] - x0[c] : x[c];
      INFO(h[c] << " at restart step " << n);
      CHECK(std::abs(y[c] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
  for (int c = 0; c < 3; ++c) CHECK(max_abs(ra.final_state.v[c] - rb.final_state.v[c]) <= 1e-12);
  CHECK(max_abs(ra.final_state.psi - rb.final_state.psi) <= 1e-12);
}

TEST_CASE("run: identical inputs give identical outputs") {
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  cmd_run(wave_config(d1, 4));
  cmd_run(wave_config(d2, 4));
  CHECK(slurp(d1 / "timeseries.csv") == slurp(d2 / "timeseries.csv"));
  CHECK(slurp(d1 / "final.snap") == slurp(d2 / "final.snap"));
}

TEST_CASE("run: a degenerate start halts under condition (c)") {
  // Narrow cut-off band with a tall wave: min d3phi is about 0.83 at the nodes, below eps_geo = 0.85.
  const auto dir = scratch("degenerate");
  const std::vector<std::string> ov = {"initial_data.psi0.family=wave", "initial_data.psi0.eps=0.3",
                                       "cutoff.delta0=5", "cutoff.delta1=8", "tolerances.eps_geo=0.85",
                                       "output.directory=" + dir.string()};
  const RunResult r = cmd_run(parse_config_text("", ov));
  CHECK(r.exit_code == kExitCondC);
  CHECK(r.steps == 0);
  CHECK_FALSE(r.halt_message.empty());
  CHECK(fs::exists(dir / "report.json"));

  std::string args;
  for (const auto& o : ov) args += " --override " + o;
  CHECK(run_binary(args + " run") == kExitCondC);
  CHECK(run_binary("--override physics.sigma=0 run") == kExitConfig);
  CHECK(run_binary("--override grid.nzz=3 check") == kExitConfig);
}

TEST_CASE("report reclassifies a finished run") {
  const auto dir = scratch("report");
  const Config c = wave_config(dir, 6);
  const RunResult r = cmd_run(c);
  std::ostringstream out;
  CHECK(cmd_report(c, out) == r.exit_code);
  CHECK(out.str().find("cond_b_prime") != std::string::npos);
}

TEST_CASE("check command") {
  SUBCASE("flat suite passes at 1e-12") {
    CheckOptions o;
    o.flat_only = true;
    const auto res = run_checks(o);
    CHECK(res.size() == check_names(true).size());
    for (const auto& r : res) {
      INFO(r.name << " " << r.residual);
      CHECK(r.passed);
      CHECK(r.bound == 1e-12);
    }
  }
  SUBCASE("a corrupted derivative is caught by the named check only") {
    for (const auto& name : faultable_checks()) {
      CheckOptions o;
      o.fault = {name, 1e-3};
      INFO(name);
      CHECK_FALSE(run_check(name, o).passed);
      CHECK(run_check(name).passed);
    }
    CheckOptions o;
    o.flat_only = true;
    o.fault = {"flat_gradient", 1e-3};
    const auto res = run_checks(o);
    for (const auto& r : res) CHECK(r.passed == (r.name != "flat_gradient"));
  }
  SUBCASE("bad names") {
    CHECK_THROWS_AS(run_check("no_such_check"), std::invalid_argument);
    CheckOptions o;
    o.fault = {"cofactor_identity", 1e-3};
    CHECK_THROWS_AS(run_check("cofactor_identity", o), std::invalid_argument);
  }
}

TEST_CASE("dispersion") {
  Config c = parse_config_text(R"({"grid": {"nx": 16, "ny": 16, "nz": 9, "b": 3.0}})");
  SUBCASE("frequency is independent of a small amplitude") {
    c.dispersion.eps = 1e-4;
    const auto full = measure_dispersion(c, 1);
    c.dispersion.eps = 5e-5;
    const auto half = measure_dispersion(c, 1);
    REQUIRE(full.converged);
    REQUIRE(half.converged);
    MESSAGE("omega " << full.omega_measured << " vs " << half.omega_measured << ", theory " << full.omega_theory);
    CHECK(std::abs(full.omega_measured / half.omega_measured - 1.0) < 1e-6);
    CHECK(full.rel_error < 1e-3);
  }
  SUBCASE("too few steps is reported, not fitted") {
    c.stepping.max_steps = 10;
    const auto r = measure_dispersion(c, 1);
    CHECK_FALSE(r.converged);
    CHECK(std::isnan(r.omega_measured));
    CHECK_FALSE(r.note.empty());
  }
}
