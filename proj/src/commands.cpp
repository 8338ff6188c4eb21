#include "fsbc/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "fsbc/io.hpp"
#include "fsbc/spectral.hpp"

namespace fsbc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json flag_json(const ConditionFlag& f) {
  return {{"triggered", f.triggered}, {"trend_slope", f.trend_slope}, {"quantity", f.quantity}};
}

json record_json(const DiagnosticsRecord& r) {
  json j;
  const auto& h = timeseries_header();
  const auto row = timeseries_row(r);
  for (int c = 0; c < kTimeseriesColumns; ++c) {
    const double v = row[static_cast<std::size_t>(c)];
    j[h[static_cast<std::size_t>(c)]] = std::isfinite(v) ? json(v) : json(nullptr);
  }
  j["K1"] = r.K1();
  j["K2"] = r.K2();
  j["K1_tilde"] = r.K1_tilde();
  return j;
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.snap", step);
  return buf;
}

const char* status_for(int code) {
  switch (code) {
    case kExitOk: return "completed";
    case kExitCondA: return "cond_a";
    case kExitCondBPrime: return "cond_b_prime";
    case kExitCondC: return "cond_c";
    case kExitSolver: return "solver_failure";
    default: return "failed";
  }
}

void write_report(const fs::path& path, const Config& c, const RunResult& r) {
  json j;
  j["status"] = status_for(r.exit_code);
  j["exit_code"] = r.exit_code;
  j["halt_message"] = r.halt_message;
  j["steps"] = r.steps;
  j["t_final"] = r.final_state.t;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"nz", c.grid.nz}, {"b", c.grid.b}};
  j["sigma"] = c.physics.sigma;
  j["fixed_lid"] = c.physics.fixed_lid;
  if (r.breakdown) {
    j["breakdown"] = {{"cond_a", flag_json(r.breakdown->cond_a)},
                      {"cond_b_prime", flag_json(r.breakdown->cond_b_prime)},
                      {"cond_c", flag_json(r.breakdown->cond_c)}};
  } else {
    j["breakdown"] = nullptr;
  }
  j["last_record"] = r.records.empty() ? json(nullptr) : record_json(r.records.back());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

double mode_amplitude(const Grid& g, const SurfaceField& psi, int k) {
  double s = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) s += psi(i, j) * std::cos(k * g.x1(i));
  return 2.0 * s / (static_cast<double>(g.nx()) * g.ny());
}

}  // namespace

int exit_code_for(const BreakdownReport& r) {
  if (r.cond_c.triggered) return kExitCondC;
  if (r.cond_a.triggered) return kExitCondA;
  if (r.cond_b_prime.triggered) return kExitCondBPrime;
  return kExitOk;
}

RunResult cmd_run(const Config& c, std::ostream* log) {
  const Grid g = make_grid(c);
  State s = initial_state(c, g);
  const Stepper st(g, make_dynamics(c, g, max_abs(s.psi)));
  const fs::path dir(c.output.directory);
  fs::create_directories(dir);

  std::ofstream csv(dir / "timeseries.csv", std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + (dir / "timeseries.csv").string());
  write_timeseries_header(csv);

  RunResult res;
  const RecordOptions ropt{c.physics.sigma, c.diagnostics.k2_accumulator_enabled};
  const double t_end = c.stepping.t_end;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
  const int cadence = c.stepping.projection_cadence;
  auto record = [&](const Tendencies& k) {
    res.records.push_back(make_record(g, s, k, res.records, ropt));
    write_timeseries_row(csv, res.records.back());
    csv.flush();
    if (res.records.size() >= 3) {
      res.breakdown = classify_breakdown(res.records, c.diagnostics.thresholds);
      res.exit_code = exit_code_for(*res.breakdown);
    }
  };

  try {
    if (c.initial_data.snapshot.empty() && c.initial_data.project && max_abs(s.v[0]) + max_abs(s.v[1]) + max_abs(s.v[2]) > 0.0)
      s = st.project(s);
    for (int n = 0;; ++n) {
      const bool last = n >= c.stepping.max_steps || s.t >= t_end - t_tol;
      const Tendencies k = st.evaluate(s);
      if (n % c.diagnostics.record_every == 0 || last) record(k);
      if (res.exit_code != kExitOk) {
        res.halt_message = "breakdown criterion met at t = " + std::to_string(s.t);
        break;
      }
      if (last) break;
      if (c.output.snapshot_every > 0 && n > 0 && n % c.output.snapshot_every == 0)
        write_snapshot((dir / snapshot_name(n)).string(), g, c.physics.sigma, s);
      double dt = c.stepping.dt > 0.0 ? c.stepping.dt : cfl_dt(g, s, k.geo, c.physics.sigma, c.stepping.safety);
      dt = std::min(dt, t_end - s.t);
      StepReport rep;
      s = st.step(s, dt, cadence > 0 && (n + 1) % cadence == 0, &rep);
      ++res.steps;
      if (log && (res.steps % 50 == 0))
        *log << "step " << res.steps << "  t = " << s.t << "  dt = " << rep.dt << "  div = " << rep.divergence << '\n';
    }
  } catch (const EvolutionHalt& h) {
    res.halt_message = h.what();
    res.exit_code = h.reason() == HaltReason::solver ? kExitSolver : kExitCondC;
    if (h.reason() == HaltReason::geometry && res.records.size() >= 3) {
      res.breakdown = classify_breakdown(res.records, c.diagnostics.thresholds);
      res.breakdown->cond_c.triggered = true;
      if (res.breakdown->cond_c.quantity.empty()) res.breakdown->cond_c.quantity = "halt";
    }
  }
  res.final_state = s;
  if (c.output.snapshot_every > 0 && res.steps > 0 && res.steps % c.output.snapshot_every == 0 && res.exit_code == kExitOk)
    write_snapshot((dir / snapshot_name(res.steps)).string(), g, c.physics.sigma, s);
  write_snapshot((dir / "final.snap").string(), g, c.physics.sigma, s);
  write_report(dir / "report.json", c, res);
  if (log) {
    *log << status_for(res.exit_code) << " after " << res.steps << " steps, t = " << s.t << '\n';
    if (!res.halt_message.empty()) *log << res.halt_message << '\n';
  }
  return res;
}

bool CheckReport::passed() const {
  for (const auto& r : results)
    if (!r.passed) return false;
  return !results.empty();
}

CheckReport cmd_check(const Config& c, const DerivativeFault& fault) {
  CheckOptions opt;
  opt.flat_only = c.check.flat_only;
  opt.fault = fault;
  opt.threads = worker_count();
  return {run_checks(opt)};
}

void print_check_report(std::ostream& out, const CheckReport& r) {
  for (const auto& x : r.results) {
    out << (x.passed ? "PASS " : "FAIL ") << std::left << std::setw(34) << x.name << std::right
        << std::scientific << std::setprecision(3) << std::setw(11) << x.residual << (x.lower_bound ? " >= " : " <= ")
        << std::setw(10) << x.bound << std::defaultfloat;
    if (!x.detail.empty()) out << "  (" << x.detail << ")";
    out << '\n';
  }
  std::size_t failed = 0;
  for (const auto& x : r.results) failed += !x.passed;
  out << r.results.size() - failed << "/" << r.results.size() << " checks passed\n";
}

DispersionRow measure_dispersion(const Config& c, int k) {
  const Grid g = make_grid(c);
  const double sigma = c.physics.sigma, eps = c.dispersion.eps;
  DispersionRow row;
  row.k = k;
  row.omega_theory = std::sqrt(sigma * k * k * k * std::tanh(k * c.grid.b));
  const Stepper st(g, make_dynamics(c, g, eps));
  State s;
  s.v = make_vector(g);
  s.psi = sample_surface(g, [&](double x, double) { return eps * std::cos(k * x); });
  const double period = 2.0 * std::numbers::pi / row.omega_theory;
  const double t_max = 1.25 * period;

  std::vector<double> crossings;
  double a_prev = mode_amplitude(g, s.psi, k), t_prev = s.t;
  int steps = 0;
  const int max_steps = std::max(c.stepping.max_steps, 1);
  while (crossings.size() < 2 && s.t < t_max && steps < max_steps) {
    const double dt = c.stepping.dt > 0.0 ? c.stepping.dt : cfl_dt(g, s, st.geometry(s), sigma, c.stepping.safety);
    s = st.step(s, dt, c.stepping.projection_cadence > 0 && (steps + 1) % c.stepping.projection_cadence == 0);
    ++steps;
    const double a = mode_amplitude(g, s.psi, k);
    if ((a_prev > 0.0) != (a > 0.0)) crossings.push_back(t_prev + (s.t - t_prev) * a_prev / (a_prev - a));
    a_prev = a;
    t_prev = s.t;
  }
  if (crossings.size() < 2) {
    row.omega_measured = std::numeric_limits<double>::quiet_NaN();
    row.rel_error = std::numeric_limits<double>::quiet_NaN();
    row.note = "fewer than two zero crossings within " + std::to_string(steps) + " steps";
    return row;
  }
  row.omega_measured = std::numbers::pi / (crossings[1] - crossings[0]);
  row.rel_error = std::abs(row.omega_measured - row.omega_theory) / row.omega_theory;
  row.converged = std::isfinite(row.omega_measured);
  return row;
}

std::vector<DispersionRow> cmd_dispersion(const Config& c) {
  std::vector<DispersionRow> rows;
  for (int k : c.dispersion.modes) rows.push_back(measure_dispersion(c, k));
  return rows;
}

void print_dispersion(std::ostream& out, const std::vector<DispersionRow>& rows) {
  out << "   k   omega_measured     omega_theory        rel_error\n";
  for (const auto& r : rows) {
    out << std::setw(4) << r.k << std::scientific << std::setprecision(8) << std::setw(17) << r.omega_measured
        << std::setw(17) << r.omega_theory << std::setprecision(3) << std::setw(17) << r.rel_error << std::defaultfloat;
    if (!r.converged) out << "  ERROR: " << r.note;
    out << '\n';
  }
}

int cmd_report(const Config& c, std::ostream& out) {
  const fs::path path = fs::path(c.output.directory) / "timeseries.csv";
  const auto records = read_timeseries(path.string());
  out << path.string() << ": " << records.size() << " records\n";
  if (records.empty()) return kExitFailure;
  const auto& last = records.back();
  double e_max = 0.0, res_max = 0.0;
  for (const auto& r : records) {
    e_max = std::max(e_max, r.E);
    if (std::isfinite(r.energy_identity_residual)) res_max = std::max(res_max, r.energy_identity_residual);
  }
  out << "t_final " << last.t << "\nmax E " << e_max << "\nK1 " << last.K1() << "\nK2 " << last.K2()
      << "\nbkm_integral " << last.bkm_integral << "\nmin_d3phi " << last.min_d3phi
      << "\nmax energy identity residual " << res_max << '\n';
  if (records.size() < 3) {
    out << "too few records to classify\n";
    return kExitOk;
  }
  const auto rep = classify_breakdown(records, c.diagnostics.thresholds);
  auto line = [&](const char* name, const ConditionFlag& f) {
    out << name << ": " << (f.triggered ? "TRIGGERED" : "clear") << "  slope " << f.trend_slope;
    if (!f.quantity.empty()) out << "  (" << f.quantity << ")";
    out << '\n';
  };
  line("cond_a", rep.cond_a);
  line("cond_b_prime", rep.cond_b_prime);
  line("cond_c", rep.cond_c);
  return exit_code_for(rep);
}

}  // namespace fsbc
