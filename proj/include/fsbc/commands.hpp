#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fsbc/config.hpp"
#include "fsbc/diagnostics.hpp"
#include "fsbc/verification.hpp"

namespace fsbc {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      ///< checks failed, bad input files, nonconvergent fits
  kExitConfig = 2,
  kExitCondA = 3,        ///< K1 unbounded
  kExitCondBPrime = 4,   ///< BKM integral unbounded
  kExitCondC = 5,        ///< geometry degenerated, including a halt
  kExitSolver = 6,       ///< pressure solve failed
};

struct RunResult {
  int exit_code = kExitOk;
  std::string halt_message;  ///< empty unless the evolution halted
  std::vector<DiagnosticsRecord> records;
  std::optional<BreakdownReport> breakdown;  ///< needs three records
  State final_state;
  int steps = 0;
};

/// Evolves the configured problem.  Writes timeseries.csv, report.json and
/// final.snap (plus snapshot_NNNNNN.snap every output.snapshot_every steps)
/// into output.directory.  Progress lines go to `log` when given.
RunResult cmd_run(const Config& c, std::ostream* log = nullptr);

struct CheckReport {
  std::vector<CheckResult> results;
  bool passed() const;
};

CheckReport cmd_check(const Config& c, const DerivativeFault& fault = {});
void print_check_report(std::ostream& out, const CheckReport& r);

struct DispersionRow {
  int k = 0;
  double omega_measured = 0.0;
  double omega_theory = 0.0;  ///< sqrt(sigma k^3 tanh(k b))
  double rel_error = 0.0;
  bool converged = false;
  std::string note;
};

/// Frequency of the mode k from the surface amplitude (2 / (nx ny)) sum psi cos(k x1),
/// started from eps cos(k x1) at rest: two successive zero crossings t1, t2
/// give omega = pi / (t2 - t1).
DispersionRow measure_dispersion(const Config& c, int k);
std::vector<DispersionRow> cmd_dispersion(const Config& c);
void print_dispersion(std::ostream& out, const std::vector<DispersionRow>& rows);

/// Re-reads timeseries.csv from the output directory, reclassifies, prints a
/// summary and returns the exit code the run would have produced.
int cmd_report(const Config& c, std::ostream& out);

/// Exit code for a classification (cond_c before cond_a before cond_b').
int exit_code_for(const BreakdownReport& r);

}  // namespace fsbc
