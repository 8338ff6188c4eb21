#pragma once

#include <string>
#include <vector>

namespace fsbc {

/// One named self-check: a residual measured on manufactured or synthetic
/// data and the bound it must stay under.
struct CheckResult {
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  bool lower_bound = false;  ///< the residual must reach the bound instead
  bool passed = false;
  std::string detail;
};

/// Multiplies the derivative computed inside one named check by
/// (1 + magnitude), to confirm that the check notices a broken derivative.
struct DerivativeFault {
  std::string check;
  double magnitude = 0.0;
};

struct CheckOptions {
  bool flat_only = false;  ///< only the psi = 0 checks, each at 1e-12
  DerivativeFault fault;
  int threads = 1;
};

/// Names run by run_checks for the given mode, in report order.
std::vector<std::string> check_names(bool flat_only);
/// Checks that accept a derivative fault.
std::vector<std::string> faultable_checks();

/// Throws std::invalid_argument for an unknown name or a fault aimed at a
/// check that does not support it.
CheckResult run_check(const std::string& name, const CheckOptions& opt = {});
std::vector<CheckResult> run_checks(const CheckOptions& opt = {});

}  // namespace fsbc
