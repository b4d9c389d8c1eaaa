#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddgda::harness {

struct CheckOptions {
  /// Run only this module's checks (core, distmap, gradients, solvers,
  /// metrics, bench); empty runs all.
  std::string only;
  /// Negative control. "jacobian-sign" flips the sign of A in the
  /// quadratic benchmark's true map.
  std::string inject_fault;
};

enum class CheckStatus { Pass, Fail, ExpectedFail, UnexpectedPass };

struct CheckResult {
  std::string module;
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
  double seconds = 0.0;
};

const std::vector<std::string> &check_modules();
const std::vector<std::string> &known_faults();

/// Throws InvalidArgument for an unknown module or fault name.
std::vector<CheckResult> run_checks(const CheckOptions &opts);

/// True when no check has status Fail or UnexpectedPass.
bool all_ok(const std::vector<CheckResult> &results);

std::string_view to_string(CheckStatus s) noexcept;

} // namespace ddgda::harness
