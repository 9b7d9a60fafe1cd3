#pragma once

// Acceptance checks shared by `fks verify` and the acceptance test binary.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fks {

struct CheckResult {
  std::string name;
  bool pass = false;
  /// measured value, bound and anything else worth printing
  std::string detail;
  /// Set for checks that cannot pass as stated; see the README.
  bool known_limitation = false;
  double seconds = 0.0;
};

enum class Suite { operators, inequalities, oracles, scenarios, all };

Suite parse_suite(std::string_view name);
std::string_view to_string(Suite s);

struct AcceptanceCheck {
  std::string name;
  Suite suite;
  std::function<CheckResult()> run;
};

/// Every acceptance check, in a fixed order.  `scratch` receives the sweep's
/// cell directories (it is cleared first).
std::vector<AcceptanceCheck> acceptance_checks(const std::filesystem::path& scratch);

/// Runs the checks of `suite`, printing one PASS/FAIL line per check to `os`.
std::vector<CheckResult> run_suite(Suite suite, std::ostream& os, const std::filesystem::path& scratch);

/// c_alpha from numerical quadrature of int_0^inf (1 - cos h) h^{-1-alpha} dh.
double fractional_constant_by_quadrature(double alpha);

}  // namespace fks
