#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pinren {

// One verification check: a named pass/fail with the measured numbers that
// decided it, plus the seed its randomness ran on (0 for deterministic
// checks).  Reports are fully reproducible from (suite, seed, options).
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::uint64_t seed = 0;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass)
        return false;
    return true;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  // fault-injection hook: inflates the return-probability table used for
  // the union side of the decoupling check, so a nonzero value must make
  // the inequalities suite fail with a concrete witness
  double uhat_perturbation = 0.0;
};

// suite is one of: oracles, inequalities, asymptotics, spectral, all.
// Unknown names throw std::invalid_argument.
VerifyReport run_verify_suite(const std::string& suite,
                              const VerifyOptions& options);

} // namespace pinren
