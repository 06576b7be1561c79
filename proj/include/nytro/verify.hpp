#pragma once
// Numerical verification suites for the excess-risk theorems. Each suite runs
// seeded random instances and reports one row per checked inequality with the
// two sides and the margin. All risks come from closed-form Q-matrices, so
// the checks are noise-free.

#include "nytro/common.hpp"
#include "nytro/data_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nytro {

struct VerifyRow {
  int instance = 0;
  double hyper = 0.0;  // t or lambda, depending on the suite
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs (or bound slack)
  bool pass = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<VerifyRow> rows;
  bool all_pass = true;
};

struct SuiteOptions {
  int instances = 20;
  std::uint64_t seed = 20240901;
  int t_min = 2;
  int t_max = 200;
  // Self-test harness mode: corrupts the Q under test by +0.1 I; the suite
  // must then fail.
  bool corrupt_q = false;
};

std::vector<std::string> verify_suite_names();

/// suite is one of: thm1 thm2 thm3 thm5 cor1 collapse spectral bounds
SuiteResult run_verify_suite(const std::string& suite, const SuiteOptions& opts);

/// Abstract fixed-design instance with a mixed-rank spectrum, random SNR and
/// noise level; deterministic per seed.
SyntheticInstance random_abstract_instance(std::uint64_t seed, Index n_min, Index n_max);

/// c_t = 4 (1 + 1/(t-1))^2 for t >= 2
double iteration_constant(int t);

}  // namespace nytro
