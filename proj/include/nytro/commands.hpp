#pragma once
// Implementations behind the CLI subcommands. Each cmd_* validates its
// inputs, runs the corresponding pipeline, writes the requested artifacts and
// returns a process exit code (0 on success; verify returns nonzero when any
// assertion fails).

#include "nytro/common.hpp"
#include "nytro/data_io.hpp"
#include "nytro/selection.hpp"
#include "nytro/verify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nytro {

enum class OutputFormat { json, csv };

struct VerifyCommand {
  std::string suite;
  SuiteOptions options;
  std::string out_path;  // CSV report
};
int cmd_verify(const VerifyCommand& cmd);

struct ScalingCommand {
  std::vector<Index> m_grid = {100, 200, 400, 700, 1000, 1400, 2000};
  int repeats = 5;
  Index n = 6554;
  Index d = 12;
  KernelSpec kernel = KernelSpec::gaussian(3.0);
  std::uint64_t seed = 42;
  int lambda_count = 100;
  int max_iter = 500;
  std::string out_path;
};

struct ScalingMeasurement {
  Index m = 0;
  Algorithm algo = Algorithm::nkrls;
  double mean_s = 0.0;
  double sd_s = 0.0;
  double median_s = 0.0;
};

struct ScalingOutcome {
  std::vector<ScalingMeasurement> rows;
  double nkrls_slope = 0.0;  // log-log slope of mean selection time vs m
  double nytro_slope = 0.0;
};

/// Times full hold-out model selection (100-lambda grid for NKRLS, one
/// 500-step path for NYTRO) over the m grid; the first measurement of the
/// sweep is preceded by a discarded warm-up run.
ScalingOutcome run_scaling(const ScalingCommand& cmd);
int cmd_scaling(const ScalingCommand& cmd);

struct GenerateCommand {
  SynthesisConfig synthesis;  // geometric family
  std::string out_prefix;     // writes <prefix>.libsvm and <prefix>.problem.json
};
int cmd_generate(const GenerateCommand& cmd);

struct TrainCommand {
  std::string data_path;
  bool scale_targets = false;
  KernelSpec kernel;
  Algorithm algo = Algorithm::krls;
  double lambda = 0.0;  // krls / nkrls
  double gamma = 0.0;   // 0 -> default step size
  int steps = 500;      // early stopping / nytro
  Index m = 0;          // nkrls / nytro subset size
  std::uint64_t seed = 0;
  std::string out_path;  // model JSON
};
int cmd_train(const TrainCommand& cmd);

struct SelectCommand {
  std::string data_path;
  std::optional<std::string> test_path;
  bool scale_targets = false;
  KernelSpec kernel;
  Algorithm algo = Algorithm::krls;
  ProtocolConfig protocol;
  OutputFormat format = OutputFormat::json;
  std::string out_path;
};
int cmd_select(const SelectCommand& cmd);

struct RegimeCommand {
  std::string data_path;
  std::optional<std::string> problem_path;  // ground-truth JSON from generate
  bool scale_targets = false;
  KernelSpec kernel;
  ProtocolConfig protocol;  // used for the SNR estimate when no ground truth
  std::string out_path;
};
int cmd_regime(const RegimeCommand& cmd);

}  // namespace nytro
