// nytro command-line front door: train / select / verify / scaling / regime /
// generate. Emits JSON or CSV artifacts; every command is reproducible from
// (config, seed).

#include "nytro/commands.hpp"
#include "nytro/serialize.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

nytro::KernelSpec kernel_from_flags(const std::string& kernel, double bandwidth) {
  if (kernel == "gaussian") return nytro::KernelSpec::gaussian(bandwidth);
  if (kernel == "linear") return nytro::KernelSpec::linear();
  throw nytro::InputError("unknown kernel family: " + kernel);
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("NYTRO_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"kernel regularized least squares lab (KOLS/KRLS/ES/NKRLS/NYTRO)"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string kernel_name = "gaussian";
  double bandwidth = 1.0;
  std::string algo_name = "krls";
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format_name = "json";
  app.add_option("--kernel", kernel_name, "kernel family: gaussian | linear");
  app.add_option("--bandwidth", bandwidth, "gaussian bandwidth sigma")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_path, "output path");
  app.add_option("--format", format_name, "output format: json | csv");

  // train
  auto* train = app.add_subcommand("train", "fit one estimator and store the model");
  nytro::TrainCommand train_cmd;
  train->add_option("--data", train_cmd.data_path, "libsvm dataset")->required();
  train->add_flag("--scale-targets", train_cmd.scale_targets, "rescale targets to [0, 1]");
  train->add_option("--algo", algo_name, "kols | krls | es | nkrls | nytro");
  train->add_option("--lambda", train_cmd.lambda, "ridge parameter");
  train->add_option("--gamma", train_cmd.gamma, "step size (default 1/max_i k(x_i, x_i))");
  train->add_option("--max-iter", train_cmd.steps, "iteration count")->check(CLI::PositiveNumber);
  train->add_option("--m", train_cmd.m, "Nystrom subset size");

  // select
  auto* select = app.add_subcommand("select", "hold-out model selection");
  nytro::SelectCommand select_cmd;
  std::string test_path;
  std::string lambda_grid_spec;
  select->add_option("--data", select_cmd.data_path, "libsvm dataset")->required();
  select->add_option("--test", test_path, "libsvm test set (reports test RMSE)");
  select->add_flag("--scale-targets", select_cmd.scale_targets, "rescale targets to [0, 1]");
  select->add_option("--algo", algo_name, "kols | krls | es | nkrls | nytro");
  select->add_option("--m", select_cmd.protocol.m, "Nystrom subset size");
  select->add_option("--lambda-grid", lambda_grid_spec, "count,lo,hi (default 100,1e-15,1)");
  select->add_option("--max-iter", select_cmd.protocol.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
  select->add_option("--stop-threshold", select_cmd.protocol.stop_threshold,
                     "relative-improvement stopping threshold")
      ->check(CLI::PositiveNumber);
  select->add_option("--holdout", select_cmd.protocol.holdout_fraction, "validation fraction")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  select->add_option("--gamma", select_cmd.protocol.gamma, "step size override");

  // verify
  auto* verify = app.add_subcommand("verify", "run a theorem verification suite");
  nytro::VerifyCommand verify_cmd;
  int trials = 0;
  verify->add_option("--suite", verify_cmd.suite, "thm1|thm2|thm3|thm5|cor1|collapse|spectral|bounds")
      ->required();
  verify->add_option("--trials", trials, "number of random instances")
      ->check(CLI::PositiveNumber);
  verify->add_option("--t-max", verify_cmd.options.t_max, "largest iteration count checked")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--self-test", verify_cmd.options.corrupt_q,
                   "corrupt the Q under test; the suite must fail");

  // scaling
  auto* scaling = app.add_subcommand("scaling", "selection-time-vs-m experiment");
  nytro::ScalingCommand scaling_cmd;
  std::string m_grid_spec;
  scaling->add_option("--m-grid", m_grid_spec, "comma-separated ascending subset sizes");
  scaling->add_option("--repeats", scaling_cmd.repeats, "timed repetitions per point")
      ->check(CLI::PositiveNumber);
  scaling->add_option("--n", scaling_cmd.n, "synthetic dataset size")->check(CLI::PositiveNumber);
  scaling->add_option("--dim", scaling_cmd.d, "synthetic input dimension")
      ->check(CLI::PositiveNumber);
  scaling->add_option("--max-iter", scaling_cmd.max_iter, "NYTRO iteration cap")
      ->check(CLI::PositiveNumber);

  // regime
  auto* regime = app.add_subcommand("regime", "classify the computational regime");
  nytro::RegimeCommand regime_cmd;
  std::string problem_path;
  regime->add_option("--data", regime_cmd.data_path, "libsvm dataset")->required();
  regime->add_option("--problem", problem_path, "ground-truth problem JSON (from generate)");
  regime->add_flag("--scale-targets", regime_cmd.scale_targets, "rescale targets to [0, 1]");
  regime->add_option("--m", regime_cmd.protocol.m, "subset size for the SNR estimate");

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset + ground truth");
  nytro::GenerateCommand generate_cmd;
  generate_cmd.synthesis.family = nytro::SynthesisFamily::geometric;
  generate->add_option("--n", generate_cmd.synthesis.n, "points")->required();
  generate->add_option("--dim", generate_cmd.synthesis.d, "input dimension")->required();
  generate->add_option("--target-snr", generate_cmd.synthesis.target_snr, "signal-to-noise ratio")
      ->check(CLI::PositiveNumber);
  generate->add_option("--sigma2", generate_cmd.synthesis.sigma2, "noise variance")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const nytro::KernelSpec kernel = kernel_from_flags(kernel_name, bandwidth);
    if (*train) {
      train_cmd.kernel = kernel;
      train_cmd.algo = nytro::algorithm_from_name(algo_name);
      train_cmd.seed = seed;
      train_cmd.out_path = out_path.empty() ? "model.json" : out_path;
      return nytro::cmd_train(train_cmd);
    }
    if (*select) {
      select_cmd.kernel = kernel;
      select_cmd.algo = nytro::algorithm_from_name(algo_name);
      select_cmd.protocol.seed = seed;
      if (!test_path.empty()) select_cmd.test_path = test_path;
      if (!lambda_grid_spec.empty()) {
        int count = 0;
        double lo = 0, hi = 0;
        if (std::sscanf(lambda_grid_spec.c_str(), "%d,%lf,%lf", &count, &lo, &hi) != 3)
          throw nytro::InputError("--lambda-grid expects count,lo,hi");
        select_cmd.protocol.lambda_count = count;
        select_cmd.protocol.lambda_lo = lo;
        select_cmd.protocol.lambda_hi = hi;
      }
      select_cmd.format =
          format_name == "csv" ? nytro::OutputFormat::csv : nytro::OutputFormat::json;
      select_cmd.out_path = out_path.empty() ? "selection.json" : out_path;
      return nytro::cmd_select(select_cmd);
    }
    if (*verify) {
      if (trials > 0) verify_cmd.options.instances = trials;
      verify_cmd.options.seed = seed ? seed : verify_cmd.options.seed;
      verify_cmd.out_path = out_path;
      return nytro::cmd_verify(verify_cmd);
    }
    if (*scaling) {
      scaling_cmd.kernel = kernel;
      scaling_cmd.seed = seed ? seed : scaling_cmd.seed;
      scaling_cmd.out_path = out_path;
      if (!m_grid_spec.empty()) {
        scaling_cmd.m_grid.clear();
        std::size_t pos = 0;
        while (pos < m_grid_spec.size()) {
          std::size_t next = m_grid_spec.find(',', pos);
          if (next == std::string::npos) next = m_grid_spec.size();
          scaling_cmd.m_grid.push_back(std::stol(m_grid_spec.substr(pos, next - pos)));
          pos = next + 1;
        }
      }
      return nytro::cmd_scaling(scaling_cmd);
    }
    if (*regime) {
      regime_cmd.kernel = kernel;
      regime_cmd.protocol.seed = seed;
      if (!problem_path.empty()) regime_cmd.problem_path = problem_path;
      regime_cmd.out_path = out_path;
      return nytro::cmd_regime(regime_cmd);
    }
    if (*generate) {
      generate_cmd.synthesis.kernel = kernel;
      generate_cmd.synthesis.seed = seed;
      generate_cmd.out_prefix = out_path.empty() ? "synthetic" : out_path;
      return nytro::cmd_generate(generate_cmd);
    }
  } catch (const nytro::InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const nytro::ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return 3;
  } catch (const nytro::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 5;
  }
  return 0;
}
