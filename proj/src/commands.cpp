#include "nytro/commands.hpp"

#include "nytro/complexity.hpp"
#include "nytro/estimators.hpp"
#include "nytro/risk_oracle.hpp"
#include "nytro/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace nytro {

namespace {

CsvTable suite_to_csv(const SuiteResult& result) {
  CsvTable table;
  table.columns = {"suite", "instance_id", "hyper", "lhs", "rhs", "margin", "pass"};
  for (const VerifyRow& row : result.rows)
    table.rows.push_back({result.suite, std::to_string(row.instance),
                          format_double(row.hyper), format_double(row.lhs),
                          format_double(row.rhs), format_double(row.margin),
                          row.pass ? "1" : "0"});
  return table;
}

double slope_of(const std::vector<std::pair<double, double>>& log_points) {
  const double n = static_cast<double>(log_points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : log_points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Vector synthetic_targets(const Matrix& x, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x74617267ULL));
  Vector y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const double r2 = x.row(i).squaredNorm() / static_cast<double>(x.cols());
    y[i] = std::sin(2.0 * r2) + 0.5 * x(i, 0) + 0.1 * rng.normal();
  }
  return y;
}

Matrix rows_of(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
  return out;
}

}  // namespace

int cmd_verify(const VerifyCommand& cmd) {
  const SuiteResult result = run_verify_suite(cmd.suite, cmd.options);
  if (!cmd.out_path.empty()) write_csv(cmd.out_path, suite_to_csv(result));

  int failures = 0;
  for (const VerifyRow& row : result.rows)
    if (!row.pass) ++failures;
  std::cout << "suite " << result.suite << ": " << result.rows.size() << " checks, "
            << failures << " failures" << (cmd.options.corrupt_q ? " (self-test mode)" : "")
            << "\n";

  if (!result.all_pass && !cmd.out_path.empty()) {
    // Serialize enough to replay the failing instances.
    Json replay;
    replay["suite"] = result.suite;
    replay["seed"] = cmd.options.seed;
    replay["instances"] = cmd.options.instances;
    Json failing = Json::array();
    for (const VerifyRow& row : result.rows)
      if (!row.pass)
        failing.push_back(Json{{"instance", row.instance},
                               {"hyper", row.hyper},
                               {"lhs", row.lhs},
                               {"rhs", row.rhs}});
    replay["failures"] = std::move(failing);
    write_text_file(cmd.out_path + ".fail.json", replay.dump(2));
  }
  return result.all_pass ? 0 : 1;
}

ScalingOutcome run_scaling(const ScalingCommand& cmd) {
  if (cmd.m_grid.empty() || cmd.repeats < 1)
    throw InputError("run_scaling: need a non-empty m grid and repeats >= 1");
  if (!std::is_sorted(cmd.m_grid.begin(), cmd.m_grid.end()))
    throw InputError("run_scaling: m grid must be ascending");

  Rng rng(Rng::derive(cmd.seed, 0x7363616cULL));
  const Matrix x = rng.normal_matrix(cmd.n, cmd.d);
  const Vector y = synthetic_targets(x, cmd.seed);

  ProtocolConfig protocol;
  protocol.lambda_count = cmd.lambda_count;
  protocol.max_iter = cmd.max_iter;
  protocol.seed = cmd.seed;

  auto timed_run = [&](Algorithm algo, Index m) {
    ProtocolConfig config = protocol;
    config.m = m;
    return run_holdout_selection(algo, cmd.kernel, x, y, config).report.wall_time_s;
  };

  // warm-up, discarded
  (void)timed_run(Algorithm::nkrls, cmd.m_grid.front());
  (void)timed_run(Algorithm::nytro, cmd.m_grid.front());

  ScalingOutcome outcome;
  std::vector<std::pair<double, double>> nkrls_log, nytro_log;
  for (Index m : cmd.m_grid) {
    for (Algorithm algo : {Algorithm::nkrls, Algorithm::nytro}) {
      std::vector<double> times(static_cast<std::size_t>(cmd.repeats));
      for (int rep = 0; rep < cmd.repeats; ++rep) times[static_cast<std::size_t>(rep)] = timed_run(algo, m);
      ScalingMeasurement row;
      row.m = m;
      row.algo = algo;
      double sum = 0.0;
      for (double v : times) sum += v;
      row.mean_s = sum / cmd.repeats;
      double sq = 0.0;
      for (double v : times) sq += (v - row.mean_s) * (v - row.mean_s);
      row.sd_s = cmd.repeats > 1 ? std::sqrt(sq / (cmd.repeats - 1)) : 0.0;
      std::vector<double> sorted = times;
      std::sort(sorted.begin(), sorted.end());
      row.median_s = sorted[sorted.size() / 2];
      outcome.rows.push_back(row);
      // medians keep the slope fit insensitive to scheduling spikes
      auto& log_points = algo == Algorithm::nkrls ? nkrls_log : nytro_log;
      log_points.emplace_back(std::log(static_cast<double>(m)), std::log(row.median_s));
    }
  }
  outcome.nkrls_slope = slope_of(nkrls_log);
  outcome.nytro_slope = slope_of(nytro_log);
  return outcome;
}

int cmd_scaling(const ScalingCommand& cmd) {
  const ScalingOutcome outcome = run_scaling(cmd);
  CsvTable table;
  table.columns = {"m", "algo", "mean_s", "sd_s", "median_s"};
  for (const ScalingMeasurement& row : outcome.rows)
    table.rows.push_back({std::to_string(row.m), std::string(algorithm_name(row.algo)),
                          format_double(row.mean_s), format_double(row.sd_s),
                          format_double(row.median_s)});
  table.rows.push_back({"slope", "nkrls", format_double(outcome.nkrls_slope), "", ""});
  table.rows.push_back({"slope", "nytro", format_double(outcome.nytro_slope), "", ""});
  if (!cmd.out_path.empty()) write_csv(cmd.out_path, table);
  std::cout << "nkrls log-log slope: " << outcome.nkrls_slope << "\n"
            << "nytro log-log slope: " << outcome.nytro_slope << "\n";
  return 0;
}

int cmd_generate(const GenerateCommand& cmd) {
  if (cmd.synthesis.family != SynthesisFamily::geometric)
    throw InputError("cmd_generate: only the geometric family produces datasets");
  const SyntheticInstance instance = synthesize_fixed_design(cmd.synthesis);

  // one noise realization for the stored targets
  Rng noise(instance.problem.noise_seed);
  Dataset data;
  data.points = instance.points;
  data.targets = instance.problem.mu +
                 std::sqrt(instance.problem.sigma2) * noise.normal_vector(instance.gram.size());
  data.name = "synthetic";
  save_libsvm(data, cmd.out_prefix + ".libsvm");

  Json problem;
  problem["kernel"] = to_json(cmd.synthesis.kernel);
  problem["sigma2"] = instance.problem.sigma2;
  problem["seed"] = cmd.synthesis.seed;
  Json mu = Json::array();
  for (Index i = 0; i < instance.problem.mu.size(); ++i) mu.push_back(instance.problem.mu[i]);
  problem["mu"] = std::move(mu);
  Json alpha = Json::array();
  for (Index i = 0; i < instance.problem.alpha_opt.size(); ++i)
    alpha.push_back(instance.problem.alpha_opt[i]);
  problem["alpha_opt"] = std::move(alpha);
  write_text_file(cmd.out_prefix + ".problem.json", problem.dump(2));
  return 0;
}

int cmd_train(const TrainCommand& cmd) {
  Dataset data = load_libsvm(cmd.data_path);
  if (cmd.scale_targets) data.targets = scale_targets_unit(data.targets);
  const KernelGram gram = gram_full(cmd.kernel, data.points);

  CoefficientModel model;
  switch (cmd.algo) {
    case Algorithm::kols:
      model = fit_kols(gram, data.targets);
      break;
    case Algorithm::krls:
      model = fit_krls(gram, data.targets, cmd.lambda);
      break;
    case Algorithm::early_stopping: {
      const double gamma = cmd.gamma > 0.0 ? cmd.gamma : default_step_size(gram);
      model = fit_early_stopping(gram, data.targets, gamma, cmd.steps).models.back();
      break;
    }
    case Algorithm::nkrls:
    case Algorithm::nytro: {
      if (cmd.m < 1 || cmd.m > gram.size())
        throw InputError("cmd_train: subset size m out of range");
      Rng rng(Rng::derive(cmd.seed, 0x73756273ULL));
      const NystromFactor nf =
          nystrom_from_gram(gram, rng.sample_without_replacement(gram.size(), cmd.m));
      if (cmd.algo == Algorithm::nkrls) {
        model = fit_nkrls(nf, data.targets, cmd.lambda, cmd.kernel);
      } else {
        const double gamma = cmd.gamma > 0.0 ? cmd.gamma : default_step_size(nf);
        model = fit_nytro(nf, data.targets, gamma, cmd.steps, cmd.kernel).models.back();
      }
      break;
    }
  }
  write_text_file(cmd.out_path, to_json(model).dump(2));
  return 0;
}

int cmd_select(const SelectCommand& cmd) {
  Dataset data = load_libsvm(cmd.data_path);
  if (cmd.scale_targets) data.targets = scale_targets_unit(data.targets);
  const ProtocolRun run =
      run_holdout_selection(cmd.algo, cmd.kernel, data.points, data.targets, cmd.protocol);

  Json out = to_json(run.report);
  out["model"] = to_json(run.model);
  if (cmd.test_path) {
    Dataset test = load_libsvm(*cmd.test_path);
    if (cmd.scale_targets) test.targets = scale_targets_unit(test.targets);
    const Matrix x_train = rows_of(data.points, run.train_idx);
    const Vector pred = predict(run.model, cmd.kernel, x_train, test.points);
    out["test_rmse"] = rmse(pred, test.targets);
  }

  if (cmd.format == OutputFormat::json) {
    write_text_file(cmd.out_path, out.dump(2));
  } else {
    CsvTable table;
    table.columns = {"hyper", "rmse"};
    for (const ValidationPoint& point : run.report.validation_curve)
      table.rows.push_back({format_double(point.hyper), format_double(point.rmse)});
    write_csv(cmd.out_path, table);
  }
  std::cout << "chosen hyper: " << run.report.chosen_hyper
            << " (" << algorithm_name(cmd.algo) << ")";
  if (out.contains("test_rmse")) std::cout << ", test rmse " << out["test_rmse"].get<double>();
  std::cout << "\n";
  return 0;
}

int cmd_regime(const RegimeCommand& cmd) {
  Dataset data = load_libsvm(cmd.data_path);
  if (cmd.scale_targets) data.targets = scale_targets_unit(data.targets);
  const KernelGram gram = gram_full(cmd.kernel, data.points);

  FixedDesignProblem problem;
  bool estimated = false;
  if (cmd.problem_path) {
    std::ifstream in(*cmd.problem_path);
    if (!in) throw InputError("cmd_regime: cannot open " + *cmd.problem_path);
    Json j = Json::parse(in);
    problem.sigma2 = j.at("sigma2").get<double>();
    const auto mu = j.at("mu").get<std::vector<double>>();
    problem.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size()));
    if (j.contains("alpha_opt")) {
      const auto alpha = j.at("alpha_opt").get<std::vector<double>>();
      problem.alpha_opt = Eigen::Map<const Vector>(alpha.data(), static_cast<Index>(alpha.size()));
    } else {
      problem.alpha_opt = pinv(gram.matrix()) * problem.mu;
    }
  } else {
    // SNR estimate from the data: KRLS at the hold-out-selected lambda, with
    // the residual variance standing in for sigma^2. Never used in theorem
    // checks.
    estimated = true;
    const ProtocolRun run = run_holdout_selection(Algorithm::krls, cmd.kernel, data.points,
                                                  data.targets, cmd.protocol);
    const CoefficientModel model = fit_krls(gram, data.targets, run.report.chosen_hyper);
    const Vector fitted = gram.matrix() * model.alpha;
    const double residual_var =
        (data.targets - fitted).squaredNorm() / static_cast<double>(gram.size());
    if (!(residual_var > 0.0)) throw NumericError("cmd_regime: zero residual variance");
    problem.sigma2 = residual_var;
    problem.mu = fitted;
    problem.alpha_opt = model.alpha;
  }

  const RegimeProfile profile = regime_profile(problem, gram);
  Json out = to_json(profile);
  out["snr_estimated"] = estimated;
  if (!cmd.out_path.empty()) write_text_file(cmd.out_path, out.dump(2));
  std::cout << "region: " << regime_name(profile.region) << " (snr " << profile.snr
            << ", d~ " << profile.d_tilde << ", c1 " << profile.c1 << ", c2 " << profile.c2
            << ")\n";
  return 0;
}

}  // namespace nytro
