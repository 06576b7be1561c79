#include "nytro/verify.hpp"

#include "nytro/complexity.hpp"
#include "nytro/estimators.hpp"
#include "nytro/risk_oracle.hpp"

#include <cmath>

namespace nytro {

namespace {

constexpr double kRelSlack = 1e-9;

bool leq_with_slack(double lhs, double rhs) {
  return lhs <= rhs * (1.0 + kRelSlack) + 1e-300;
}

Matrix maybe_corrupt(Matrix q, bool corrupt) {
  if (corrupt) q.diagonal().array() += 0.1;
  return q;
}

std::vector<Index> full_subset(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

SuiteResult suite_thm1(const SuiteOptions& opts) {
  SuiteResult result{"thm1", {}, true};
  for (int i = 0; i < opts.instances; ++i) {
    const SyntheticInstance inst =
        random_abstract_instance(Rng::derive(opts.seed, static_cast<std::uint64_t>(i)), 10, 80);
    const Matrix q = maybe_corrupt(
        q_matrix({Algorithm::kols, std::monostate{}}, inst.gram), opts.corrupt_q);
    const RiskReport report = expected_excess_risk(q, inst.gram, inst.problem.mu,
                                                   inst.problem.sigma2);
    const double rhs = inst.problem.sigma2 * static_cast<double>(full_dim(inst.gram)) /
                       static_cast<double>(inst.gram.size());
    VerifyRow row;
    row.instance = i;
    row.hyper = 0.0;
    row.lhs = report.excess_risk;
    row.rhs = rhs;
    row.margin = rhs - report.excess_risk;
    row.pass = std::abs(report.excess_risk - rhs) < 1e-9 * rhs;
    result.rows.push_back(row);
    result.all_pass = result.all_pass && row.pass;
  }
  return result;
}

SuiteResult suite_thm2(const SuiteOptions& opts) {
  SuiteResult result{"thm2", {}, true};
  for (int i = 0; i < opts.instances; ++i) {
    const SyntheticInstance inst =
        random_abstract_instance(Rng::derive(opts.seed, static_cast<std::uint64_t>(i)), 10, 80);
    const double snr_value = snr(inst.problem, inst.gram);
    const double lambda_star = oracle_lambda(snr_value, inst.gram.size());
    const Matrix q = maybe_corrupt(
        q_matrix({Algorithm::krls, RidgePenalty{lambda_star}}, inst.gram), opts.corrupt_q);
    const RiskReport report =
        expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2);
    const double n = static_cast<double>(inst.gram.size());
    const double mid = inst.problem.sigma2 * effective_dim(inst.gram, lambda_star) / n;
    const double top = inst.problem.sigma2 * static_cast<double>(full_dim(inst.gram)) / n;
    VerifyRow row;
    row.instance = i;
    row.hyper = lambda_star;
    row.lhs = report.excess_risk;
    row.rhs = mid;
    row.margin = mid - report.excess_risk;
    row.pass = leq_with_slack(report.excess_risk, mid) && leq_with_slack(mid, top);
    result.rows.push_back(row);
    result.all_pass = result.all_pass && row.pass;
  }
  return result;
}

// Shared body of the thm5 / thm3 sweeps; thm3 pins m = n and compares against
// the KRLS Q, the general case draws a fresh uniform subset per t.
SuiteResult suite_iterative_vs_tikhonov(const SuiteOptions& opts, bool full_subset_mode) {
  SuiteResult result{full_subset_mode ? "thm3" : "thm5", {}, true};
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t inst_seed = Rng::derive(opts.seed, static_cast<std::uint64_t>(i));
    const SyntheticInstance inst = random_abstract_instance(inst_seed, 10, 60);
    const Index n = inst.gram.size();
    const double gamma = default_step_size(inst.gram);
    Rng rng(Rng::derive(inst_seed, 0x7375627365747321ULL));
    for (int t = opts.t_min; t <= opts.t_max; ++t) {
      const Index m = full_subset_mode ? n : 1 + rng.index(n);
      const std::vector<Index> subset =
          full_subset_mode ? full_subset(n) : rng.sample_without_replacement(n, m);
      const NystromFactor nf = nystrom_from_gram(inst.gram, subset);
      const double lambda = 1.0 / (gamma * t);

      const Matrix q_iter = maybe_corrupt(
          q_matrix({Algorithm::nytro, IterationSchedule{gamma, t}}, inst.gram, &nf),
          opts.corrupt_q);
      const Matrix q_tikh =
          full_subset_mode
              ? q_matrix({Algorithm::krls, RidgePenalty{lambda}}, inst.gram)
              : q_matrix({Algorithm::nkrls, RidgePenalty{lambda}}, inst.gram, &nf);

      const double lhs =
          expected_excess_risk(q_iter, inst.gram, inst.problem.mu, inst.problem.sigma2)
              .excess_risk;
      const double rhs =
          iteration_constant(t) *
          expected_excess_risk(q_tikh, inst.gram, inst.problem.mu, inst.problem.sigma2)
              .excess_risk;

      VerifyRow row;
      row.instance = i;
      row.hyper = static_cast<double>(t);
      row.lhs = lhs;
      row.rhs = rhs;
      row.margin = rhs - lhs;
      row.pass = leq_with_slack(lhs, rhs);
      result.rows.push_back(row);
      result.all_pass = result.all_pass && row.pass;
    }
  }
  return result;
}

SuiteResult suite_cor1(const SuiteOptions& opts) {
  SuiteResult result{"cor1", {}, true};
  constexpr int kSubsetDraws = 25;
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t inst_seed = Rng::derive(opts.seed, static_cast<std::uint64_t>(i));
    const SyntheticInstance inst = random_abstract_instance(inst_seed, 10, 50);
    const Index n = inst.gram.size();
    Rng rng(Rng::derive(inst_seed, 0x636f7231ULL));
    const int t = 2 + static_cast<int>(rng.below(49));
    const double delta = rng.uniform(0.1, 0.9);
    const double gamma = 1.0 / inst.gram.norm();
    const double lambda = 1.0 / (gamma * t);

    const double d_tilde = coherence_dim(inst.gram, lambda);
    const SubsamplingBound bound =
        nystrom_size_bound(d_tilde, delta, lambda, n, inst.gram.norm());

    const double risk_krls =
        expected_excess_risk(q_matrix({Algorithm::krls, RidgePenalty{lambda}}, inst.gram),
                             inst.gram, inst.problem.mu, inst.problem.sigma2)
            .excess_risk;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (int draw = 0; draw < kSubsetDraws; ++draw) {
      const std::vector<Index> subset = rng.sample_without_replacement(n, bound.m);
      const NystromFactor nf = nystrom_from_gram(inst.gram, subset);
      const Matrix q = maybe_corrupt(
          q_matrix({Algorithm::nytro, IterationSchedule{gamma, t}}, inst.gram, &nf),
          opts.corrupt_q);
      const double risk =
          expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2).excess_risk;
      sum += risk;
      sum_sq += risk * risk;
    }
    const double mean = sum / kSubsetDraws;
    const double var = std::max(0.0, (sum_sq - sum * sum / kSubsetDraws) / (kSubsetDraws - 1));
    const double se = std::sqrt(var / kSubsetDraws);

    const double c_t_delta = iteration_constant(t) * (1.0 + 4.0 * delta);
    VerifyRow row;
    row.instance = i;
    row.hyper = static_cast<double>(t);
    row.lhs = mean;
    row.rhs = c_t_delta * risk_krls;
    row.margin = row.rhs - row.lhs;
    row.pass = mean <= row.rhs * (1.0 + kRelSlack) + 3.0 * se;
    result.rows.push_back(row);
    result.all_pass = result.all_pass && row.pass;
  }
  return result;
}

SuiteResult suite_collapse(const SuiteOptions& opts) {
  SuiteResult result{"collapse", {}, true};
  const int t_cap = std::min(opts.t_max, 100);
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t inst_seed = Rng::derive(opts.seed, static_cast<std::uint64_t>(i));
    const SyntheticInstance inst = random_abstract_instance(inst_seed, 8, 40);
    const Index n = inst.gram.size();
    Rng rng(Rng::derive(inst_seed, 0x636f6c6cULL));
    const NystromFactor nf = nystrom_from_gram(inst.gram, full_subset(n));

    // Q collapse: NKRLS at m = n equals KRLS
    const double lambda = rng.log_uniform(1e-6, 1.0);
    const Matrix q_nkrls = maybe_corrupt(
        q_matrix({Algorithm::nkrls, RidgePenalty{lambda}}, inst.gram, &nf), opts.corrupt_q);
    const Matrix q_krls = q_matrix({Algorithm::krls, RidgePenalty{lambda}}, inst.gram);
    const double fro = (q_nkrls - q_krls).norm();
    const double fro_tol = 1e-9 * std::max(1.0, q_krls.norm());
    VerifyRow q_row{i, lambda, fro, fro_tol, fro_tol - fro, fro <= fro_tol};
    result.rows.push_back(q_row);
    result.all_pass = result.all_pass && q_row.pass;

    // Prediction collapse: NYTRO at m = n equals early stopping at every t
    const double gamma = default_step_size(inst.gram);
    const double sigma = std::sqrt(inst.problem.sigma2);
    Rng noise(Rng::derive(inst_seed, 0x6e6f6973ULL));
    const Vector y = inst.problem.mu + sigma * noise.normal_vector(n);
    const IterationPath nytro_path = fit_nytro(nf, y, gamma, t_cap);
    const IterationPath es_path = fit_early_stopping(inst.gram, y, gamma, t_cap);
    double worst = 0.0;
    for (int t = 1; t <= t_cap; ++t) {
      const Vector pred_nytro = nf.k_nm() * nytro_path.at_step(t).alpha;
      const Vector pred_es = inst.gram.matrix() * es_path.at_step(t).alpha;
      worst = std::max(worst, (pred_nytro - pred_es).cwiseAbs().maxCoeff());
    }
    VerifyRow p_row{i, static_cast<double>(t_cap), worst, 1e-8, 1e-8 - worst, worst <= 1e-8};
    result.rows.push_back(p_row);
    result.all_pass = result.all_pass && p_row.pass;
  }
  return result;
}

SuiteResult suite_spectral(const SuiteOptions& opts) {
  SuiteResult result{"spectral", {}, true};
  for (int i = 0; i < opts.instances; ++i) {
    Rng rng(Rng::derive(opts.seed, static_cast<std::uint64_t>(i)));
    const Index n = 2 + rng.index(19);
    const Index m = 2 + rng.index(19);
    const Matrix b = rng.normal_matrix(n, m);
    const Matrix btb = ((b.transpose() * b + (b.transpose() * b).transpose()) * 0.5).eval();
    const Matrix bbt = ((b * b.transpose() + (b * b.transpose()).transpose()) * 0.5).eval();
    const double norm = std::max(1.0, eigh(bbt).values.maxCoeff());
    const double c = rng.log_uniform(1e-3, 10.0);
    const double gamma = 1.0 / norm;
    const int t = 1 + static_cast<int>(rng.below(50));

    const std::vector<std::function<double(double)>> filters = {
        [](double s) { return s; },
        [c](double s) { return std::max(s, 0.0) / (std::max(s, 0.0) + c); },
        [gamma, t](double s) {
          return 1.0 - std::pow(1.0 - gamma * std::max(s, 0.0), static_cast<double>(t));
        }};

    double worst = 0.0;
    for (const auto& f : filters) {
      const Matrix lhs = apply_spectral(f, btb) * b.transpose();
      const Matrix rhs = b.transpose() * apply_spectral(f, bbt);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    // multiplicativity on the PSD factor
    const auto& f = filters[1];
    const auto& g = filters[2];
    const Matrix prod = apply_spectral(f, bbt) * apply_spectral(g, bbt);
    const Matrix joint = apply_spectral([&](double s) { return f(s) * g(s); }, bbt);
    worst = std::max(worst, (prod - joint).cwiseAbs().maxCoeff());
    if (opts.corrupt_q) worst += 0.1;

    VerifyRow row{i, static_cast<double>(t), worst, 1e-9, 1e-9 - worst, worst <= 1e-9};
    result.rows.push_back(row);
    result.all_pass = result.all_pass && row.pass;
  }
  return result;
}

SuiteResult suite_bounds(const SuiteOptions& opts) {
  SuiteResult result{"bounds", {}, true};
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t inst_seed = Rng::derive(opts.seed, static_cast<std::uint64_t>(i));
    const SyntheticInstance inst = random_abstract_instance(inst_seed, 10, 60);
    const Index n = inst.gram.size();
    Rng rng(Rng::derive(inst_seed, 0x626f756eULL));

    // bias bound q(A, n/(gamma t)) <= n^2/(gamma t)^2
    const Index m = 1 + rng.index(n);
    const NystromFactor nf = nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, m));
    const double gamma = default_step_size(inst.gram);
    const int t = 1 + static_cast<int>(rng.below(200));
    BiasBoundCheck check = bias_bound_check(nf, gamma, t);
    if (opts.corrupt_q) {
      check.q_value += 0.1 * check.bound + 0.1;
      check.pass = false;
    }
    VerifyRow bias_row{i, static_cast<double>(t), check.q_value, check.bound, check.margin,
                       check.pass};
    result.rows.push_back(bias_row);
    result.all_pass = result.all_pass && bias_row.pass;

    // dimension chain at a normalized gram (diag <= 1): d_eff <= d~ <= 1/lambda,
    // d_eff <= d* <= n
    const KernelGram scaled(inst.gram.matrix() / inst.gram.diag_max());
    const double lambda = rng.log_uniform(1e-6, 10.0);
    const double d_eff = effective_dim(scaled, lambda);
    const double d_tilde = coherence_dim(scaled, lambda);
    const double d_star = static_cast<double>(full_dim(scaled));
    const bool chain = leq_with_slack(d_eff, d_tilde) &&
                       leq_with_slack(d_tilde, 1.0 / lambda) &&
                       leq_with_slack(d_eff, d_star) && d_star <= static_cast<double>(n);
    VerifyRow chain_row{i, lambda, d_eff, d_tilde, d_tilde - d_eff,
                        opts.corrupt_q ? false : chain};
    result.rows.push_back(chain_row);
    result.all_pass = result.all_pass && chain_row.pass;
  }
  return result;
}

}  // namespace

double iteration_constant(int t) {
  if (t < 2) throw InputError("iteration_constant: t must be >= 2");
  const double r = 1.0 + 1.0 / (static_cast<double>(t) - 1.0);
  return 4.0 * r * r;
}

SyntheticInstance random_abstract_instance(std::uint64_t seed, Index n_min, Index n_max) {
  Rng rng(Rng::derive(seed, 0x696e7374ULL));
  const Index n = n_min + rng.index(n_max - n_min + 1);
  const Index rank = 1 + rng.index(n);
  Vector spectrum = Vector::Zero(n);
  for (Index i = 0; i < rank; ++i) spectrum[i] = rng.log_uniform(2e-2, 5.0);

  SynthesisConfig config;
  config.family = SynthesisFamily::abstract_spectrum;
  config.n = n;
  config.spectrum = spectrum;
  config.target_snr = rng.log_uniform(0.05, 50.0);
  config.sigma2 = rng.log_uniform(0.01, 4.0);
  config.seed = Rng::derive(seed, 0x636f6e66ULL);
  return synthesize_fixed_design(config);
}

std::vector<std::string> verify_suite_names() {
  return {"thm1", "thm2", "thm3", "thm5", "cor1", "collapse", "spectral", "bounds"};
}

SuiteResult run_verify_suite(const std::string& suite, const SuiteOptions& opts) {
  if (suite == "thm1") return suite_thm1(opts);
  if (suite == "thm2") return suite_thm2(opts);
  if (suite == "thm3") return suite_iterative_vs_tikhonov(opts, /*full_subset_mode=*/true);
  if (suite == "thm5") return suite_iterative_vs_tikhonov(opts, /*full_subset_mode=*/false);
  if (suite == "cor1") return suite_cor1(opts);
  if (suite == "collapse") return suite_collapse(opts);
  if (suite == "spectral") return suite_spectral(opts);
  if (suite == "bounds") return suite_bounds(opts);
  throw InputError("run_verify_suite: unknown suite " + suite);
}

}  // namespace nytro
