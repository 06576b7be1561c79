#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nytro/complexity.hpp"
#include "nytro/risk_oracle.hpp"
#include "nytro/verify.hpp"

#include <cmath>

using namespace nytro;

namespace {

std::vector<Index> iota_idx(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

}  // namespace

TEST_CASE("q_matrix trivial forms") {
  const KernelGram id{Matrix::Identity(3, 3)};
  CHECK((q_matrix({Algorithm::kols, std::monostate{}}, id) - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  const KernelGram id2{Matrix::Identity(2, 2)};
  const Matrix q = q_matrix({Algorithm::krls, RidgePenalty{0.5}}, id2);
  CHECK((q - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("q_matrix requires the Nystrom factor where due") {
  const KernelGram id{Matrix::Identity(3, 3)};
  CHECK_THROWS_AS(q_matrix({Algorithm::nkrls, RidgePenalty{0.1}}, id), InputError);
  CHECK_THROWS_AS(q_matrix({Algorithm::nytro, IterationSchedule{1.0, 3}}, id), InputError);
}

TEST_CASE("nytro Q acts on y exactly like the nytro fitter") {
  const SyntheticInstance inst = random_abstract_instance(12345, 10, 25);
  const Index n = inst.gram.size();
  Rng rng(54321);
  const Index m = 1 + rng.index(n);
  const NystromFactor nf = nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, m));
  const double gamma = default_step_size(inst.gram);
  const int t = 17;
  const Matrix q = q_matrix({Algorithm::nytro, IterationSchedule{gamma, t}}, inst.gram, &nf);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector y = rng.normal_vector(n);
    const IterationPath path = fit_nytro(nf, y, gamma, t);
    const Vector fitted = nf.k_nm() * path.at_step(t).alpha;
    CHECK((q * y - fitted).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("early-stopping Q acts on y exactly like the iterative fitter") {
  const SyntheticInstance inst = random_abstract_instance(777, 8, 20);
  const double gamma = default_step_size(inst.gram);
  const int t = 9;
  const Matrix q =
      q_matrix({Algorithm::early_stopping, IterationSchedule{gamma, t}}, inst.gram);
  Rng rng(778);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector y = rng.normal_vector(inst.gram.size());
    const IterationPath path = fit_early_stopping(inst.gram, y, gamma, t);
    const Vector fitted = inst.gram.matrix() * path.at_step(t).alpha;
    CHECK((q * y - fitted).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("KOLS risk equals sigma^2 d*/n exactly") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const SyntheticInstance inst = random_abstract_instance(seed, 10, 60);
    const Matrix q = q_matrix({Algorithm::kols, std::monostate{}}, inst.gram);
    const RiskReport report =
        expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2);
    const double expected = inst.problem.sigma2 *
                            static_cast<double>(full_dim(inst.gram)) /
                            static_cast<double>(inst.gram.size());
    CHECK(report.excess_risk == doctest::Approx(expected).epsilon(1e-9));
    CHECK(report.bias == doctest::Approx(0.0));
    CHECK(report.excess_risk == report.variance + report.bias);
  }
}

TEST_CASE("null estimator risk is the pure bias") {
  const SyntheticInstance inst = random_abstract_instance(99, 8, 16);
  const Index n = inst.gram.size();
  const RiskReport report = expected_excess_risk(Matrix::Zero(n, n), inst.gram,
                                                 inst.problem.mu, inst.problem.sigma2);
  CHECK(report.variance == 0.0);
  const Matrix p = range_projector(inst.gram);
  const double expected = (p * inst.problem.mu).squaredNorm() / static_cast<double>(n);
  CHECK(report.bias == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("KRLS risk at the oracle lambda stays under sigma^2 d_eff/n") {
  for (int i = 0; i < 100; ++i) {
    const SyntheticInstance inst = random_abstract_instance(1000 + i, 10, 60);
    const double lambda_star = oracle_lambda(snr(inst.problem, inst.gram), inst.gram.size());
    const Matrix q = q_matrix({Algorithm::krls, RidgePenalty{lambda_star}}, inst.gram);
    const RiskReport report =
        expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2);
    const double bound = inst.problem.sigma2 * effective_dim(inst.gram, lambda_star) /
                         static_cast<double>(inst.gram.size());
    CHECK(report.excess_risk <= bound * (1.0 + 1e-10));
  }
}

TEST_CASE("monte carlo: noiseless KOLS risk is zero and runs are bitwise reproducible") {
  SyntheticInstance inst = random_abstract_instance(2024, 8, 16);
  inst.problem.sigma2 = 0.0;
  const MonteCarloEstimate mc = monte_carlo_excess_risk(
      inst.problem, inst.gram, {Algorithm::kols, std::monostate{}}, nullptr, 5, 1);
  CHECK(mc.estimate < 1e-24);

  const SyntheticInstance noisy = random_abstract_instance(2025, 8, 16);
  const EstimatorSpec est{Algorithm::krls, RidgePenalty{0.2}};
  const MonteCarloEstimate a =
      monte_carlo_excess_risk(noisy.problem, noisy.gram, est, nullptr, 50, 7);
  const MonteCarloEstimate b =
      monte_carlo_excess_risk(noisy.problem, noisy.gram, est, nullptr, 50, 7);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("monte carlo agrees with the closed form within 3 standard errors") {
  const SyntheticInstance inst = random_abstract_instance(31337, 12, 30);
  const Index n = inst.gram.size();
  Rng rng(404);
  const Index m = 1 + rng.index(n);
  const NystromFactor nf = nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, m));
  const double gamma = default_step_size(inst.gram);

  const std::vector<EstimatorSpec> specs = {
      {Algorithm::kols, std::monostate{}},
      {Algorithm::krls, RidgePenalty{0.1}},
      {Algorithm::nkrls, RidgePenalty{0.05}},
      {Algorithm::nytro, IterationSchedule{gamma, 25}},
      {Algorithm::early_stopping, IterationSchedule{gamma, 25}},
  };
  for (const EstimatorSpec& est : specs) {
    const bool needs_nf = est.algo == Algorithm::nkrls || est.algo == Algorithm::nytro;
    const Matrix q = q_matrix(est, inst.gram, needs_nf ? &nf : nullptr);
    const double closed =
        expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2).excess_risk;
    const MonteCarloEstimate mc = monte_carlo_excess_risk(
        inst.problem, inst.gram, est, needs_nf ? &nf : nullptr, 2000, 11);
    CHECK(std::abs(mc.estimate - closed) <= 3.0 * mc.std_error);
  }
}

TEST_CASE("bias bound: degenerate Z attains the bound exactly") {
  // K_mm = 0 forces A = 0, so the sup sits at sigma = 0
  const NystromFactor nf = nystrom_factor(Matrix::Zero(4, 2), Matrix::Zero(2, 2), {0, 1}, 1.0);
  const BiasBoundCheck check = bias_bound_check(nf, 1.0, 5);
  CHECK(check.pass);
  CHECK(check.q_value == doctest::Approx(check.bound));
}

TEST_CASE("bias bound holds on random instances for t in {1, 2, 10, 100}") {
  for (int i = 0; i < 12; ++i) {
    const SyntheticInstance inst = random_abstract_instance(5000 + i, 10, 40);
    const Index n = inst.gram.size();
    Rng rng(6000 + static_cast<std::uint64_t>(i));
    const NystromFactor nf =
        nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, 1 + rng.index(n)));
    const double gamma = default_step_size(inst.gram);
    for (int t : {1, 2, 10, 100}) {
      const BiasBoundCheck check = bias_bound_check(nf, gamma, t);
      CHECK(check.pass);
    }
  }
}

TEST_CASE("bias bound at t = 1 against a fine scalar grid") {
  const SyntheticInstance inst = random_abstract_instance(808, 10, 20);
  Rng rng(809);
  const Index n = inst.gram.size();
  const NystromFactor nf =
      nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, 1 + rng.index(n)));
  const double gamma = default_step_size(inst.gram);
  const BiasBoundCheck check = bias_bound_check(nf, gamma, 1);
  CHECK(check.pass);
  // scalar maximization oracle: sup over sigma in [0, n/gamma] of the same
  // expression never exceeds the bound either
  const double nd = static_cast<double>(n);
  double sup = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double sigma = nd / gamma * i / 20000.0;
    const double v = std::pow(1.0 - gamma * sigma / nd, 2.0) * (sigma + nd / gamma) *
                     (sigma + nd / gamma);
    sup = std::max(sup, v);
  }
  CHECK(sup <= check.bound * (1.0 + 1e-12));
}

TEST_CASE("iterative-vs-Tikhonov risk bound on a small randomized sweep") {
  SuiteOptions opts;
  opts.instances = 4;
  opts.t_max = 40;
  opts.seed = 424242;
  const SuiteResult result = run_verify_suite("thm5", opts);
  CHECK(result.all_pass);
  CHECK(result.rows.size() == 4 * 39);
}

TEST_CASE("full-subset risk bound on a small randomized sweep") {
  SuiteOptions opts;
  opts.instances = 3;
  opts.t_max = 30;
  opts.seed = 515151;
  const SuiteResult result = run_verify_suite("thm3", opts);
  CHECK(result.all_pass);
}

TEST_CASE("NKRLS Q at m = n collapses to the KRLS Q") {
  for (int i = 0; i < 8; ++i) {
    const SyntheticInstance inst = random_abstract_instance(7000 + i, 8, 30);
    const Index n = inst.gram.size();
    const NystromFactor nf = nystrom_from_gram(inst.gram, iota_idx(n));
    Rng rng(7100 + static_cast<std::uint64_t>(i));
    const double lambda = rng.log_uniform(1e-6, 1.0);
    const Matrix q_n = q_matrix({Algorithm::nkrls, RidgePenalty{lambda}}, inst.gram, &nf);
    const Matrix q_k = q_matrix({Algorithm::krls, RidgePenalty{lambda}}, inst.gram);
    CHECK((q_n - q_k).norm() <= 1e-9 * std::max(1.0, q_k.norm()));
  }
}

TEST_CASE("every Q is symmetric with spectrum in [0, 1]") {
  for (int i = 0; i < 6; ++i) {
    const SyntheticInstance inst = random_abstract_instance(8000 + i, 10, 30);
    const Index n = inst.gram.size();
    Rng rng(8100 + static_cast<std::uint64_t>(i));
    const NystromFactor nf =
        nystrom_from_gram(inst.gram, rng.sample_without_replacement(n, 1 + rng.index(n)));
    const double gamma = default_step_size(inst.gram);
    const std::vector<Matrix> qs = {
        q_matrix({Algorithm::kols, std::monostate{}}, inst.gram),
        q_matrix({Algorithm::krls, RidgePenalty{rng.log_uniform(1e-5, 1.0)}}, inst.gram),
        q_matrix({Algorithm::early_stopping, IterationSchedule{gamma, 20}}, inst.gram),
        q_matrix({Algorithm::nkrls, RidgePenalty{rng.log_uniform(1e-5, 1.0)}},
                 inst.gram, &nf),
        q_matrix({Algorithm::nytro, IterationSchedule{gamma, 20}}, inst.gram, &nf),
    };
    for (const Matrix& q : qs) {
      CHECK((q - q.transpose()).cwiseAbs().maxCoeff() < 1e-9);
      const Vector eigs = eigh(((q + q.transpose()) * 0.5).eval()).values;
      CHECK(eigs.maxCoeff() <= 1.0 + 1e-9);
      CHECK(eigs.minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("KRLS variance decreases and bias increases along the lambda grid") {
  const SyntheticInstance inst = random_abstract_instance(909, 15, 40);
  double prev_var = std::numeric_limits<double>::infinity();
  double prev_bias = -1.0;
  for (int i = 0; i < 50; ++i) {
    const double lambda = std::pow(10.0, -8.0 + 9.0 * i / 49.0);
    const Matrix q = q_matrix({Algorithm::krls, RidgePenalty{lambda}}, inst.gram);
    const RiskReport report =
        expected_excess_risk(q, inst.gram, inst.problem.mu, inst.problem.sigma2);
    CHECK(report.variance <= prev_var * (1.0 + 1e-10));
    CHECK(report.bias >= prev_bias * (1.0 - 1e-10));
    prev_var = report.variance;
    prev_bias = report.bias;
  }
}

TEST_CASE("excess-risk identities are invariant to an out-of-range mean component") {
  SynthesisConfig config;
  config.family = SynthesisFamily::abstract_spectrum;
  config.n = 12;
  Vector spectrum = Vector::Zero(12);
  for (Index i = 0; i < 7; ++i) spectrum[i] = 1.0 + static_cast<double>(i);
  config.spectrum = spectrum;
  config.target_snr = 2.0;
  config.sigma2 = 0.5;
  config.seed = 13;

  const SyntheticInstance plain = synthesize_fixed_design(config);
  config.out_of_range_norm = 3.0;
  const SyntheticInstance shifted = synthesize_fixed_design(config);

  // same K (same seed path), mu differs only off the range of K
  CHECK((plain.gram.matrix() - shifted.gram.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  const Matrix q = q_matrix({Algorithm::krls, RidgePenalty{0.3}}, plain.gram);
  const RiskReport a =
      expected_excess_risk(q, plain.gram, plain.problem.mu, plain.problem.sigma2);
  const RiskReport b =
      expected_excess_risk(q, shifted.gram, shifted.problem.mu, shifted.problem.sigma2);
  CHECK(a.excess_risk == doctest::Approx(b.excess_risk).epsilon(1e-9));
}
