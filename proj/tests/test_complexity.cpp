#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nytro/complexity.hpp"
#include "nytro/verify.hpp"

#include <cmath>

using namespace nytro;

TEST_CASE("full_dim on identity, rank-one and constructed spectra") {
  CHECK(full_dim(KernelGram{Matrix::Identity(5, 5)}) == 5);

  Rng rng(1);
  const Vector v = rng.normal_vector(6);
  const Matrix outer = ((v * v.transpose() + (v * v.transpose()).transpose()) * 0.5).eval();
  CHECK(full_dim(KernelGram{outer}) == 1);

  SynthesisConfig config;
  config.family = SynthesisFamily::abstract_spectrum;
  config.n = 8;
  Vector spectrum = Vector::Zero(8);
  for (Index i = 0; i < 5; ++i) spectrum[i] = 1.0 + static_cast<double>(i);
  config.spectrum = spectrum;
  config.target_snr = 1.0;
  config.sigma2 = 1.0;
  config.seed = 2;
  const SyntheticInstance inst = synthesize_fixed_design(config);
  CHECK(full_dim(inst.gram) == 5);
}

TEST_CASE("effective_dim basics and the direct-solve oracle") {
  const KernelGram id{Matrix::Identity(2, 2)};
  CHECK(effective_dim(id, 0.5) == doctest::Approx(1.0));

  const SyntheticInstance inst = random_abstract_instance(3, 10, 30);
  // lambda -> 0 approaches d* (lambda n must stay above the noise floor of
  // the zero eigenvalues and below the smallest positive one)
  CHECK(effective_dim(inst.gram, 1e-9) ==
        doctest::Approx(static_cast<double>(full_dim(inst.gram))).epsilon(1e-4));

  // independent route: trace of the linear solve, no eigendecomposition
  Rng rng(4);
  const Matrix g = rng.normal_matrix(9, 9);
  const Matrix k = (g * g.transpose() + Matrix::Identity(9, 9)).eval();
  const KernelGram gram{((k + k.transpose()) * 0.5).eval()};
  const double lambda = 0.07;
  Matrix system = gram.matrix();
  system.diagonal().array() += lambda * 9.0;
  const Matrix solved = system.ldlt().solve(gram.matrix());
  CHECK(effective_dim(gram, lambda) == doctest::Approx(solved.trace()).epsilon(1e-10));
}

TEST_CASE("coherence_dim basics") {
  const KernelGram id{Matrix::Identity(2, 2)};
  CHECK(coherence_dim(id, 0.5) == doctest::Approx(1.0));

  // rank-one c e1 e1^T: diagonal of K(K+lambda n I)^{-1} peaks at index 1
  const double c = 3.0;
  const Index n = 4;
  Matrix k = Matrix::Zero(n, n);
  k(0, 0) = c;
  const double lambda = 0.2;
  CHECK(coherence_dim(KernelGram{k}, lambda) ==
        doctest::Approx(static_cast<double>(n) * c / (c + lambda * n)).epsilon(1e-12));
}

TEST_CASE("dimension chain holds on random normalized grams") {
  for (int i = 0; i < 40; ++i) {
    const SyntheticInstance inst = random_abstract_instance(100 + i, 8, 40);
    const KernelGram scaled{(inst.gram.matrix() / inst.gram.diag_max()).eval()};
    Rng rng(200 + static_cast<std::uint64_t>(i));
    const double lambda = rng.log_uniform(1e-6, 10.0);
    const double d_eff = effective_dim(scaled, lambda);
    const double d_tilde = coherence_dim(scaled, lambda);
    const double d_star = static_cast<double>(full_dim(scaled));
    CHECK(d_eff <= d_tilde * (1.0 + 1e-10));
    CHECK(d_tilde <= (1.0 / lambda) * (1.0 + 1e-10));
    CHECK(d_eff <= d_star * (1.0 + 1e-10));
    CHECK(d_star <= static_cast<double>(scaled.size()));
  }
}

TEST_CASE("effective_dim strictly decreases in lambda") {
  const SyntheticInstance inst = random_abstract_instance(55, 10, 25);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-6, 1e-4, 1e-2, 1.0, 1e2}) {
    const double d = effective_dim(inst.gram, lambda);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("snr basics and the two-formula identity") {
  const SyntheticInstance inst = random_abstract_instance(77, 10, 30);

  FixedDesignProblem zero = inst.problem;
  zero.alpha_opt.setZero();
  CHECK(snr(zero, inst.gram) == doctest::Approx(0.0));

  // K = I, mu in range, sigma^2 = |mu|^2 -> snr = 1
  const KernelGram id{Matrix::Identity(4, 4)};
  FixedDesignProblem unit;
  unit.mu = Vector::Ones(4);
  unit.alpha_opt = unit.mu;
  unit.sigma2 = 4.0;
  CHECK(snr(unit, id) == doctest::Approx(1.0));

  // alpha_opt^T K alpha_opt = |K^{dagger/2} P mu|^2 via the eigensystem
  const EigenSystem es = eigh(inst.gram.matrix());
  const double cutoff = inst.gram.rank_tol() * es.values.maxCoeff();
  double h_norm2 = 0.0;
  const Vector beta = es.vectors.transpose() * inst.problem.mu;
  for (Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > cutoff) h_norm2 += beta[i] * beta[i] / es.values[i];
  CHECK(snr(inst.problem, inst.gram) ==
        doctest::Approx(h_norm2 / inst.problem.sigma2).epsilon(1e-9));

  FixedDesignProblem noiseless = inst.problem;
  noiseless.sigma2 = 0.0;
  CHECK_THROWS_AS(snr(noiseless, inst.gram), InputError);
}

TEST_CASE("nystrom_size_bound arithmetic, clamp and monotonicity") {
  // |K| n / (delta lambda) = e makes the log exactly 1
  const double k_norm = std::exp(1.0) * 0.5 * 0.1 / 10.0;
  const SubsamplingBound b = nystrom_size_bound(1.0, 0.5, 0.1, 10, k_norm);
  CHECK(b.raw == doctest::Approx(66.0).epsilon(1e-12));
  CHECK(b.m == 10);  // clamped
  CHECK(b.vacuous);

  const SubsamplingBound big_n = nystrom_size_bound(1.0, 0.5, 0.1, 1000, k_norm * 100);
  CHECK_FALSE(big_n.vacuous);
  CHECK(big_n.m == static_cast<Index>(std::ceil(big_n.raw)));

  double prev = 0.0;
  for (double delta : {0.9, 0.5, 0.1, 0.01}) {
    const SubsamplingBound bound = nystrom_size_bound(2.0, delta, 0.05, 1 << 30, 1.0);
    CHECK(bound.raw > prev);
    prev = bound.raw;
  }
  CHECK_THROWS_AS(nystrom_size_bound(1.0, 1.5, 0.1, 10, 1.0), InputError);
}

TEST_CASE("regime_classify four-way partition") {
  // n = 100, snr = 20: c1 = 100/log(2000) ~ 13.2, c2 = 20/log(20) ~ 6.7
  const Index n = 100;
  const double snr_value = 20.0;
  CHECK(regime_classify(snr_value, 3.0, n) == Regime::nkrls);            // below both
  CHECK(regime_classify(snr_value, 10.0, n) == Regime::nytro);           // < c1, > c2
  CHECK(regime_classify(snr_value, 1000.0, n) == Regime::early_stopping);  // above both

  // krls region needs c2 > c1: snr = 1e6, n = 10: c1 = 10/log(1e7) ~ 0.62,
  // c2 = 1e6/log(1e6) ~ 72382
  CHECK(regime_classify(1e6, 100.0, 10) == Regime::krls);

  // noisy problems with large-but-subsampled dimension prefer NYTRO
  CHECK(regime_classify(0.5, 100.0, 1000) == Regime::nytro);

  // log singularity: snr = 1 sends c2 to infinity (Tikhonov side)
  CHECK(regime_classify(1.0, 5.0, 1000) == Regime::nkrls);
}

TEST_CASE("regime_classify depends only on (snr, d_tilde, n)") {
  // scale-consistency: identical arguments give identical regions regardless
  // of the problem that produced them
  for (int i = 0; i < 10; ++i) {
    Rng rng(300 + static_cast<std::uint64_t>(i));
    const double snr_value = rng.log_uniform(0.01, 100.0);
    const double d_tilde = rng.log_uniform(0.5, 500.0);
    const Index n = 10 + rng.index(10000);
    CHECK(regime_classify(snr_value, d_tilde, n) == regime_classify(snr_value, d_tilde, n));
  }
}

TEST_CASE("regime_profile is internally consistent") {
  const SyntheticInstance inst = random_abstract_instance(91, 15, 40);
  const RegimeProfile profile = regime_profile(inst.problem, inst.gram);
  CHECK(profile.n == inst.gram.size());
  CHECK(profile.snr == doctest::Approx(snr(inst.problem, inst.gram)));
  CHECK(profile.lambda_star == doctest::Approx(1.0 / profile.snr));
  CHECK(profile.d_eff == doctest::Approx(effective_dim(inst.gram, profile.lambda_star)));
  CHECK(profile.d_tilde == doctest::Approx(coherence_dim(inst.gram, profile.lambda_star)));
  CHECK(profile.d_eff <= profile.d_tilde * (1.0 + 1e-10));
  CHECK(profile.region == regime_classify(profile.snr, profile.d_tilde, profile.n));
}
