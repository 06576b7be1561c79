#pragma once
// Exact fixed-design expected-excess-risk computation through Q-matrices,
// plus an independent Monte-Carlo estimator over resampled noise.
//
// Every estimator here is linear in y: coefficients = C y. Its training
// predictions are Q y with Q = K C, and
//   E R = sigma^2/n tr(Q^2)  +  1/n |P (I - Q) mu|^2,
// with P the orthogonal projector onto range(K).

#include "nytro/common.hpp"
#include "nytro/estimators.hpp"
#include "nytro/kernel.hpp"
#include "nytro/spectral.hpp"

#include <cstdint>
#include <optional>

namespace nytro {

// Fixed inputs with random outputs y = mu + noise, noise i.i.d. Gaussian with
// variance sigma2. points is 0 x 0 for abstract instances (gram built
// directly from a spectrum, no point geometry).
struct FixedDesignProblem {
  Matrix points;
  Vector mu;
  double sigma2 = 0.0;
  Vector alpha_opt;  // K^dagger mu
  std::uint64_t noise_seed = 0;
};

struct EstimatorSpec {
  Algorithm algo = Algorithm::kols;
  Regularizer hyper;
};

struct RiskReport {
  double variance = 0.0;     // sigma^2/n tr(Q^2)
  double bias = 0.0;         // 1/n |P(I - Q) mu|^2
  double excess_risk = 0.0;  // variance + bias
  Matrix q_matrix;
};

/// P = K^dagger K (same rank cutoff as pinv/full_dim).
Matrix range_projector(const KernelGram& k);

/// The exact Q of the requested estimator. nf is required for nkrls/nytro.
///   kols:  Q = P
///   krls:  Q = (K + lambda n I)^{-1} K
///   es:    Q = I - (I - gamma/n K)^t
///   nkrls: Q = Z (Z + lambda n I)^{-1},  Z = A A^T
///   nytro: Q = I - (I - gamma/n Z)^t
Matrix q_matrix(const EstimatorSpec& est, const KernelGram& k,
                const NystromFactor* nf = nullptr);

RiskReport expected_excess_risk(const Matrix& q, const KernelGram& k, const Vector& mu,
                                double sigma2);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Empirical mean of 1/n |P(K w - mu)|^2 over freshly drawn noise, fitting
/// with the production estimators (never through a Q-matrix). Trial seeds are
/// derived from (seed, trial), so the result is independent of evaluation
/// order and bitwise reproducible.
MonteCarloEstimate monte_carlo_excess_risk(const FixedDesignProblem& problem,
                                           const KernelGram& k, const EstimatorSpec& est,
                                           const NystromFactor* nf, int trials,
                                           std::uint64_t seed);

struct BiasBoundCheck {
  bool pass = false;
  double q_value = 0.0;  // sup_i (1 - gamma sigma_i / n)^{2t} (sigma_i + n/(gamma t))^2
  double bound = 0.0;    // n^2 / (gamma^2 t^2)
  double margin = 0.0;   // bound - q_value
};

/// Verifies q(A, n/(gamma t)) <= n^2/(gamma^2 t^2) over the spectrum of
/// Z = A A^T. Equality is attained at sigma = 0.
BiasBoundCheck bias_bound_check(const NystromFactor& nf, double gamma, int t);

}  // namespace nytro
