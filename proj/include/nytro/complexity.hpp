#pragma once
// Dimension measures, signal-to-noise ratio, the subsampling-size bound and
// the computational-regime classifier.

#include "nytro/common.hpp"
#include "nytro/kernel.hpp"
#include "nytro/risk_oracle.hpp"

#include <string>

namespace nytro {

/// d* = rank K: eigenvalues above rank_tol * sigma_1. rank_tol < 0 selects
/// the default n * eps.
Index full_dim(const KernelGram& k, double rank_tol = -1.0);

/// d_eff(lambda) = tr(K (K + lambda n I)^{-1})
double effective_dim(const KernelGram& k, double lambda);

/// d~(lambda) = n max_i (K (K + lambda n I)^{-1})_ii
double coherence_dim(const KernelGram& k, double lambda);

/// SNR = |f_opt|_H^2 / sigma^2 = alpha_opt^T K alpha_opt / sigma^2
double snr(const FixedDesignProblem& problem, const KernelGram& k);

/// The oracle ridge parameter 1 / (n * SNR): the value at which the KRLS
/// excess risk is provably dominated by sigma^2 d_eff / n.
double oracle_lambda(double snr_value, Index n);

struct SubsamplingBound {
  Index m = 0;        // clamped to [1, n]
  bool vacuous = false;  // raw bound exceeded n
  double raw = 0.0;
};

/// m >= (32 d~(lambda)/delta + 2) log(|K| n / (delta lambda)), delta in (0,1).
SubsamplingBound nystrom_size_bound(double d_tilde, double delta, double lambda, Index n,
                                    double k_norm);

enum class Regime { nytro, early_stopping, nkrls, krls };

std::string regime_name(Regime r);

/// Four-way partition of the (SNR, d~) plane by the comparator curves
///   c1(SNR) = n / |log(n SNR)|   (subsampled below, exact above)
///   c2(SNR) = SNR / |log SNR|    (Tikhonov below, iterative above)
/// Ties resolve toward the cheaper side (subsampling, iterative); a singular
/// log (argument 1) sends the curve to +infinity.
Regime regime_classify(double snr_value, double d_tilde, Index n);

struct RegimeProfile {
  Index d_star = 0;
  double d_eff = 0.0;      // at lambda*
  double d_tilde = 0.0;    // at lambda*
  double snr = 0.0;
  double lambda_star = 0.0;
  Index n = 0;
  Regime region = Regime::krls;
  double c1 = 0.0;
  double c2 = 0.0;
};

RegimeProfile regime_profile(const FixedDesignProblem& problem, const KernelGram& k);

}  // namespace nytro
