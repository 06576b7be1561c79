#include "nytro/complexity.hpp"

#include <cmath>
#include <limits>

namespace nytro {

Index full_dim(const KernelGram& k, double rank_tol) {
  const EigenSystem& es = k.eig();
  if (rank_tol < 0) rank_tol = k.rank_tol();
  const double cutoff = rank_tol * std::max(0.0, es.values.maxCoeff());
  Index count = 0;
  for (Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > cutoff) ++count;
  return count;
}

double effective_dim(const KernelGram& k, double lambda) {
  if (!(lambda > 0.0)) throw InputError("effective_dim: lambda must be positive");
  const EigenSystem& es = k.eig();
  const double n = static_cast<double>(k.size());
  double sum = 0.0;
  for (Index i = 0; i < es.values.size(); ++i) {
    const double s = std::max(es.values[i], 0.0);
    sum += s / (s + lambda * n);
  }
  return sum;
}

double coherence_dim(const KernelGram& k, double lambda) {
  if (!(lambda > 0.0)) throw InputError("coherence_dim: lambda must be positive");
  const EigenSystem& es = k.eig();
  const double n = static_cast<double>(k.size());
  // diag of U f(Sigma) U^T without forming the full product
  double best = 0.0;
  for (Index i = 0; i < k.size(); ++i) {
    double diag = 0.0;
    for (Index j = 0; j < k.size(); ++j) {
      const double s = std::max(es.values[j], 0.0);
      diag += es.vectors(i, j) * es.vectors(i, j) * s / (s + lambda * n);
    }
    best = std::max(best, diag);
  }
  return n * best;
}

double snr(const FixedDesignProblem& problem, const KernelGram& k) {
  if (!(problem.sigma2 > 0.0)) throw InputError("snr: sigma2 must be positive");
  if (problem.alpha_opt.size() != k.size())
    throw InputError("snr: alpha_opt length does not match gram");
  return problem.alpha_opt.dot(k.matrix() * problem.alpha_opt) / problem.sigma2;
}

double oracle_lambda(double snr_value, Index n) {
  if (!(snr_value > 0.0)) throw InputError("oracle_lambda: snr must be positive");
  return 1.0 / (static_cast<double>(n) * snr_value);
}

SubsamplingBound nystrom_size_bound(double d_tilde, double delta, double lambda, Index n,
                                    double k_norm) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InputError("nystrom_size_bound: delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw InputError("nystrom_size_bound: lambda must be positive");
  SubsamplingBound out;
  out.raw = (32.0 * d_tilde / delta + 2.0) *
            std::log(k_norm * static_cast<double>(n) / (delta * lambda));
  double clamped = std::ceil(out.raw);
  if (clamped > static_cast<double>(n)) {
    out.vacuous = true;
    clamped = static_cast<double>(n);
  }
  if (clamped < 1.0) clamped = 1.0;
  out.m = static_cast<Index>(clamped);
  return out;
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::nytro: return "nytro";
    case Regime::early_stopping: return "early_stopping";
    case Regime::nkrls: return "nkrls";
    case Regime::krls: return "krls";
  }
  return "unknown";
}

namespace {

// curve value with the log-singularity sent to +infinity
double comparator(double numerator, double log_arg) {
  const double l = std::abs(std::log(log_arg));
  if (l == 0.0) return std::numeric_limits<double>::infinity();
  return numerator / l;
}

}  // namespace

Regime regime_classify(double snr_value, double d_tilde, Index n) {
  if (!(snr_value > 0.0)) throw InputError("regime_classify: snr must be positive");
  if (!(d_tilde > 0.0)) throw InputError("regime_classify: d_tilde must be positive");
  const double c1 = comparator(static_cast<double>(n), static_cast<double>(n) * snr_value);
  const double c2 = comparator(snr_value, snr_value);
  const bool subsampled = d_tilde <= c1;  // tie -> subsampling
  const bool iterative = d_tilde >= c2;   // tie -> iterative
  if (subsampled) return iterative ? Regime::nytro : Regime::nkrls;
  return iterative ? Regime::early_stopping : Regime::krls;
}

RegimeProfile regime_profile(const FixedDesignProblem& problem, const KernelGram& k) {
  RegimeProfile profile;
  profile.n = k.size();
  profile.snr = snr(problem, k);
  profile.lambda_star = 1.0 / profile.snr;
  profile.d_star = full_dim(k);
  profile.d_eff = effective_dim(k, profile.lambda_star);
  profile.d_tilde = coherence_dim(k, profile.lambda_star);
  profile.c1 = comparator(static_cast<double>(profile.n),
                          static_cast<double>(profile.n) * profile.snr);
  profile.c2 = comparator(profile.snr, profile.snr);
  profile.region = regime_classify(profile.snr, profile.d_tilde, profile.n);
  return profile;
}

}  // namespace nytro
