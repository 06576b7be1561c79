#include "nytro/risk_oracle.hpp"

#include <cmath>

namespace nytro {

namespace {

const RidgePenalty& ridge_of(const EstimatorSpec& est, const char* who) {
  const auto* ridge = std::get_if<RidgePenalty>(&est.hyper);
  if (!ridge || !(ridge->lambda > 0.0))
    throw InputError(std::string(who) + ": estimator needs a positive lambda");
  return *ridge;
}

const IterationSchedule& schedule_of(const EstimatorSpec& est, const char* who) {
  const auto* sched = std::get_if<IterationSchedule>(&est.hyper);
  if (!sched || sched->steps < 1 || !(sched->gamma > 0.0))
    throw InputError(std::string(who) + ": estimator needs (gamma > 0, steps >= 1)");
  return *sched;
}

// 1 - (1 - gamma sigma / n)^t, clamping tiny negative eigenvalues to 0.
double landweber_filter(double sigma, double gamma, double n, int t) {
  const double s = std::max(sigma, 0.0);
  return 1.0 - std::pow(1.0 - gamma * s / n, static_cast<double>(t));
}

Matrix symmetrized(Matrix m) { return ((m + m.transpose()) * 0.5).eval(); }

}  // namespace

Matrix range_projector(const KernelGram& k) {
  const EigenSystem& es = k.eig();
  const double cutoff = k.rank_tol() * std::max(0.0, es.values.maxCoeff());
  Vector ind(es.values.size());
  for (Index i = 0; i < es.values.size(); ++i)
    ind[i] = es.values[i] > cutoff ? 1.0 : 0.0;
  return es.vectors * ind.asDiagonal() * es.vectors.transpose();
}

Matrix q_matrix(const EstimatorSpec& est, const KernelGram& k, const NystromFactor* nf) {
  const double n = static_cast<double>(k.size());
  switch (est.algo) {
    case Algorithm::kols:
      return range_projector(k);
    case Algorithm::krls: {
      const double lambda = ridge_of(est, "q_matrix").lambda;
      return apply_spectral(
          [&](double sigma) {
            const double s = std::max(sigma, 0.0);
            return s / (s + lambda * n);
          },
          k.eig());
    }
    case Algorithm::early_stopping: {
      const auto& sched = schedule_of(est, "q_matrix");
      check_early_stopping_step_size(k, sched.gamma);
      return apply_spectral(
          [&](double sigma) { return landweber_filter(sigma, sched.gamma, n, sched.steps); },
          k.eig());
    }
    case Algorithm::nkrls: {
      if (!nf) throw InputError("q_matrix: nkrls needs a NystromFactor");
      const double lambda = ridge_of(est, "q_matrix").lambda;
      if (nf->rank() == 0) return Matrix::Zero(k.size(), k.size());
      Matrix system = (nf->a().transpose() * nf->a()).eval();
      system.diagonal().array() += lambda * n;
      const Matrix q = nf->a() * system.llt().solve(nf->a().transpose());
      return symmetrized(q);
    }
    case Algorithm::nytro: {
      if (!nf) throw InputError("q_matrix: nytro needs a NystromFactor");
      const auto& sched = schedule_of(est, "q_matrix");
      check_nytro_step_size(*nf, sched.gamma);
      if (nf->rank() == 0) return Matrix::Zero(k.size(), k.size());
      const Matrix z = symmetrized(nf->a() * nf->a().transpose());
      return apply_spectral(
          [&](double sigma) { return landweber_filter(sigma, sched.gamma, n, sched.steps); },
          z);
    }
  }
  throw InputError("q_matrix: unknown algorithm");
}

RiskReport expected_excess_risk(const Matrix& q, const KernelGram& k, const Vector& mu,
                                double sigma2) {
  const Index n = k.size();
  if (q.rows() != n || q.cols() != n)
    throw InputError("expected_excess_risk: Q must be n x n");
  if (mu.size() != n) throw InputError("expected_excess_risk: mu length mismatch");
  RiskReport report;
  report.q_matrix = q;
  // tr(Q^2) = sum_ij Q_ij Q_ji, exact for non-symmetric Q as well
  report.variance =
      sigma2 / static_cast<double>(n) * q.cwiseProduct(q.transpose()).sum();
  const Matrix p = range_projector(k);
  const Vector residual_mean = p * (mu - q * mu);
  report.bias = residual_mean.squaredNorm() / static_cast<double>(n);
  report.excess_risk = report.variance + report.bias;
  return report;
}

MonteCarloEstimate monte_carlo_excess_risk(const FixedDesignProblem& problem,
                                           const KernelGram& k, const EstimatorSpec& est,
                                           const NystromFactor* nf, int trials,
                                           std::uint64_t seed) {
  if (trials < 2) throw InputError("monte_carlo_excess_risk: need at least 2 trials");
  const Index n = k.size();
  if (problem.mu.size() != n)
    throw InputError("monte_carlo_excess_risk: mu length does not match gram");
  if ((est.algo == Algorithm::nkrls || est.algo == Algorithm::nytro) && !nf)
    throw InputError("monte_carlo_excess_risk: estimator needs a NystromFactor");

  const Matrix p = range_projector(k);
  const double sigma = std::sqrt(std::max(problem.sigma2, 0.0));

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(trial)));
    const Vector y = problem.mu + sigma * rng.normal_vector(n);

    Vector fitted;  // predictions on the training inputs
    switch (est.algo) {
      case Algorithm::kols:
        fitted = k.matrix() * fit_kols(k, y).alpha;
        break;
      case Algorithm::krls:
        fitted = k.matrix() * fit_krls(k, y, ridge_of(est, "monte_carlo").lambda).alpha;
        break;
      case Algorithm::early_stopping: {
        const auto& sched = schedule_of(est, "monte_carlo");
        Vector last;
        early_stopping_iterate(k, y, sched.gamma, sched.steps,
                               [&](int, const Vector& alpha) {
                                 last = alpha;
                                 return true;
                               });
        fitted = k.matrix() * last;
        break;
      }
      case Algorithm::nkrls:
        fitted = nf->k_nm() * fit_nkrls(*nf, y, ridge_of(est, "monte_carlo").lambda).alpha;
        break;
      case Algorithm::nytro: {
        const auto& sched = schedule_of(est, "monte_carlo");
        Vector last;
        nytro_iterate(*nf, y, sched.gamma, sched.steps, [&](int, const Vector& beta) {
          last = beta;
          return true;
        });
        fitted = nf->k_nm() * (nf->r() * last);
        break;
      }
    }

    const double risk = (p * (fitted - problem.mu)).squaredNorm() / static_cast<double>(n);
    sum += risk;
    sum_sq += risk * risk;
  }

  MonteCarloEstimate out;
  out.trials = trials;
  out.estimate = sum / trials;
  const double var = std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
  out.std_error = std::sqrt(var / trials);
  return out;
}

BiasBoundCheck bias_bound_check(const NystromFactor& nf, double gamma, int t) {
  if (t < 1) throw InputError("bias_bound_check: t must be >= 1");
  check_nytro_step_size(nf, gamma);
  const double n = static_cast<double>(nf.n());
  const double lambda_n = n / (gamma * t);

  // Spectrum of Z = A A^T: the eigenvalues of A^T A plus n - k zeros.
  Vector sigmas;
  if (nf.rank() > 0) {
    Matrix ata = (nf.a().transpose() * nf.a()).eval();
    ata = ((ata + ata.transpose()) * 0.5).eval();
    sigmas = eigh(ata).values;
  }

  auto term = [&](double sigma) {
    const double s = std::max(sigma, 0.0);
    return std::pow(1.0 - gamma * s / n, 2.0 * t) * (s + lambda_n) * (s + lambda_n);
  };

  BiasBoundCheck check;
  check.bound = lambda_n * lambda_n;
  check.q_value = nf.rank() < nf.n() ? term(0.0) : 0.0;
  for (Index i = 0; i < sigmas.size(); ++i)
    check.q_value = std::max(check.q_value, term(sigmas[i]));
  check.margin = check.bound - check.q_value;
  check.pass = check.q_value <= check.bound * (1.0 + 1e-12);
  return check;
}

}  // namespace nytro
