#pragma once
// The five learning algorithms. Direct methods return a single coefficient
// model; iterative methods return the full regularization path.

#include "nytro/common.hpp"
#include "nytro/kernel.hpp"
#include "nytro/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nytro {

enum class Algorithm { kols, krls, early_stopping, nkrls, nytro };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct RidgePenalty {
  double lambda = 0.0;
};

struct IterationSchedule {
  double gamma = 0.0;
  int steps = 0;
};

// KOLS carries no regularizer (monostate).
using Regularizer = std::variant<std::monostate, RidgePenalty, IterationSchedule>;

// f(x) = sum_i alpha_i k(x, x_expansion[i]); expansion indices refer to the
// training set the model was fitted on.
struct CoefficientModel {
  std::vector<Index> expansion_idx;
  Vector alpha;
  std::optional<KernelSpec> kernel_spec;
  Algorithm algorithm_tag = Algorithm::kols;
  Regularizer hyper;
};

// Snapshots of an iterative fit at t = 1..T. beta_state holds the internal
// k-vector of the NYTRO recursion (empty for early stopping, whose state is
// the coefficient vector itself).
struct IterationPath {
  std::vector<CoefficientModel> models;
  double gamma = 0.0;
  std::vector<Vector> beta_state;

  const CoefficientModel& at_step(int t) const;  // 1-based
};

/// alpha = K^dagger y
CoefficientModel fit_kols(const KernelGram& k, const Vector& y);

/// alpha = (K + lambda n I)^{-1} y, lambda > 0
CoefficientModel fit_krls(const KernelGram& k, const Vector& y, double lambda);

/// Gradient descent on the empirical risk from alpha_0 = 0:
///   alpha_t = alpha_{t-1} - gamma/n (K alpha_{t-1} - y)
/// Requires gamma |K| <= n.
IterationPath fit_early_stopping(const KernelGram& k, const Vector& y, double gamma, int steps);

/// Nystrom ridge via the R-factor form alpha = R (A^T A + lambda n I)^{-1} A^T y.
CoefficientModel fit_nkrls(const NystromFactor& nf, const Vector& y, double lambda,
                           std::optional<KernelSpec> spec = std::nullopt);

/// Reference route for the same estimator:
/// alpha = (K_nm^T K_nm + lambda n K_mm)^dagger K_nm^T y. Predictions agree
/// with fit_nkrls; kept as the independent side of that check.
CoefficientModel fit_nkrls_direct(const NystromFactor& nf, const Vector& y, double lambda,
                                  std::optional<KernelSpec> spec = std::nullopt);

/// Gradient descent restricted to the Nystrom subspace, beta_0 = 0:
///   beta_t = beta_{t-1} - gamma/n R^T (K_nm^T (K_nm (R beta_{t-1}) - y))
/// Requires gamma |A A^T| <= n. Each stored model has alpha = R beta_t.
IterationPath fit_nytro(const NystromFactor& nf, const Vector& y, double gamma, int steps,
                        std::optional<KernelSpec> spec = std::nullopt);

/// Kernel expansion of `model` evaluated at each query point.
Vector predict(const CoefficientModel& model, const KernelSpec& spec,
               const Matrix& train_points, const Matrix& query_points);

/// Predictions on the training inputs: K[:, expansion_idx] * alpha.
Vector training_predictions(const CoefficientModel& model, const KernelGram& k);

// --- single recursion steps (pure; the path fitters and the replay tests
// --- both call exactly these)

Vector early_stopping_step(const KernelGram& k, const Vector& y, double gamma,
                           const Vector& alpha);
Vector nytro_step(const NystromFactor& nf, const Vector& y, double gamma, const Vector& beta);

// --- incremental drivers: invoke on_step(t, state_t) for t = 1..steps while
// --- it returns true; state is alpha for early stopping, beta for NYTRO.
// --- Used by model selection to stream the regularization path in one fit.

void early_stopping_iterate(const KernelGram& k, const Vector& y, double gamma, int steps,
                            const std::function<bool(int, const Vector&)>& on_step);
void nytro_iterate(const NystromFactor& nf, const Vector& y, double gamma, int steps,
                   const std::function<bool(int, const Vector&)>& on_step);

/// Default step size gamma = 1 / max_i k(x_i, x_i).
double default_step_size(const KernelGram& k);
double default_step_size(const NystromFactor& nf);

void check_early_stopping_step_size(const KernelGram& k, double gamma);
void check_nytro_step_size(const NystromFactor& nf, double gamma);

}  // namespace nytro
