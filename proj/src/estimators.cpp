#include "nytro/estimators.hpp"

#include <cmath>

namespace nytro {

namespace {

constexpr double kStepSlack = 1.0 + 1e-9;

std::vector<Index> all_indices(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kols: return "kols";
    case Algorithm::krls: return "krls";
    case Algorithm::early_stopping: return "early_stopping";
    case Algorithm::nkrls: return "nkrls";
    case Algorithm::nytro: return "nytro";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "kols") return Algorithm::kols;
  if (name == "krls") return Algorithm::krls;
  if (name == "early_stopping" || name == "es") return Algorithm::early_stopping;
  if (name == "nkrls") return Algorithm::nkrls;
  if (name == "nytro") return Algorithm::nytro;
  throw InputError("unknown algorithm: " + name);
}

const CoefficientModel& IterationPath::at_step(int t) const {
  if (t < 1 || t > static_cast<int>(models.size()))
    throw InputError("IterationPath: step out of range");
  return models[static_cast<std::size_t>(t - 1)];
}

double default_step_size(const KernelGram& k) { return 1.0 / k.diag_max(); }

double default_step_size(const NystromFactor& nf) {
  if (nf.source_diag_max()) return 1.0 / *nf.source_diag_max();
  const double z = nf.z_norm();
  return z > 0.0 ? static_cast<double>(nf.n()) / z : 1.0;
}

void check_early_stopping_step_size(const KernelGram& k, double gamma) {
  if (!(gamma > 0.0)) throw InputError("early stopping: step size must be positive");
  // |K| <= n * max_i K_ii for PSD K, so gamma <= 1/diag_max is always valid.
  if (gamma * k.diag_max() <= kStepSlack) return;
  if (gamma * k.norm() > static_cast<double>(k.size()) * kStepSlack)
    throw InputError("early stopping: step size violates gamma |K| <= n");
}

void check_nytro_step_size(const NystromFactor& nf, double gamma) {
  if (!(gamma > 0.0)) throw InputError("nytro: step size must be positive");
  if (nf.source_diag_max() && gamma * *nf.source_diag_max() <= kStepSlack) return;
  if (gamma * nf.z_norm() > static_cast<double>(nf.n()) * kStepSlack)
    throw InputError("nytro: step size violates gamma |A A^T| <= n");
}

CoefficientModel fit_kols(const KernelGram& k, const Vector& y) {
  if (y.size() != k.size()) throw InputError("fit_kols: y length does not match gram");
  const EigenSystem& es = k.eig();
  const double cutoff = k.rank_tol() * std::max(0.0, es.values.maxCoeff());
  Vector inv(es.values.size());
  for (Index i = 0; i < es.values.size(); ++i)
    inv[i] = es.values[i] > cutoff && es.values[i] > 0.0 ? 1.0 / es.values[i] : 0.0;
  CoefficientModel model;
  model.expansion_idx = all_indices(k.size());
  model.alpha = es.vectors * (inv.asDiagonal() * (es.vectors.transpose() * y));
  model.kernel_spec = k.spec();
  model.algorithm_tag = Algorithm::kols;
  model.hyper = std::monostate{};
  return model;
}

CoefficientModel fit_krls(const KernelGram& k, const Vector& y, double lambda) {
  if (!(lambda > 0.0)) throw InputError("fit_krls: lambda must be positive");
  if (y.size() != k.size()) throw InputError("fit_krls: y length does not match gram");
  const Index n = k.size();
  Matrix system = k.matrix();
  system.diagonal().array() += lambda * static_cast<double>(n);
  CoefficientModel model;
  model.expansion_idx = all_indices(n);
  model.alpha = system.ldlt().solve(y);
  model.kernel_spec = k.spec();
  model.algorithm_tag = Algorithm::krls;
  model.hyper = RidgePenalty{lambda};
  return model;
}

Vector early_stopping_step(const KernelGram& k, const Vector& y, double gamma,
                           const Vector& alpha) {
  const double n = static_cast<double>(k.size());
  return alpha - (gamma / n) * (k.matrix() * alpha - y);
}

void early_stopping_iterate(const KernelGram& k, const Vector& y, double gamma, int steps,
                            const std::function<bool(int, const Vector&)>& on_step) {
  if (steps < 1) throw InputError("early stopping: need at least one step");
  if (y.size() != k.size()) throw InputError("early stopping: y length does not match gram");
  check_early_stopping_step_size(k, gamma);
  Vector alpha = Vector::Zero(k.size());
  for (int t = 1; t <= steps; ++t) {
    alpha = early_stopping_step(k, y, gamma, alpha);
    if (!on_step(t, alpha)) return;
  }
}

IterationPath fit_early_stopping(const KernelGram& k, const Vector& y, double gamma,
                                 int steps) {
  IterationPath path;
  path.gamma = gamma;
  path.models.reserve(static_cast<std::size_t>(steps));
  early_stopping_iterate(k, y, gamma, steps, [&](int t, const Vector& alpha) {
    CoefficientModel model;
    model.expansion_idx = all_indices(k.size());
    model.alpha = alpha;
    model.kernel_spec = k.spec();
    model.algorithm_tag = Algorithm::early_stopping;
    model.hyper = IterationSchedule{gamma, t};
    path.models.push_back(std::move(model));
    return true;
  });
  return path;
}

CoefficientModel fit_nkrls(const NystromFactor& nf, const Vector& y, double lambda,
                           std::optional<KernelSpec> spec) {
  if (!(lambda > 0.0)) throw InputError("fit_nkrls: lambda must be positive");
  if (y.size() != nf.n()) throw InputError("fit_nkrls: y length does not match K_nm");
  const double n = static_cast<double>(nf.n());
  CoefficientModel model;
  model.expansion_idx = nf.subset();
  model.kernel_spec = spec;
  model.algorithm_tag = Algorithm::nkrls;
  model.hyper = RidgePenalty{lambda};
  if (nf.rank() == 0) {
    model.alpha = Vector::Zero(nf.m());
    return model;
  }
  Matrix system = (nf.a().transpose() * nf.a()).eval();
  system.diagonal().array() += lambda * n;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw NumericError("fit_nkrls: Cholesky of A^T A + lambda n I failed");
  model.alpha = nf.r() * llt.solve(nf.a().transpose() * y);
  return model;
}

CoefficientModel fit_nkrls_direct(const NystromFactor& nf, const Vector& y, double lambda,
                                  std::optional<KernelSpec> spec) {
  if (!(lambda > 0.0)) throw InputError("fit_nkrls_direct: lambda must be positive");
  if (y.size() != nf.n()) throw InputError("fit_nkrls_direct: y length does not match K_nm");
  const double n = static_cast<double>(nf.n());
  Matrix system = (nf.k_nm().transpose() * nf.k_nm() + lambda * n * nf.k_mm()).eval();
  system = ((system + system.transpose()) * 0.5).eval();
  CoefficientModel model;
  model.expansion_idx = nf.subset();
  model.alpha = pinv(system) * (nf.k_nm().transpose() * y);
  model.kernel_spec = spec;
  model.algorithm_tag = Algorithm::nkrls;
  model.hyper = RidgePenalty{lambda};
  return model;
}

Vector nytro_step(const NystromFactor& nf, const Vector& y, double gamma, const Vector& beta) {
  const double n = static_cast<double>(nf.n());
  const Vector expanded = nf.r() * beta;                       // m
  const Vector residual = nf.k_nm() * expanded - y;            // n
  const Vector grad = nf.r().transpose() * (nf.k_nm().transpose() * residual);  // k
  return beta - (gamma / n) * grad;
}

void nytro_iterate(const NystromFactor& nf, const Vector& y, double gamma, int steps,
                   const std::function<bool(int, const Vector&)>& on_step) {
  if (steps < 1) throw InputError("nytro: need at least one step");
  if (y.size() != nf.n()) throw InputError("nytro: y length does not match K_nm");
  check_nytro_step_size(nf, gamma);
  Vector beta = Vector::Zero(nf.rank());
  for (int t = 1; t <= steps; ++t) {
    beta = nytro_step(nf, y, gamma, beta);
    if (!on_step(t, beta)) return;
  }
}

IterationPath fit_nytro(const NystromFactor& nf, const Vector& y, double gamma, int steps,
                        std::optional<KernelSpec> spec) {
  IterationPath path;
  path.gamma = gamma;
  path.models.reserve(static_cast<std::size_t>(steps));
  path.beta_state.reserve(static_cast<std::size_t>(steps));
  nytro_iterate(nf, y, gamma, steps, [&](int t, const Vector& beta) {
    CoefficientModel model;
    model.expansion_idx = nf.subset();
    model.alpha = nf.r() * beta;
    model.kernel_spec = spec;
    model.algorithm_tag = Algorithm::nytro;
    model.hyper = IterationSchedule{gamma, t};
    path.models.push_back(std::move(model));
    path.beta_state.push_back(beta);
    return true;
  });
  return path;
}

Vector predict(const CoefficientModel& model, const KernelSpec& spec,
               const Matrix& train_points, const Matrix& query_points) {
  if (train_points.cols() != query_points.cols())
    throw InputError("predict: point dimensions differ");
  const Index m = static_cast<Index>(model.expansion_idx.size());
  if (model.alpha.size() != m)
    throw InputError("predict: coefficient count does not match expansion");
  Matrix expansion(m, train_points.cols());
  for (Index i = 0; i < m; ++i) {
    const Index idx = model.expansion_idx[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= train_points.rows())
      throw InputError("predict: expansion index out of range");
    expansion.row(i) = train_points.row(idx);
  }
  return gram_between(spec, query_points, expansion) * model.alpha;
}

Vector training_predictions(const CoefficientModel& model, const KernelGram& k) {
  const Index m = static_cast<Index>(model.expansion_idx.size());
  if (model.alpha.size() != m)
    throw InputError("training_predictions: coefficient count does not match expansion");
  Vector out = Vector::Zero(k.size());
  for (Index j = 0; j < m; ++j) {
    const Index idx = model.expansion_idx[static_cast<std::size_t>(j)];
    if (idx < 0 || idx >= k.size())
      throw InputError("training_predictions: expansion index out of range");
    out += model.alpha[j] * k.matrix().col(idx);
  }
  return out;
}

}  // namespace nytro
