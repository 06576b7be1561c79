#include "nytro/selection.hpp"

#include <chrono>
#include <cmath>

namespace nytro {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix rows_of(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
  return out;
}

Vector entries_of(const Vector& y, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = y[idx[i]];
  return out;
}

}  // namespace

HoldoutSplit holdout_split(Index n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("holdout_split: fraction must lie in (0, 1)");
  const Index n_val = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  if (n_val < 1 || n_val >= n)
    throw InputError("holdout_split: fraction yields an empty split");
  Rng rng(Rng::derive(seed, 0x686f6c64ULL));
  std::vector<Index> val = rng.sample_without_replacement(n, n_val);
  HoldoutSplit split;
  split.val_idx = val;
  split.train_idx.reserve(static_cast<std::size_t>(n - n_val));
  std::size_t at = 0;
  for (Index i = 0; i < n; ++i) {
    if (at < val.size() && val[at] == i) {
      ++at;
    } else {
      split.train_idx.push_back(i);
    }
  }
  return split;
}

std::vector<double> lambda_grid(int count, double lo, double hi) {
  if (count < 2) throw InputError("lambda_grid: need at least 2 points");
  if (!(lo > 0.0 && lo < hi)) throw InputError("lambda_grid: require 0 < lo < hi");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_lo + (log_hi - log_lo) * i / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double rmse(const Vector& pred, const Vector& y) {
  if (pred.size() != y.size()) throw InputError("rmse: length mismatch");
  if (pred.size() == 0) throw InputError("rmse: empty vectors");
  return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.size()));
}

int early_stop_rule(const std::vector<double>& val_rmse, double threshold, int window) {
  if (val_rmse.empty()) throw InputError("early_stop_rule: empty sequence");
  if (!(threshold > 0.0)) throw InputError("early_stop_rule: threshold must be positive");
  if (window < 1) throw InputError("early_stop_rule: window must be >= 1");
  const int t_max = static_cast<int>(val_rmse.size());
  for (int t = 1; t + window <= t_max; ++t) {
    const double now = val_rmse[static_cast<std::size_t>(t - 1)];
    const double ahead = val_rmse[static_cast<std::size_t>(t - 1 + window)];
    const double improvement = now > 0.0 ? (now - ahead) / now : 0.0;
    if (improvement < threshold) return t;
  }
  return t_max;
}

SelectionReport select_lambda(const std::vector<double>& grid,
                              const std::function<Vector(double)>& fit_val,
                              const Vector& y_val, Algorithm tag) {
  if (grid.empty()) throw InputError("select_lambda: empty grid");
  const auto start = Clock::now();
  SelectionReport report;
  report.algorithm_tag = tag;
  report.validation_curve.reserve(grid.size());
  double best_rmse = std::numeric_limits<double>::infinity();
  double best_lambda = grid.front();
  for (double lambda : grid) {  // ascending: ties end on the largest lambda
    const double err = rmse(fit_val(lambda), y_val);
    report.validation_curve.push_back({lambda, err});
    if (err <= best_rmse) {
      best_rmse = err;
      best_lambda = lambda;
    }
  }
  report.chosen_hyper = best_lambda;
  report.wall_time_s = seconds_since(start);
  return report;
}

SelectionReport select_iterations(
    const std::function<void(const std::function<bool(int, const Vector&)>&)>& run_path,
    const Vector& y_val, double threshold, int window, Algorithm tag) {
  const auto start = Clock::now();
  SelectionReport report;
  report.algorithm_tag = tag;
  std::vector<double> curve;
  run_path([&](int t, const Vector& val_pred) {
    curve.push_back(rmse(val_pred, y_val));
    report.validation_curve.push_back({static_cast<double>(t), curve.back()});
    return true;
  });
  if (curve.empty()) throw InputError("select_iterations: path produced no steps");
  report.chosen_hyper = static_cast<double>(early_stop_rule(curve, threshold, window));
  report.wall_time_s = seconds_since(start);
  return report;
}

ProtocolRun run_holdout_selection(Algorithm algo, const KernelSpec& spec, const Matrix& x,
                                  const Vector& y, const ProtocolConfig& config) {
  if (x.rows() != y.size()) throw InputError("run_holdout_selection: X/y size mismatch");
  const auto start = Clock::now();

  ProtocolRun run;
  HoldoutSplit split = holdout_split(x.rows(), config.holdout_fraction, config.seed);
  run.train_idx = split.train_idx;
  run.val_idx = split.val_idx;

  const Matrix x_train = rows_of(x, split.train_idx);
  const Matrix x_val = rows_of(x, split.val_idx);
  const Vector y_train = entries_of(y, split.train_idx);
  const Vector y_val = entries_of(y, split.val_idx);
  const Index n_train = x_train.rows();

  const std::vector<double> grid =
      lambda_grid(config.lambda_count, config.lambda_lo, config.lambda_hi);

  switch (algo) {
    case Algorithm::kols: {
      const KernelGram k = gram_full(spec, x_train);
      const Matrix k_vt = gram_between(spec, x_val, x_train);
      run.model = fit_kols(k, y_train);
      run.report.algorithm_tag = algo;
      run.report.chosen_hyper = 0.0;
      run.report.validation_curve = {{0.0, rmse(k_vt * run.model.alpha, y_val)}};
      break;
    }
    case Algorithm::krls: {
      const KernelGram k = gram_full(spec, x_train);
      const Matrix k_vt = gram_between(spec, x_val, x_train);
      const EigenSystem& es = k.eig();
      const Vector projected = es.vectors.transpose() * y_train;
      auto alpha_at = [&](double lambda) {
        Vector scaled(projected.size());
        for (Index i = 0; i < projected.size(); ++i) {
          const double s = std::max(es.values[i], 0.0);
          scaled[i] = projected[i] / (s + lambda * static_cast<double>(n_train));
        }
        return (es.vectors * scaled).eval();
      };
      run.report = select_lambda(
          grid, [&](double lambda) { return (k_vt * alpha_at(lambda)).eval(); }, y_val, algo);
      run.model = fit_krls(k, y_train, run.report.chosen_hyper);
      break;
    }
    case Algorithm::early_stopping: {
      const KernelGram k = gram_full(spec, x_train);
      const Matrix k_vt = gram_between(spec, x_val, x_train);
      const double gamma = config.gamma > 0.0 ? config.gamma : default_step_size(k);
      std::vector<Vector> alphas;
      alphas.reserve(static_cast<std::size_t>(config.max_iter));
      run.report = select_iterations(
          [&](const std::function<bool(int, const Vector&)>& on_step) {
            early_stopping_iterate(k, y_train, gamma, config.max_iter,
                                   [&](int t, const Vector& alpha) {
                                     alphas.push_back(alpha);
                                     return on_step(t, (k_vt * alpha).eval());
                                   });
          },
          y_val, config.stop_threshold, config.stop_window, algo);
      const int t_star = static_cast<int>(run.report.chosen_hyper);
      run.model.expansion_idx.resize(static_cast<std::size_t>(n_train));
      for (Index i = 0; i < n_train; ++i) run.model.expansion_idx[static_cast<std::size_t>(i)] = i;
      run.model.alpha = alphas[static_cast<std::size_t>(t_star - 1)];
      run.model.kernel_spec = spec;
      run.model.algorithm_tag = algo;
      run.model.hyper = IterationSchedule{gamma, t_star};
      break;
    }
    case Algorithm::nkrls:
    case Algorithm::nytro: {
      if (config.m < 1 || config.m > n_train)
        throw InputError("run_holdout_selection: subset size m out of range");
      Rng rng(Rng::derive(config.seed, 0x73756273ULL));
      const std::vector<Index> subset = rng.sample_without_replacement(n_train, config.m);
      const Matrix x_sub = rows_of(x_train, subset);
      Matrix k_mm = gram_between(spec, x_sub, x_sub);
      k_mm = ((k_mm + k_mm.transpose()) * 0.5).eval();
      const NystromFactor nf = nystrom_factor(gram_between(spec, x_train, x_sub),
                                              std::move(k_mm), subset,
                                              diag_max_of(spec, x_train));
      const Matrix k_vm = gram_between(spec, x_val, x_sub);

      if (algo == Algorithm::nkrls) {
        // One k x k eigendecomposition serves the whole grid.
        const Index k_rank = nf.rank();
        EigenSystem es;
        Vector coeff;  // V^T A^T y
        if (k_rank > 0) {
          Matrix ata = (nf.a().transpose() * nf.a()).eval();
          ata = ((ata + ata.transpose()) * 0.5).eval();
          es = eigh(ata);
          coeff = es.vectors.transpose() * (nf.a().transpose() * y_train);
        }
        auto alpha_at = [&](double lambda) -> Vector {
          if (k_rank == 0) return Vector::Zero(nf.m());
          Vector scaled(coeff.size());
          for (Index i = 0; i < coeff.size(); ++i) {
            const double s = std::max(es.values[i], 0.0);
            scaled[i] = coeff[i] / (s + lambda * static_cast<double>(n_train));
          }
          return nf.r() * (es.vectors * scaled);
        };
        run.report = select_lambda(
            grid, [&](double lambda) { return (k_vm * alpha_at(lambda)).eval(); }, y_val,
            algo);
        run.model.expansion_idx = subset;
        run.model.alpha = alpha_at(run.report.chosen_hyper);
        run.model.kernel_spec = spec;
        run.model.algorithm_tag = algo;
        run.model.hyper = RidgePenalty{run.report.chosen_hyper};
      } else {
        const double gamma = config.gamma > 0.0 ? config.gamma : default_step_size(nf);
        std::vector<Vector> betas;
        betas.reserve(static_cast<std::size_t>(config.max_iter));
        run.report = select_iterations(
            [&](const std::function<bool(int, const Vector&)>& on_step) {
              nytro_iterate(nf, y_train, gamma, config.max_iter,
                            [&](int t, const Vector& beta) {
                              betas.push_back(beta);
                              return on_step(t, (k_vm * (nf.r() * beta)).eval());
                            });
            },
            y_val, config.stop_threshold, config.stop_window, algo);
        const int t_star = static_cast<int>(run.report.chosen_hyper);
        run.model.expansion_idx = subset;
        run.model.alpha = nf.r() * betas[static_cast<std::size_t>(t_star - 1)];
        run.model.kernel_spec = spec;
        run.model.algorithm_tag = algo;
        run.model.hyper = IterationSchedule{gamma, t_star};
      }
      break;
    }
  }

  run.report.wall_time_s = seconds_since(start);
  return run;
}

}  // namespace nytro
