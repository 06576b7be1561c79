#pragma once
// Hold-out model selection: lambda grid search for the Tikhonov estimators,
// the relative-improvement stopping rule for the iterative ones, RMSE metric.

#include "nytro/common.hpp"
#include "nytro/estimators.hpp"
#include "nytro/kernel.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace nytro {

struct ValidationPoint {
  double hyper = 0.0;  // lambda, or the iteration count t
  double rmse = 0.0;
};

struct SelectionReport {
  Algorithm algorithm_tag = Algorithm::krls;
  double chosen_hyper = 0.0;
  std::vector<ValidationPoint> validation_curve;  // ordered by hyper
  double wall_time_s = 0.0;
};

struct HoldoutSplit {
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
};

/// Disjoint uniform split with |val| = round(fraction * n), seed-deterministic.
HoldoutSplit holdout_split(Index n, double fraction, std::uint64_t seed);

/// Log-spaced grid of `count` values inclusive of both endpoints, ascending.
std::vector<double> lambda_grid(int count, double lo, double hi);

double rmse(const Vector& pred, const Vector& y);

/// Smallest t whose relative improvement (rmse[t] - rmse[t+w]) / rmse[t] over
/// the look-ahead window w drops below `threshold`; T if never. 1-based.
int early_stop_rule(const std::vector<double>& val_rmse, double threshold, int window = 1);

/// Grid search: fit_val(lambda) returns validation predictions; the chosen
/// lambda minimizes validation RMSE, ties resolving to the largest lambda.
SelectionReport select_lambda(const std::vector<double>& grid,
                              const std::function<Vector(double)>& fit_val,
                              const Vector& y_val, Algorithm tag);

/// Streaming selection for iterative methods. run_path is invoked exactly
/// once; it must call its argument with (t, validation predictions) for
/// t = 1, 2, ... as long as it returns true.
SelectionReport select_iterations(
    const std::function<void(const std::function<bool(int, const Vector&)>&)>& run_path,
    const Vector& y_val, double threshold, int window, Algorithm tag);

// Full hold-out protocol: 20% validation split, 100 log-spaced lambdas in
// [1e-15, 1] for kols/krls/nkrls, iteration cap plus the 5% stopping rule for
// early stopping / NYTRO. Iterative methods compute the whole validation
// curve from a single fit.
struct ProtocolConfig {
  double holdout_fraction = 0.2;
  int lambda_count = 100;
  double lambda_lo = 1e-15;
  double lambda_hi = 1.0;
  int max_iter = 500;
  double stop_threshold = 0.05;
  int stop_window = 1;
  Index m = 0;               // subset size (nkrls / nytro)
  double gamma = 0.0;        // 0 -> 1 / max_i k(x_i, x_i)
  std::uint64_t seed = 0;
};

struct ProtocolRun {
  SelectionReport report;
  CoefficientModel model;  // fitted on the training split at the chosen hyper
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
};

ProtocolRun run_holdout_selection(Algorithm algo, const KernelSpec& spec, const Matrix& x,
                                  const Vector& y, const ProtocolConfig& config);

}  // namespace nytro
