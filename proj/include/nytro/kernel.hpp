#pragma once
// Kernel functions and kernel-matrix assembly (full, cross and subset blocks).

#include "nytro/common.hpp"
#include "nytro/spectral.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace nytro {

enum class KernelFamily { gaussian, linear };

// The Gaussian kernel uses the 2 sigma^2 convention:
//   k(x, x') = exp(-|x - x'|^2 / (2 * bandwidth^2)).
// Bandwidths quoted per dataset (e.g. sigma = 3 for InsuranceCompany) are
// interpreted under this convention.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double bandwidth = 1.0;

  static KernelSpec gaussian(double sigma);
  static KernelSpec linear();
};

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y);

// Symmetric PSD kernel matrix with a lazily cached eigendecomposition shared
// across copies. Immutable once constructed.
class KernelGram {
 public:
  KernelGram() = default;
  explicit KernelGram(Matrix k, std::optional<KernelSpec> spec = std::nullopt);

  const Matrix& matrix() const { return matrix_; }
  Index size() const { return matrix_.rows(); }
  double diag_max() const { return diag_max_; }
  const std::optional<KernelSpec>& spec() const { return spec_; }
  double rank_tol() const { return default_rank_tol(size()); }

  /// Eigendecomposition, computed on first use. Throws NumericError if the
  /// matrix is indefinite beyond -1e-10 * |K|.
  const EigenSystem& eig() const;

  /// Operator norm |K| (largest eigenvalue magnitude).
  double norm() const;

 private:
  Matrix matrix_;
  double diag_max_ = 0.0;
  std::optional<KernelSpec> spec_;

  struct EigCache {
    std::once_flag once;
    EigenSystem sys;
  };
  std::shared_ptr<EigCache> cache_;
};

/// Assemble the full kernel matrix of `points` (rows are points), symmetrized
/// as (K + K^T) / 2 after assembly.
KernelGram gram_full(const KernelSpec& spec, const Matrix& points);

/// n x m block of kernel values against the subset `subset_idx` of `points`.
Matrix gram_cross(const KernelSpec& spec, const Matrix& points,
                  const std::vector<Index>& subset_idx);

/// Kernel block between two point sets: result(i, j) = k(rows_i, cols_j).
Matrix gram_between(const KernelSpec& spec, const Matrix& row_points,
                    const Matrix& col_points);

/// max_i k(x_i, x_i) without assembling the full matrix.
double diag_max_of(const KernelSpec& spec, const Matrix& points);

/// Nystrom factor for a subset of an already-assembled gram; blocks are
/// sliced rather than re-evaluated, and diag_max metadata is carried over.
NystromFactor nystrom_from_gram(const KernelGram& gram, const std::vector<Index>& subset_idx);

}  // namespace nytro
