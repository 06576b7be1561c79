#pragma once
// Symmetric eigendecomposition, spectral-function application, pseudo-inverse
// and the Nystrom R-factor (economic QR + Cholesky).

#include "nytro/common.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace nytro {

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
struct EigenSystem {
  Matrix vectors;  // orthonormal columns U
  Vector values;   // sigma_1 >= ... >= sigma_n

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/// Decompose a symmetric matrix. Throws InputError if the input is
/// asymmetric beyond 1e-12 relative.
EigenSystem eigh(const Matrix& a);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues
/// sigma_i > rank_tol * sigma_1 are inverted, the rest zeroed.
/// rank_tol < 0 selects the default n * eps.
Matrix pinv(const Matrix& a, double rank_tol = -1.0);

Matrix apply_spectral(const std::function<double(double)>& f, const EigenSystem& es);
Matrix apply_spectral(const std::function<double(double)>& f, const Matrix& a);

// Nystrom subset factor: R with R R^T = K_mm^dagger, built from the economic
// QR of K_mm and the Cholesky factor of S^T K_mm S. A = K_nm R is cached on
// first use; downstream quantities depend on it only through A A^T, so the
// column signs of R are unconstrained.
class NystromFactor {
 public:
  NystromFactor(Matrix k_nm, Matrix k_mm, std::vector<Index> subset_idx, Matrix r,
                std::optional<double> source_diag_max);

  const std::vector<Index>& subset() const { return subset_idx_; }
  const Matrix& k_nm() const { return k_nm_; }
  const Matrix& k_mm() const { return k_mm_; }
  const Matrix& r() const { return r_; }
  Index rank() const { return r_.cols(); }
  Index n() const { return k_nm_.rows(); }
  Index m() const { return k_mm_.rows(); }

  // max_i k(x_i, x_i) of the source kernel matrix, when known; used for the
  // cheap step-size validity bound |Z| <= n * diag_max.
  std::optional<double> source_diag_max() const { return source_diag_max_; }

  /// A = K_nm * R, computed lazily and shared across copies.
  const Matrix& a() const;

  /// Operator norm of Z = A A^T (largest eigenvalue of A^T A), lazy.
  double z_norm() const;

 private:
  std::vector<Index> subset_idx_;
  Matrix k_nm_;
  Matrix k_mm_;
  Matrix r_;
  std::optional<double> source_diag_max_;

  struct Cache {
    std::once_flag a_once;
    Matrix a;
    std::once_flag z_once;
    double z_norm = 0.0;
  };
  std::shared_ptr<Cache> cache_;
};

/// Build the R-factor for a Nystrom subset. K_mm must be symmetric PSD up to
/// tolerance; indefiniteness surfaces as a NumericError naming the failing
/// Cholesky pivot.
NystromFactor nystrom_factor(Matrix k_nm, Matrix k_mm, std::vector<Index> subset_idx,
                             std::optional<double> source_diag_max = std::nullopt);

}  // namespace nytro
