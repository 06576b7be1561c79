#include "nytro/spectral.hpp"

#include <lapacke.h>

#include <cmath>
#include <sstream>

namespace nytro {

namespace {

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

void require_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw InputError(std::string(who) + ": matrix is not square");
  const double scale = max_abs(a);
  const double asym = max_abs(a - a.transpose());
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw InputError(std::string(who) + ": matrix asymmetric beyond tolerance");
}

// Upper-triangular Cholesky factor T with W = T^T T. Hand-rolled so a
// breakdown can report which pivot went non-positive.
Matrix cholesky_upper(const Matrix& w) {
  const Index k = w.rows();
  Matrix t = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    double d = w(j, j);
    for (Index i = 0; i < j; ++i) d -= t(i, j) * t(i, j);
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "Cholesky breakdown at pivot " << j << " (value " << d
          << "): matrix indefinite beyond tolerance";
      throw NumericError(msg.str());
    }
    t(j, j) = std::sqrt(d);
    for (Index l = j + 1; l < k; ++l) {
      double s = w(j, l);
      for (Index i = 0; i < j; ++i) s -= t(i, j) * t(i, l);
      t(j, l) = s / t(j, j);
    }
  }
  return t;
}

}  // namespace

EigenSystem eigh(const Matrix& a) {
  require_symmetric(a, "eigh");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      ((a + a.transpose()) * 0.5).eval());
  if (solver.info() != Eigen::Success)
    throw NumericError("eigh: eigendecomposition did not converge");
  const Index n = a.rows();
  EigenSystem es;
  es.values = solver.eigenvalues().reverse();
  es.vectors = solver.eigenvectors().rowwise().reverse();
  (void)n;
  return es;
}

Matrix pinv(const Matrix& a, double rank_tol) {
  const EigenSystem es = eigh(a);
  const Index n = a.rows();
  if (rank_tol < 0) rank_tol = default_rank_tol(n);
  const double sigma_max = n == 0 ? 0.0 : es.values.maxCoeff();
  const double cutoff = rank_tol * sigma_max;
  Vector inv(n);
  for (Index i = 0; i < n; ++i)
    inv[i] = es.values[i] > cutoff && es.values[i] > 0.0 ? 1.0 / es.values[i] : 0.0;
  return es.vectors * inv.asDiagonal() * es.vectors.transpose();
}

Matrix apply_spectral(const std::function<double(double)>& f, const EigenSystem& es) {
  Vector mapped(es.values.size());
  for (Index i = 0; i < es.values.size(); ++i) mapped[i] = f(es.values[i]);
  return es.vectors * mapped.asDiagonal() * es.vectors.transpose();
}

Matrix apply_spectral(const std::function<double(double)>& f, const Matrix& a) {
  return apply_spectral(f, eigh(a));
}

NystromFactor::NystromFactor(Matrix k_nm, Matrix k_mm, std::vector<Index> subset_idx,
                             Matrix r, std::optional<double> source_diag_max)
    : subset_idx_(std::move(subset_idx)),
      k_nm_(std::move(k_nm)),
      k_mm_(std::move(k_mm)),
      r_(std::move(r)),
      source_diag_max_(source_diag_max),
      cache_(std::make_shared<Cache>()) {}

const Matrix& NystromFactor::a() const {
  std::call_once(cache_->a_once, [this] { cache_->a = k_nm_ * r_; });
  return cache_->a;
}

double NystromFactor::z_norm() const {
  std::call_once(cache_->z_once, [this] {
    if (rank() == 0) {
      cache_->z_norm = 0.0;
      return;
    }
    const Matrix ata = (a().transpose() * a()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(((ata + ata.transpose()) * 0.5).eval(),
                                                 Eigen::EigenvaluesOnly);
    cache_->z_norm = std::max(0.0, solver.eigenvalues().maxCoeff());
  });
  return cache_->z_norm;
}

NystromFactor nystrom_factor(Matrix k_nm, Matrix k_mm, std::vector<Index> subset_idx,
                             std::optional<double> source_diag_max) {
  const Index m = k_mm.rows();
  if (m == 0) throw InputError("nystrom_factor: empty subset");
  require_symmetric(k_mm, "nystrom_factor");
  if (k_nm.cols() != m)
    throw InputError("nystrom_factor: K_nm column count does not match K_mm");
  if (static_cast<Index>(subset_idx.size()) != m)
    throw InputError("nystrom_factor: subset index count does not match K_mm");

  Matrix k_mm_sym = ((k_mm + k_mm.transpose()) * 0.5).eval();

  // Economic QR of K_mm truncated at numerical rank k; S spans range(K_mm).
  // Column-pivoted so the diagonal of the triangular factor is rank-revealing
  // (blocked LAPACK routines; Eigen's unpivoted path cannot detect rank).
  Matrix qr = k_mm_sym;
  std::vector<lapack_int> pivots(static_cast<std::size_t>(m), 0);
  Vector tau(m);
  lapack_int info = LAPACKE_dgeqp3(LAPACK_COL_MAJOR, static_cast<lapack_int>(m),
                                   static_cast<lapack_int>(m), qr.data(),
                                   static_cast<lapack_int>(m), pivots.data(), tau.data());
  if (info != 0) throw NumericError("nystrom_factor: QR factorization failed");
  const double max_pivot = std::abs(qr(0, 0));
  Index k = 0;
  while (k < m && std::abs(qr(k, k)) > default_rank_tol(m) * max_pivot) ++k;

  Matrix r(m, k);
  if (k > 0) {
    // materialize the thin orthonormal factor
    info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, static_cast<lapack_int>(m),
                          static_cast<lapack_int>(k), static_cast<lapack_int>(k), qr.data(),
                          static_cast<lapack_int>(m), tau.data());
    if (info != 0) throw NumericError("nystrom_factor: forming Q failed");
    const Matrix s = qr.leftCols(k);
    Matrix w = (s.transpose() * k_mm_sym * s).eval();
    w = ((w + w.transpose()) * 0.5).eval();
    const Matrix t = cholesky_upper(w);  // W = T^T T
    // R = S T^{-1}
    r = t.transpose()
            .triangularView<Eigen::Lower>()
            .solve(s.transpose())
            .transpose();
  }
  return NystromFactor(std::move(k_nm), std::move(k_mm_sym), std::move(subset_idx),
                       std::move(r), source_diag_max);
}

}  // namespace nytro
