#include "nytro/kernel.hpp"

#include <cmath>

namespace nytro {

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InputError("KernelSpec: gaussian bandwidth must be positive");
  return KernelSpec{KernelFamily::gaussian, sigma};
}

KernelSpec KernelSpec::linear() { return KernelSpec{KernelFamily::linear, 1.0}; }

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size())
    throw InputError("eval_kernel: point dimensions differ");
  switch (spec.family) {
    case KernelFamily::gaussian: {
      if (!(spec.bandwidth > 0.0))
        throw InputError("eval_kernel: gaussian bandwidth must be positive");
      const double d2 = (x - y).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
    }
    case KernelFamily::linear:
      return x.dot(y);
  }
  throw InputError("eval_kernel: unknown kernel family");
}

KernelGram::KernelGram(Matrix k, std::optional<KernelSpec> spec)
    : spec_(spec), cache_(std::make_shared<EigCache>()) {
  if (k.rows() == 0 || k.rows() != k.cols())
    throw InputError("KernelGram: matrix must be square and non-empty");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw InputError("KernelGram: matrix asymmetric beyond 1e-12 relative");
  matrix_ = ((k + k.transpose()) * 0.5).eval();
  diag_max_ = matrix_.diagonal().maxCoeff();
}

const EigenSystem& KernelGram::eig() const {
  if (!cache_) throw InputError("KernelGram: empty gram");
  std::call_once(cache_->once, [this] {
    EigenSystem es = eigh(matrix_);
    const double norm = std::max(std::abs(es.values[0]),
                                 std::abs(es.values[es.values.size() - 1]));
    if (es.values.minCoeff() < -1e-10 * norm)
      throw NumericError("KernelGram: matrix indefinite beyond -1e-10 * |K|");
    cache_->sys = std::move(es);
  });
  return cache_->sys;
}

double KernelGram::norm() const {
  const EigenSystem& es = eig();
  return std::max(std::abs(es.values[0]), std::abs(es.values[es.values.size() - 1]));
}

KernelGram gram_full(const KernelSpec& spec, const Matrix& points) {
  if (points.rows() == 0) throw InputError("gram_full: empty point list");
  Matrix k = gram_between(spec, points, points);
  return KernelGram(std::move(k), spec);
}

Matrix gram_cross(const KernelSpec& spec, const Matrix& points,
                  const std::vector<Index>& subset_idx) {
  const Index n = points.rows();
  const Index m = static_cast<Index>(subset_idx.size());
  if (m == 0) throw InputError("gram_cross: empty subset");
  for (Index j : subset_idx)
    if (j < 0 || j >= n) throw InputError("gram_cross: subset index out of range");
  Matrix subset_points(m, points.cols());
  for (Index j = 0; j < m; ++j)
    subset_points.row(j) = points.row(subset_idx[static_cast<std::size_t>(j)]);
  return gram_between(spec, points, subset_points);
}

// Assembled blockwise through the inner-product identity
// |a - b|^2 = |a|^2 + |b|^2 - 2 <a, b>, so the heavy part is one matrix
// product instead of pointwise kernel calls.
Matrix gram_between(const KernelSpec& spec, const Matrix& row_points,
                    const Matrix& col_points) {
  if (row_points.cols() != col_points.cols())
    throw InputError("gram_between: point dimensions differ");
  Matrix k = row_points * col_points.transpose();
  if (spec.family == KernelFamily::linear) return k;
  if (!(spec.bandwidth > 0.0))
    throw InputError("gram_between: gaussian bandwidth must be positive");
  const Vector row_sq = row_points.rowwise().squaredNorm();
  const Vector col_sq = col_points.rowwise().squaredNorm();
  const double inv_two_sigma2 = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
  for (Index j = 0; j < k.cols(); ++j)
    k.col(j) = ((row_sq.array() + col_sq[j] - 2.0 * k.col(j).array())
                    .max(0.0) *  // gemm round-off may leave tiny negatives
                -inv_two_sigma2)
                   .exp();
  return k;
}

double diag_max_of(const KernelSpec& spec, const Matrix& points) {
  if (points.rows() == 0) throw InputError("diag_max_of: empty point list");
  if (spec.family == KernelFamily::gaussian) return 1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < points.rows(); ++i)
    best = std::max(best, eval_kernel(spec, points.row(i).transpose(), points.row(i).transpose()));
  return best;
}

NystromFactor nystrom_from_gram(const KernelGram& gram, const std::vector<Index>& subset_idx) {
  const Index n = gram.size();
  const Index m = static_cast<Index>(subset_idx.size());
  if (m == 0) throw InputError("nystrom_from_gram: empty subset");
  for (Index j : subset_idx)
    if (j < 0 || j >= n) throw InputError("nystrom_from_gram: subset index out of range");
  Matrix k_nm(n, m);
  Matrix k_mm(m, m);
  for (Index j = 0; j < m; ++j) {
    k_nm.col(j) = gram.matrix().col(subset_idx[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < m; ++i)
      k_mm(i, j) = gram.matrix()(subset_idx[static_cast<std::size_t>(i)],
                                 subset_idx[static_cast<std::size_t>(j)]);
  }
  return nystrom_factor(std::move(k_nm), std::move(k_mm), subset_idx, gram.diag_max());
}

}  // namespace nytro
