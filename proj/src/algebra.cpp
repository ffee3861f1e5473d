#include "ovfree/algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace ovfree {

Mat matrix_unit(std::size_t k, std::size_t p, std::size_t q) {
  if (p >= k || q >= k) throw InputError("matrix_unit: index out of range");
  Mat e = Mat::Zero(k, k);
  e(p, q) = 1.0;
  return e;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("max_abs_diff: shape mismatch");
  return max_abs(a - b);
}

bool is_hermitian(const Mat& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

AMatrix::AMatrix(std::size_t rows, std::size_t cols, std::size_t k)
    : rows_(rows), cols_(cols), k_(k), entries_(rows * cols, Mat::Zero(k, k)) {
  if (k == 0) throw InputError("AMatrix: base dimension must be positive");
}

AMatrix AMatrix::identity(std::size_t n, std::size_t k) {
  AMatrix m(n, n, k);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Mat::Identity(k, k);
  return m;
}

AMatrix AMatrix::diagonal(std::span<const Mat> entries) {
  if (entries.empty()) throw InputError("AMatrix::diagonal: no entries");
  const auto k = static_cast<std::size_t>(entries.front().rows());
  AMatrix m(entries.size(), entries.size(), k);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].rows() != static_cast<Eigen::Index>(k) || entries[i].cols() != static_cast<Eigen::Index>(k))
      throw InputError("AMatrix::diagonal: entries must share one k x k shape");
    m(i, i) = entries[i];
  }
  return m;
}

AMatrix AMatrix::from_flat(const Mat& flat, std::size_t k) {
  if (k == 0 || flat.rows() % static_cast<Eigen::Index>(k) != 0 || flat.cols() % static_cast<Eigen::Index>(k) != 0)
    throw InputError("AMatrix::from_flat: dimensions not divisible by k");
  const auto kk = static_cast<Eigen::Index>(k);
  AMatrix m(flat.rows() / kk, flat.cols() / kk, k);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(i, j) = flat.block(static_cast<Eigen::Index>(i) * kk, static_cast<Eigen::Index>(j) * kk, kk, kk);
  return m;
}

AMatrix AMatrix::operator*(const AMatrix& rhs) const {
  if (cols_ != rhs.rows_ || k_ != rhs.k_) throw InputError("AMatrix product: shape mismatch");
  AMatrix out(rows_, rhs.cols_, k_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t l = 0; l < cols_; ++l) {
      const Mat& left = (*this)(i, l);
      if (left.isZero(0.0)) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j).noalias() += left * rhs(l, j);
    }
  return out;
}

AMatrix AMatrix::operator+(const AMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_ || k_ != rhs.k_) throw InputError("AMatrix sum: shape mismatch");
  AMatrix out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] += rhs.entries_[i];
  return out;
}

AMatrix AMatrix::operator-(const AMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_ || k_ != rhs.k_) throw InputError("AMatrix difference: shape mismatch");
  AMatrix out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] -= rhs.entries_[i];
  return out;
}

AMatrix adjoint(const AMatrix& m) {
  AMatrix out(m.cols(), m.rows(), m.k());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j).adjoint();
  return out;
}

Mat flatten(const AMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("flatten: AMatrix must be square");
  const auto kk = static_cast<Eigen::Index>(m.k());
  Mat out(static_cast<Eigen::Index>(m.rows()) * kk, static_cast<Eigen::Index>(m.cols()) * kk);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out.block(static_cast<Eigen::Index>(i) * kk, static_cast<Eigen::Index>(j) * kk, kk, kk) = m(i, j);
  return out;
}

double max_abs_diff(const AMatrix& a, const AMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.k() != b.k())
    throw InputError("max_abs_diff: AMatrix shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, max_abs_diff(a(i, j), b(i, j)));
  return worst;
}

PSDReport psd_check(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw InputError("psd_check: matrix must be square");
  if (m.rows() == 0) throw InputError("psd_check: empty matrix");
  const double asym = max_abs(m - m.adjoint());
  if (asym > 10.0 * tol)
    throw InputError("psd_check: matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  const Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("psd_check: eigensolver failed");
  PSDReport report;
  report.tol = tol;
  report.min_eigenvalue = solver.eigenvalues()(0);
  if (report.min_eigenvalue < -tol) report.witness = solver.eigenvectors().col(0);
  return report;
}

}  // namespace ovfree
