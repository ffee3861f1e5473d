#pragma once

// Dense complex matrices, matrices with entries in A = M_k(C), and
// positive-semidefiniteness certificates.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovfree {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// An element of the base algebra A = M_k(C).
using AlgElem = Mat;

inline constexpr double kDefaultTol = 1e-9;

/// Malformed or inconsistent input (dimensions, ranges, guards).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix unit e_{pq} in M_k.
Mat matrix_unit(std::size_t k, std::size_t p, std::size_t q);

/// Matrix unit with flat index p*k + q.
inline Mat matrix_unit(std::size_t k, std::size_t flat) { return matrix_unit(k, flat / k, flat % k); }

double max_abs(const Mat& m);
double max_abs_diff(const Mat& a, const Mat& b);
bool is_hermitian(const Mat& m, double tol);

/// A rows x cols grid of k x k blocks.
///
/// Flattening places entry (i, j) at block position (i, j) of a
/// (rows*k) x (cols*k) complex matrix, i.e. flatten(m) = sum_ij E_ij (x) m_ij.
/// Under this layout an entry acts on the k-dimensional fibre of its column
/// by left multiplication, and flatten is a *-homomorphism on square grids.
class AMatrix {
 public:
  AMatrix(std::size_t rows, std::size_t cols, std::size_t k);

  static AMatrix identity(std::size_t n, std::size_t k);
  static AMatrix diagonal(std::span<const Mat> entries);
  /// Inverse of flatten; flat must be (n*k) x (m*k).
  static AMatrix from_flat(const Mat& flat, std::size_t k);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t k() const { return k_; }

  Mat& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const Mat& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  AMatrix operator*(const AMatrix& rhs) const;
  AMatrix operator+(const AMatrix& rhs) const;
  AMatrix operator-(const AMatrix& rhs) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t k_;
  std::vector<Mat> entries_;
};

AMatrix adjoint(const AMatrix& m);

/// Block layout described on AMatrix. Rejects non-square grids.
Mat flatten(const AMatrix& m);

double max_abs_diff(const AMatrix& a, const AMatrix& b);

/// Smallest-eigenvalue certificate for a Hermitian matrix.
struct PSDReport {
  double min_eigenvalue = 0.0;
  /// Unit eigenvector for min_eigenvalue; present iff min_eigenvalue < -tol.
  std::optional<Vec> witness;
  double tol = kDefaultTol;

  bool is_psd() const { return !witness.has_value(); }
};

/// Symmetrizes m, rejects it if max|m - m^*| > 10 tol, and eigensolves.
PSDReport psd_check(const Mat& m, double tol = kDefaultTol);

}  // namespace ovfree
