#pragma once

// Truncated full Fock space over K = H (+) A, with H = A^r carrying the
// vector xi = (K_1, ..., K_r) so that <xi, a xi> = sum_i K_i^* a K_i = psi(a).
//
// Degree j of the Fock space is the free right A-module on (r+1)^j
// coordinates; a coordinate is a tuple (c_1, ..., c_j) with c in {0..r},
// c = r being the "0 (+) 1" direction. Operators are right A-linear and act
// on coordinates by left multiplication, so they are matrices over A; they
// are stored flattened (coordinate i occupies rows i*k .. i*k+k-1).

#include "ovfree/algebra.hpp"
#include "ovfree/cpmaps.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ovfree {

class FockSpace {
 public:
  FockSpace(std::size_t k, std::size_t depth, std::vector<Mat> xi);

  std::size_t k() const { return k_; }
  /// Number of Kraus operators of psi.
  std::size_t r() const { return xi_.size(); }
  std::size_t depth() const { return depth_; }
  /// Coordinates of degree j: (r+1)^j.
  std::size_t rank(std::size_t j) const;
  /// First coordinate of degree j.
  std::size_t offset(std::size_t j) const;
  /// Total number of coordinates D.
  std::size_t dim() const { return offset(depth_ + 1); }
  /// Index of the K-direction 0 (+) 1 inside K.
  std::size_t unit_coord() const { return r(); }
  /// Global coordinate of the degree-1 vector 0 (+) 1.
  std::size_t state_coord() const { return offset(1) + unit_coord(); }
  const std::vector<Mat>& xi_coords() const { return xi_; }

  /// <xi, a xi> computed from the coordinates.
  Mat xi_inner(const Mat& a) const;

 private:
  std::size_t k_;
  std::size_t depth_;
  std::vector<Mat> xi_;
  std::vector<std::size_t> offsets_;
};

using SparseMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Right A-linear operator on a FockSpace.
class FockOp {
 public:
  FockOp(std::shared_ptr<const FockSpace> space, SparseMat mat, std::optional<int> degree_shift, int reach);

  static FockOp identity(std::shared_ptr<const FockSpace> space);
  /// Dense matrix over A; reach is taken as unbounded.
  static FockOp from_amatrix(std::shared_ptr<const FockSpace> space, const AMatrix& m);

  const FockSpace& space() const { return *space_; }
  const std::shared_ptr<const FockSpace>& space_ptr() const { return space_; }
  const SparseMat& mat() const { return mat_; }
  /// Net degree change when homogeneous; nullopt for mixed operators.
  std::optional<int> degree_shift() const { return shift_; }
  /// Upper bound on how far above its input degree the operator pushes a
  /// vector, including intermediate factors of a product.
  int reach() const { return reach_; }
  /// Upper bound on the net degree change.
  int max_shift() const { return max_shift_; }

  /// Entry (i, j) as an element of A.
  Mat block(std::size_t i, std::size_t j) const;
  AMatrix to_amatrix() const;

  FockOp adjoint() const;
  FockOp operator*(const FockOp& rhs) const;
  FockOp operator+(const FockOp& rhs) const;
  FockOp operator-(const FockOp& rhs) const;

 private:
  std::shared_ptr<const FockSpace> space_;
  SparseMat mat_;
  std::optional<int> shift_;
  int reach_;
  int max_shift_;
};

/// Requires psi completely positive (throws NotCompletelyPositive otherwise)
/// and depth >= 2.
std::shared_ptr<const FockSpace> build_fock(const CPMap& psi, std::size_t depth, double tol = kDefaultTol);

/// zeta |-> (xi (+) 1) (x) zeta; the top degree is mapped to zero.
FockOp build_v(const std::shared_ptr<const FockSpace>& f);
FockOp lambda_rep(const std::shared_ptr<const FockSpace>& f, const Mat& a);

/// <0 (+) 1, T (0 (+) 1)>.
Mat cond_exp(const FockOp& t);

struct FockLetter {
  enum class Kind { V, VStar, Lambda };
  Kind kind;
  Mat a;  // used by Lambda only

  static FockLetter v() { return {Kind::V, Mat()}; }
  static FockLetter v_star() { return {Kind::VStar, Mat()}; }
  static FockLetter lambda(Mat a) { return {Kind::Lambda, std::move(a)}; }
};

/// E of the product of the letters (leftmost letter applied last). Exact;
/// requires depth >= word length + 1.
Mat word_expectation(const std::shared_ptr<const FockSpace>& f, std::span<const FockLetter> word);

}  // namespace ovfree
