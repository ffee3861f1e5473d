#include "ovfree/fock.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

constexpr int kUnboundedReach = std::numeric_limits<int>::max() / 4;

}  // namespace

FockSpace::FockSpace(std::size_t k, std::size_t depth, std::vector<Mat> xi)
    : k_(k), depth_(depth), xi_(std::move(xi)) {
  if (k == 0) throw InputError("FockSpace: k must be positive");
  for (const Mat& c : xi_)
    if (c.rows() != idx(k) || c.cols() != idx(k)) throw InputError("FockSpace: xi coordinates must be k x k");
  offsets_.assign(depth_ + 2, 0);
  std::size_t rank = 1;
  for (std::size_t j = 0; j <= depth_; ++j) {
    offsets_[j + 1] = offsets_[j] + rank;
    rank *= r() + 1;
  }
}

std::size_t FockSpace::rank(std::size_t j) const {
  if (j > depth_) throw InputError("FockSpace::rank: degree beyond truncation");
  return offsets_[j + 1] - offsets_[j];
}

std::size_t FockSpace::offset(std::size_t j) const {
  if (j > depth_ + 1) throw InputError("FockSpace::offset: degree beyond truncation");
  return offsets_[j];
}

Mat FockSpace::xi_inner(const Mat& a) const {
  Mat out = Mat::Zero(idx(k_), idx(k_));
  for (const Mat& c : xi_) out += c.adjoint() * a * c;
  return out;
}

std::shared_ptr<const FockSpace> build_fock(const CPMap& psi, std::size_t depth, double tol) {
  if (depth < 2) throw InputError("build_fock: depth must be at least 2");
  // kraus_of throws NotCompletelyPositive with the Choi witness: no xi exists.
  auto kraus = kraus_of(psi, tol);
  return std::make_shared<const FockSpace>(psi.k(), depth, std::move(kraus));
}

// ---------------------------------------------------------------------------

FockOp::FockOp(std::shared_ptr<const FockSpace> space, SparseMat mat, std::optional<int> degree_shift, int reach)
    : space_(std::move(space)), mat_(std::move(mat)), shift_(degree_shift), reach_(reach) {
  if (!space_) throw InputError("FockOp: null space");
  const auto n = idx(space_->dim() * space_->k());
  if (mat_.rows() != n || mat_.cols() != n) throw InputError("FockOp: matrix does not match the Fock dimension");
  max_shift_ = shift_ ? *shift_ : reach_;
}

FockOp FockOp::identity(std::shared_ptr<const FockSpace> space) {
  const auto n = idx(space->dim() * space->k());
  SparseMat id(n, n);
  id.setIdentity();
  return FockOp(std::move(space), std::move(id), 0, 0);
}

FockOp FockOp::from_amatrix(std::shared_ptr<const FockSpace> space, const AMatrix& m) {
  if (m.rows() != space->dim() || m.cols() != space->dim() || m.k() != space->k())
    throw InputError("FockOp::from_amatrix: shape does not match the Fock space");
  const Mat flat = flatten(m);
  SparseMat sp = flat.sparseView();
  return FockOp(std::move(space), std::move(sp), std::nullopt, kUnboundedReach);
}

Mat FockOp::block(std::size_t i, std::size_t j) const {
  const auto k = idx(space_->k());
  Mat out = Mat::Zero(k, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (SparseMat::InnerIterator it(mat_, idx(j) * k + c); it; ++it) {
      const Eigen::Index row = it.row() - idx(i) * k;
      if (row >= 0 && row < k) out(row, c) = it.value();
    }
  return out;
}

AMatrix FockOp::to_amatrix() const { return AMatrix::from_flat(Mat(mat_), space_->k()); }

FockOp FockOp::adjoint() const {
  SparseMat adj = mat_.adjoint();
  std::optional<int> shift;
  if (shift_) shift = -*shift_;
  // The adjoint retraces the degree path backwards: peak reach - shift.
  const int reach = shift_ && reach_ < kUnboundedReach ? reach_ - *shift_ : kUnboundedReach;
  return FockOp(space_, std::move(adj), shift, reach);
}

FockOp FockOp::operator*(const FockOp& rhs) const {
  if (space_ != rhs.space_) throw InputError("FockOp product: operators live on different Fock spaces");
  SparseMat prod = (mat_ * rhs.mat_).pruned();
  std::optional<int> shift;
  if (shift_ && rhs.shift_) shift = *shift_ + *rhs.shift_;
  // rhs acts first: it reaches rhs.reach, then lhs starts at most max_shift above the input.
  const long reach = std::max<long>(rhs.reach_, static_cast<long>(rhs.max_shift_) + reach_);
  FockOp out(space_, std::move(prod), shift, static_cast<int>(std::min<long>(reach, kUnboundedReach)));
  out.max_shift_ = static_cast<int>(std::min<long>(static_cast<long>(max_shift_) + rhs.max_shift_, kUnboundedReach));
  return out;
}

FockOp FockOp::operator+(const FockOp& rhs) const {
  if (space_ != rhs.space_) throw InputError("FockOp sum: operators live on different Fock spaces");
  std::optional<int> shift;
  if (shift_ && rhs.shift_ && *shift_ == *rhs.shift_) shift = shift_;
  FockOp out(space_, mat_ + rhs.mat_, shift, std::max(reach_, rhs.reach_));
  out.max_shift_ = std::max(max_shift_, rhs.max_shift_);
  return out;
}

FockOp FockOp::operator-(const FockOp& rhs) const {
  if (space_ != rhs.space_) throw InputError("FockOp difference: operators live on different Fock spaces");
  std::optional<int> shift;
  if (shift_ && rhs.shift_ && *shift_ == *rhs.shift_) shift = shift_;
  FockOp out(space_, mat_ - rhs.mat_, shift, std::max(reach_, rhs.reach_));
  out.max_shift_ = std::max(max_shift_, rhs.max_shift_);
  return out;
}

FockOp build_v(const std::shared_ptr<const FockSpace>& f) {
  const std::size_t k = f->k();
  const std::size_t r1 = f->r() + 1;
  std::vector<Mat> u = f->xi_coords();
  u.push_back(Mat::Identity(idx(k), idx(k)));

  std::vector<Eigen::Triplet<cplx>> triplets;
  for (std::size_t j = 0; j < f->depth(); ++j) {
    const std::size_t rank_j = f->rank(j);
    for (std::size_t tau = 0; tau < rank_j; ++tau) {
      const std::size_t src = f->offset(j) + tau;
      for (std::size_t c = 0; c < r1; ++c) {
        // (c, tau) is the coordinate with leading letter c.
        const std::size_t dst = f->offset(j + 1) + c * rank_j + tau;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) {
            const cplx value = u[c](idx(a), idx(b));
            if (value != cplx(0.0)) triplets.emplace_back(idx(dst * k + a), idx(src * k + b), value);
          }
      }
    }
  }
  const auto n = idx(f->dim() * k);
  SparseMat v(n, n);
  v.setFromTriplets(triplets.begin(), triplets.end());
  return FockOp(f, std::move(v), 1, 1);
}

FockOp lambda_rep(const std::shared_ptr<const FockSpace>& f, const Mat& a) {
  const std::size_t k = f->k();
  if (a.rows() != idx(k) || a.cols() != idx(k)) throw InputError("lambda_rep: element must be k x k");
  std::vector<Eigen::Triplet<cplx>> triplets;
  for (std::size_t i = 0; i < f->dim(); ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q)
        if (a(idx(p), idx(q)) != cplx(0.0)) triplets.emplace_back(idx(i * k + p), idx(i * k + q), a(idx(p), idx(q)));
  const auto n = idx(f->dim() * k);
  SparseMat m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return FockOp(f, std::move(m), 0, 0);
}

Mat cond_exp(const FockOp& t) {
  const std::size_t s = t.space().state_coord();
  return t.block(s, s);
}

Mat word_expectation(const std::shared_ptr<const FockSpace>& f, std::span<const FockLetter> word) {
  if (f->depth() < word.size() + 1)
    throw InputError("word_expectation: a word of length " + std::to_string(word.size()) + " needs depth >= " +
                     std::to_string(word.size() + 1) + ", Fock space has depth " + std::to_string(f->depth()));
  const std::size_t k = f->k();
  const FockOp v = build_v(f);
  const FockOp v_star = v.adjoint();
  const std::size_t s = f->state_coord();

  // Columns of the state vector 0 (+) 1, one per basis direction of A.
  Mat state = Mat::Zero(idx(f->dim() * k), idx(k));
  state.block(idx(s * k), 0, idx(k), idx(k)).setIdentity();
  Mat current = state;
  for (std::size_t i = word.size(); i > 0; --i) {
    const FockLetter& letter = word[i - 1];
    switch (letter.kind) {
      case FockLetter::Kind::V: current = v.mat() * current; break;
      case FockLetter::Kind::VStar: current = v_star.mat() * current; break;
      case FockLetter::Kind::Lambda: current = lambda_rep(f, letter.a).mat() * current; break;
    }
  }
  return state.adjoint() * current;
}

}  // namespace ovfree
