#include "ovfree/freeprod.hpp"

#include <algorithm>
#include <string>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

bool is_b(const MixedWord::Letter& x) { return x.index() == 0; }

struct Profile {
  long max_shift;
  long reach;
};

// lhs applied after rhs.
Profile then(const Profile& lhs, const Profile& rhs) {
  return {lhs.max_shift + rhs.max_shift, std::max(rhs.reach, rhs.max_shift + lhs.reach)};
}

}  // namespace

MixedWord::MixedWord(const FreeProductModel& model)
    : model_(&model), scalar_(Mat::Identity(idx(model.k()), idx(model.k()))) {}

MixedWord& MixedWord::push_a(const Mat& a) {
  if (a.rows() != idx(model_->k()) || a.cols() != idx(model_->k()))
    throw InputError("MixedWord: A-letters must be k x k");
  if (letters_.empty())
    scalar_ = scalar_ * a;
  else
    letters_.back() = std::make_shared<const Letter>(model_->times_right(*letters_.back(), a));
  return *this;
}

MixedWord& MixedWord::push_b(const Mat& b) {
  const auto d = idx(model_->realization().d());
  if (b.rows() != d || b.cols() != d) throw InputError("MixedWord: B-letters must be d x d");
  Letter x = b;
  if (letters_.empty()) {
    letters_.push_back(std::make_shared<const Letter>(model_->times_left(scalar_, x)));
  } else if (is_b(*letters_.back())) {
    letters_.back() = std::make_shared<const Letter>(
        model_->join(*letters_.back(), Mat::Identity(idx(model_->k()), idx(model_->k())), x));
  } else {
    letters_.push_back(std::make_shared<const Letter>(std::move(x)));
  }
  return *this;
}

MixedWord& MixedWord::push_c(const FockOp& c) {
  if (c.space_ptr() != model_->fock()) throw InputError("MixedWord: C-letter lives on a different Fock space");
  Letter x = c;
  if (letters_.empty()) {
    letters_.push_back(std::make_shared<const Letter>(model_->times_left(scalar_, x)));
  } else if (!is_b(*letters_.back())) {
    letters_.back() = std::make_shared<const Letter>(
        model_->join(*letters_.back(), Mat::Identity(idx(model_->k()), idx(model_->k())), x));
  } else {
    letters_.push_back(std::make_shared<const Letter>(std::move(x)));
  }
  return *this;
}

// ---------------------------------------------------------------------------

FreeProductModel::FreeProductModel(Realization realization, std::shared_ptr<const FockSpace> fock)
    : realization_(std::move(realization)), fock_(std::move(fock)) {
  realization_.validate();
  if (!fock_) throw InputError("FreeProductModel: null Fock space");
  if (fock_->k() != realization_.k) throw InputError("FreeProductModel: realization and Fock model disagree on k");
}

Mat FreeProductModel::expect(const MixedWord::Letter& x) const {
  if (is_b(x)) return realization_.condexp(std::get<Mat>(x));
  return cond_exp(std::get<FockOp>(x));
}

MixedWord::Letter FreeProductModel::centered(const MixedWord::Letter& x) const {
  const Mat e = expect(x);
  if (is_b(x)) return Mat(std::get<Mat>(x) - realization_.embed(e));
  return std::get<FockOp>(x) - lambda_rep(fock_, e);
}

MixedWord::Letter FreeProductModel::join(const MixedWord::Letter& x, const Mat& a, const MixedWord::Letter& y) const {
  if (is_b(x) != is_b(y)) throw InputError("FreeProductModel::join: letters from different algebras");
  if (is_b(x)) return Mat(std::get<Mat>(x) * realization_.embed(a) * std::get<Mat>(y));
  return std::get<FockOp>(x) * lambda_rep(fock_, a) * std::get<FockOp>(y);
}

MixedWord::Letter FreeProductModel::times_left(const Mat& a, const MixedWord::Letter& x) const {
  if (is_b(x)) return Mat(realization_.embed(a) * std::get<Mat>(x));
  return lambda_rep(fock_, a) * std::get<FockOp>(x);
}

MixedWord::Letter FreeProductModel::times_right(const MixedWord::Letter& x, const Mat& a) const {
  if (is_b(x)) return Mat(std::get<Mat>(x) * realization_.embed(a));
  return std::get<FockOp>(x) * lambda_rep(fock_, a);
}

std::size_t FreeProductModel::required_depth(const MixedWord& w) const {
  std::vector<Profile> cs;
  for (const auto& x : w.letters())
    if (!is_b(*x)) {
      const auto& op = std::get<FockOp>(*x);
      cs.push_back({op.max_shift(), op.reach()});
    }
  long worst = 0;
  // Merges in the recursion only ever multiply contiguous C-letters.
  for (std::size_t j = 0; j < cs.size(); ++j) {
    Profile acc = cs[j];
    worst = std::max(worst, acc.reach);
    for (std::size_t i = j; i > 0; --i) {
      acc = then(cs[i - 1], acc);
      worst = std::max(worst, acc.reach);
    }
  }
  return static_cast<std::size_t>(std::max<long>(2, 1 + worst));
}

Mat FreeProductModel::evaluate(const MixedWord& w) const {
  if (w.letters().empty()) return w.scalar();
  const std::size_t need = required_depth(w);
  if (need > fock_->depth())
    throw InputError("evaluate: word needs Fock depth >= " + std::to_string(need) + ", model has depth " +
                     std::to_string(fock_->depth()));
  return expect_word(w.letters(), 0);
}

// x_1 ... x_n = sum_j x_1° ... x_{j-1}° E(x_j) x_{j+1} ... x_n + x_1° ... x_n°,
// and the last term has zero expectation. The first centered_prefix letters
// are already centered, so their own terms vanish.
Mat FreeProductModel::expect_word(const std::vector<LetterPtr>& w, std::size_t centered_prefix) const {
  const std::size_t n = w.size();
  const auto k = idx(this->k());
  if (n == 1) return centered_prefix > 0 ? Mat(Mat::Zero(k, k)) : expect(*w[0]);

  std::vector<LetterPtr> cen(n);
  auto centered_at = [&](std::size_t i) -> const LetterPtr& {
    if (i < centered_prefix) return w[i];
    if (!cen[i]) cen[i] = std::make_shared<const MixedWord::Letter>(centered(*w[i]));
    return cen[i];
  };

  Mat total = Mat::Zero(k, k);
  std::vector<LetterPtr> next;
  next.reserve(n);
  for (std::size_t j = centered_prefix; j < n; ++j) {
    const Mat e = expect(*w[j]);
    if (e.isZero(0.0)) continue;
    next.clear();
    std::size_t prefix = 0;
    if (j == 0) {
      next.push_back(std::make_shared<const MixedWord::Letter>(times_left(e, *w[1])));
      next.insert(next.end(), w.begin() + 2, w.end());
    } else {
      for (std::size_t i = 0; i + 1 < j; ++i) next.push_back(centered_at(i));
      const LetterPtr& left = centered_at(j - 1);
      if (j == n - 1) {
        next.push_back(std::make_shared<const MixedWord::Letter>(times_right(*left, e)));
      } else {
        next.push_back(std::make_shared<const MixedWord::Letter>(join(*left, e, *w[j + 1])));
        next.insert(next.end(), w.begin() + static_cast<long>(j) + 2, w.end());
      }
      prefix = j - 1;
    }
    total += expect_word(next, prefix);
  }
  return total;
}

// ---------------------------------------------------------------------------

OVDistribution compressed_distribution(const Realization& r, const CPMap& eta, std::size_t order, std::size_t depth,
                                       double tol) {
  const std::size_t limit = order_limit(kCompressedOrderLimit);
  if (order < 1 || order > limit)
    throw InputError("compressed_distribution: order must lie in [1, " + std::to_string(limit) + "], got " +
                     std::to_string(order));
  if (eta.k() != r.k) throw InputError("compressed_distribution: map and realization disagree on k");
  r.validate(tol);

  const std::size_t fock_depth = depth == 0 ? kCompressedMinimalDepth : depth;
  const CPMap psi = eta_minus_id(eta);
  const auto fock = build_fock(psi, fock_depth, tol);
  const FreeProductModel model(r, fock);

  const std::size_t k = r.k;
  const FockOp v = build_v(fock);
  const FockOp v_star = v.adjoint();
  std::vector<FockOp> sandwiches;
  for (std::size_t u = 0; u < k * k; ++u) sandwiches.push_back(v * lambda_rep(fock, matrix_unit(k, u)) * v_star);

  OVDistribution out;
  out.k = k;
  out.order = order;
  out.label = "compressed";
  for (std::size_t n = 1; n <= order; ++n) {
    MultiMap m(k, n - 1);
    for (std::size_t f = 0; f < m.basis_size(); ++f) {
      const auto units = decode_index(f, k, n - 1);
      MixedWord w(model);
      w.push_c(v_star).push_b(r.x);
      for (std::size_t u : units) w.push_c(sandwiches[u]).push_b(r.x);
      w.push_c(v);
      m.set(f, model.evaluate(w));
    }
    out.moments.push_back(std::move(m));
  }
  return out;
}

}  // namespace ovfree
