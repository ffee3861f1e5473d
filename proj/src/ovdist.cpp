#include "ovfree/ovdist.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t checked_power(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > kMaxTensorEntries / std::max<std::size_t>(base, 1)) return kMaxTensorEntries + 1;
    out *= base;
  }
  return out;
}

struct Sparse {
  std::size_t index;
  cplx coeff;
};

}  // namespace

std::size_t order_limit(std::size_t default_limit) {
  if (const char* env = std::getenv("OVFREE_MAX_ORDER")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return default_limit;
}

MultiMap::MultiMap(std::size_t k, std::size_t arity) : k_(k), arity_(arity) {
  if (k == 0) throw InputError("MultiMap: k must be positive");
  basis_size_ = checked_power(k * k, arity);
  if (basis_size_ > kMaxTensorEntries / (k * k))
    throw InputError("MultiMap: (k^2)^" + std::to_string(arity) + " * k^2 entries exceed the storage guard for k = " +
                     std::to_string(k));
  data_.assign(basis_size_ * k * k, cplx(0.0));
}

Mat MultiMap::at(std::size_t flat) const {
  if (flat >= basis_size_) throw InputError("MultiMap::at: index out of range");
  return Eigen::Map<const Mat>(data_.data() + flat * k_ * k_, idx(k_), idx(k_));
}

void MultiMap::set(std::size_t flat, const Mat& value) {
  if (flat >= basis_size_) throw InputError("MultiMap::set: index out of range");
  if (value.rows() != idx(k_) || value.cols() != idx(k_)) throw InputError("MultiMap::set: value must be k x k");
  Eigen::Map<Mat>(data_.data() + flat * k_ * k_, idx(k_), idx(k_)) = value;
}

Mat MultiMap::operator()(std::span<const Mat> args) const {
  if (args.size() != arity_)
    throw InputError("MultiMap: expected " + std::to_string(arity_) + " arguments, got " + std::to_string(args.size()));
  const std::size_t kk = k_ * k_;
  std::vector<std::vector<Sparse>> nz(arity_);
  for (std::size_t j = 0; j < arity_; ++j) {
    const Mat& a = args[j];
    if (a.rows() != idx(k_) || a.cols() != idx(k_)) throw InputError("MultiMap: arguments must be k x k");
    for (std::size_t p = 0; p < k_; ++p)
      for (std::size_t q = 0; q < k_; ++q)
        if (a(idx(p), idx(q)) != cplx(0.0)) nz[j].push_back({p * k_ + q, a(idx(p), idx(q))});
    if (nz[j].empty()) return Mat::Zero(idx(k_), idx(k_));
  }

  Mat out = Mat::Zero(idx(k_), idx(k_));
  Eigen::Map<Mat> acc(out.data(), idx(k_), idx(k_));
  std::vector<std::size_t> pos(arity_, 0);
  while (true) {
    std::size_t flat = 0;
    cplx coeff(1.0);
    for (std::size_t j = 0; j < arity_; ++j) {
      flat = flat * kk + nz[j][pos[j]].index;
      coeff *= nz[j][pos[j]].coeff;
    }
    acc += coeff * Eigen::Map<const Mat>(data_.data() + flat * kk, idx(k_), idx(k_));
    std::size_t j = arity_;
    while (j > 0) {
      --j;
      if (++pos[j] < nz[j].size()) break;
      pos[j] = 0;
      if (j == 0) return out;
    }
    if (arity_ == 0) return out;
  }
}

MultiMap MultiMap::mapped(const CPMap& eta) const {
  if (eta.k() != k_) throw InputError("MultiMap::mapped: dimension mismatch between map and tensor");
  MultiMap out(k_, arity_);
  for (std::size_t f = 0; f < basis_size_; ++f) out.set(f, eta.apply(at(f)));
  return out;
}

double max_abs_diff(const MultiMap& a, const MultiMap& b) {
  if (a.k() != b.k() || a.arity() != b.arity()) throw InputError("max_abs_diff: MultiMap shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

std::vector<std::size_t> decode_index(std::size_t flat, std::size_t k, std::size_t arity) {
  std::vector<std::size_t> out(arity);
  for (std::size_t j = arity; j > 0; --j) {
    out[j - 1] = flat % (k * k);
    flat /= k * k;
  }
  return out;
}

double hermitian_defect(const MultiMap& m) {
  const std::size_t k = m.k();
  double worst = 0.0;
  for (std::size_t f = 0; f < m.basis_size(); ++f) {
    const auto units = decode_index(f, k, m.arity());
    // e_pq^* = e_qp, arguments reversed.
    std::size_t mirrored = 0;
    for (std::size_t j = units.size(); j > 0; --j) {
      const std::size_t u = units[j - 1];
      mirrored = mirrored * k * k + (u % k) * k + u / k;
    }
    worst = std::max(worst, max_abs_diff(m.at(f).adjoint(), m.at(mirrored)));
  }
  return worst;
}

Mat OVDistribution::evaluate(std::span<const Mat> args) const {
  const std::size_t n = args.size() + 1;
  if (n > order)
    throw InputError("OVDistribution: moment of order " + std::to_string(n) + " requested, only " +
                     std::to_string(order) + " available");
  return moments[n - 1](args);
}

double OVDistribution::hermitian_defect() const {
  double worst = 0.0;
  for (const auto& m : moments) worst = std::max(worst, ovfree::hermitian_defect(m));
  return worst;
}

// ---------------------------------------------------------------------------
// Realizations

Mat Realization::embed(const Mat& a) const {
  Mat out = Mat::Zero(idx(d()), idx(d()));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (a(idx(i), idx(j)) != cplx(0.0))
        out.block(idx(i * p), idx(j * p), idx(p), idx(p)).diagonal().setConstant(a(idx(i), idx(j)));
  return out;
}

Mat Realization::condexp(const Mat& m) const {
  Mat out(idx(k), idx(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out(idx(i), idx(j)) = (state * m.block(idx(i * p), idx(j * p), idx(p), idx(p))).trace();
  return out;
}

void Realization::validate(double tol) const {
  if (k == 0 || p == 0) throw InputError("realization: k and p must be positive");
  if (x.rows() != idx(d()) || x.cols() != idx(d()))
    throw InputError("realization: X must be d x d with d = k*p = " + std::to_string(d()));
  if (state.rows() != idx(p) || state.cols() != idx(p)) throw InputError("realization: state must be p x p");
  if (!is_hermitian(x, tol)) throw InputError("realization: X = X^* violated");
  if (std::abs(state.trace() - cplx(1.0)) > tol)
    throw InputError("realization: E(1) = 1 violated (state trace " + std::to_string(state.trace().real()) + ")");
  if (!is_hermitian(state, tol) || !psd_check(state, tol).is_psd())
    throw InputError("realization: positivity of E violated (state is not positive semidefinite)");
  // Bimodule property E(a x b) = a E(x) b on matrix units, probed with X.
  for (std::size_t f = 0; f < k * k; ++f)
    for (std::size_t g = 0; g < k * k; ++g) {
      const Mat a = matrix_unit(k, f);
      const Mat b = matrix_unit(k, g);
      if (max_abs_diff(condexp(embed(a) * x * embed(b)), a * condexp(x) * b) > 1e3 * tol * (1.0 + max_abs(x)))
        throw InputError("realization: E(a x b) = a E(x) b violated");
    }
}

namespace {

// prefix = X e_{u_1} X ... e_{u_j} X; record E(prefix) into M_{j+1}.
void realization_dfs(const Realization& r, const std::vector<Mat>& embedded_units, const Mat& prefix,
                     std::size_t depth, std::size_t flat, std::vector<MultiMap>& moments) {
  moments[depth].set(flat, r.condexp(prefix));
  if (depth + 1 >= moments.size()) return;
  const std::size_t kk = r.k * r.k;
  for (std::size_t u = 0; u < kk; ++u)
    realization_dfs(r, embedded_units, prefix * embedded_units[u] * r.x, depth + 1, flat * kk + u, moments);
}

}  // namespace

OVDistribution moments_from_realization(const Realization& r, std::size_t order) {
  r.validate();
  const std::size_t limit = order_limit();
  if (order < 1 || order > limit)
    throw InputError("moments_from_realization: order must lie in [1, " + std::to_string(limit) + "]");
  OVDistribution d;
  d.k = r.k;
  d.order = order;
  d.label = "realization";
  for (std::size_t n = 1; n <= order; ++n) d.moments.emplace_back(r.k, n - 1);
  std::vector<Mat> units;
  for (std::size_t u = 0; u < r.k * r.k; ++u) units.push_back(r.embed(matrix_unit(r.k, u)));
  realization_dfs(r, units, r.x, 0, 0, d.moments);
  return d;
}

// ---------------------------------------------------------------------------
// Moment-cumulant transforms

namespace {

struct PartitionEvaluator {
  const NCPartition& partition;
  const EvaluationPlan& plan;
  std::span<const Mat> letters;
  std::size_t k;
  const BlockValue& block_value;

  // letter between X_i and X_{i+1}
  const Mat& letter(std::size_t i) const { return letters[i]; }

  Mat block(std::size_t b) const {
    const auto& elems = partition.blocks[b];
    const auto& node = plan.nodes[b];
    std::vector<Mat> args;
    args.reserve(elems.size() - 1);
    for (std::size_t g = 0; g + 1 < elems.size(); ++g) {
      Mat arg = letter(elems[g]);
      for (std::size_t c : node.children[g]) arg = arg * block(c) * letter(partition.blocks[c].back());
      args.push_back(std::move(arg));
    }
    return block_value(elems, args);
  }

  Mat top() const {
    Mat out;
    bool first = true;
    for (std::size_t r : plan.roots) {
      if (first) {
        out = block(r);
        first = false;
      } else {
        out = out * block(r);
      }
      const std::size_t last = partition.blocks[r].back();
      if (last + 1 < partition.n) out = out * letter(last);
    }
    return out;
  }
};

struct PlannedPartition {
  NCPartition partition;
  EvaluationPlan plan;
};

std::vector<PlannedPartition> planned(std::size_t n) {
  std::vector<PlannedPartition> out;
  for (auto& p : enumerate_nc(n)) {
    EvaluationPlan plan = nesting_forest(p);
    out.push_back({std::move(p), std::move(plan)});
  }
  return out;
}

BlockValue cumulant_lookup(std::span<const MultiMap> cumulants) {
  return [cumulants](const std::vector<std::size_t>& block, std::span<const Mat> args) -> Mat {
    return cumulants[block.size() - 1](args);
  };
}

void check_family(std::span<const MultiMap> maps, std::size_t order, const char* where) {
  if (maps.size() < order)
    throw InputError(std::string(where) + ": need " + std::to_string(order) + " maps, got " + std::to_string(maps.size()));
  if (maps.empty()) throw InputError(std::string(where) + ": empty family");
  const std::size_t k = maps.front().k();
  for (std::size_t n = 1; n <= order; ++n)
    if (maps[n - 1].arity() != n - 1 || maps[n - 1].k() != k)
      throw InputError(std::string(where) + ": map " + std::to_string(n) + " must have arity " + std::to_string(n - 1) +
                       " and base dimension " + std::to_string(k));
}

std::vector<Mat> units_of(std::size_t flat, std::size_t k, std::size_t arity) {
  std::vector<Mat> out;
  out.reserve(arity);
  for (std::size_t u : decode_index(flat, k, arity)) out.push_back(matrix_unit(k, u));
  return out;
}

}  // namespace

Mat evaluate_partition(const NCPartition& partition, const EvaluationPlan& plan, std::span<const Mat> letters,
                       std::size_t k, const BlockValue& block_value) {
  if (letters.size() + 1 != partition.n) throw InputError("evaluate_partition: need n-1 letters");
  return PartitionEvaluator{partition, plan, letters, k, block_value}.top();
}

std::vector<MultiMap> cumulants_from_moments(const OVDistribution& d) {
  if (d.order < 1) throw InputError("cumulants_from_moments: order must be at least 1");
  check_family(d.moments, d.order, "cumulants_from_moments");
  std::vector<MultiMap> cumulants;
  const BlockValue lookup = [&cumulants](const std::vector<std::size_t>& block, std::span<const Mat> args) -> Mat {
    return cumulants[block.size() - 1](args);
  };
  for (std::size_t n = 1; n <= d.order; ++n) {
    const auto parts = planned(n);
    MultiMap omega(d.k, n - 1);
    for (std::size_t f = 0; f < omega.basis_size(); ++f) {
      const auto letters = units_of(f, d.k, n - 1);
      Mat value = d.moments[n - 1].at(f);
      for (const auto& pp : parts) {
        if (pp.partition.blocks.size() == 1) continue;  // 1_n is the unknown
        value -= evaluate_partition(pp.partition, pp.plan, letters, d.k, lookup);
      }
      omega.set(f, value);
    }
    cumulants.push_back(std::move(omega));
  }
  return cumulants;
}

OVDistribution moments_from_cumulants(std::span<const MultiMap> cumulants, std::size_t order) {
  if (order < 1) throw InputError("moments_from_cumulants: order must be at least 1");
  check_family(cumulants, order, "moments_from_cumulants");
  const std::size_t k = cumulants.front().k();
  const BlockValue lookup = cumulant_lookup(cumulants);
  OVDistribution d;
  d.k = k;
  d.order = order;
  d.label = "cumulants";
  for (std::size_t n = 1; n <= order; ++n) {
    const auto parts = planned(n);
    MultiMap m(k, n - 1);
    for (std::size_t f = 0; f < m.basis_size(); ++f) {
      const auto letters = units_of(f, k, n - 1);
      Mat value = Mat::Zero(idx(k), idx(k));
      for (const auto& pp : parts) value += evaluate_partition(pp.partition, pp.plan, letters, k, lookup);
      m.set(f, value);
    }
    d.moments.push_back(std::move(m));
  }
  return d;
}

OVDistribution eta_power(const OVDistribution& d, const CPMap& eta) {
  if (eta.k() != d.k)
    throw InputError("eta_power: map acts on M_" + std::to_string(eta.k()) + " but the distribution is M_" +
                     std::to_string(d.k) + "-valued");
  auto cumulants = cumulants_from_moments(d);
  for (auto& c : cumulants) c = c.mapped(eta);
  OVDistribution out = moments_from_cumulants(cumulants, d.order);
  out.label = d.label + "^eta";
  return out;
}

std::vector<MultiMap> scalar_family(std::span<const double> values) {
  std::vector<MultiMap> out;
  for (std::size_t n = 0; n < values.size(); ++n) {
    MultiMap m(1, n);
    m.set(0, Mat::Constant(1, 1, values[n]));
    out.push_back(std::move(m));
  }
  return out;
}

OVDistribution scalar_distribution(std::span<const double> moments, std::string label) {
  OVDistribution d;
  d.k = 1;
  d.order = moments.size();
  d.moments = scalar_family(moments);
  d.label = std::move(label);
  return d;
}

OVDistribution bernoulli_distribution(std::size_t order) {
  std::vector<double> moments(order);
  for (std::size_t n = 1; n <= order; ++n) moments[n - 1] = n % 2 == 0 ? 1.0 : 0.0;
  return scalar_distribution(moments, "bernoulli");
}

// ---------------------------------------------------------------------------
// Moment-matrix certificate

namespace {

// Word a_0 X a_1 X ... a_{j-1} X as its matrix-unit indices; empty = 1.
using Word = std::vector<std::size_t>;

std::vector<Word> words_up_to(std::size_t level, std::size_t k) {
  std::vector<Word> out{Word{}};
  std::vector<Word> layer{Word{}};
  for (std::size_t j = 1; j <= level; ++j) {
    std::vector<Word> next;
    for (const Word& w : layer)
      for (std::size_t u = 0; u < k * k; ++u) {
        Word ext = w;
        ext.push_back(u);
        next.push_back(std::move(ext));
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

Mat unit_adjoint(std::size_t k, std::size_t u) { return matrix_unit(k, u % k, u / k); }

// mu(w^* w').
Mat word_pair_value(const OVDistribution& d, const Word& w, const Word& wp) {
  const std::size_t k = d.k;
  if (w.empty() && wp.empty()) return Mat::Identity(idx(k), idx(k));
  if (w.empty()) {
    std::vector<Mat> args;
    for (std::size_t j = 1; j < wp.size(); ++j) args.push_back(matrix_unit(k, wp[j]));
    return matrix_unit(k, wp[0]) * d.evaluate(args);
  }
  if (wp.empty()) {
    std::vector<Mat> args;
    for (std::size_t j = w.size(); j > 1; --j) args.push_back(unit_adjoint(k, w[j - 1]));
    return d.evaluate(args) * unit_adjoint(k, w[0]);
  }
  const Mat middle = unit_adjoint(k, w[0]) * matrix_unit(k, wp[0]);
  if (middle.isZero(0.0)) return Mat::Zero(idx(k), idx(k));
  std::vector<Mat> args;
  for (std::size_t j = w.size(); j > 1; --j) args.push_back(unit_adjoint(k, w[j - 1]));
  args.push_back(middle);
  for (std::size_t j = 1; j < wp.size(); ++j) args.push_back(matrix_unit(k, wp[j]));
  return d.evaluate(args);
}

}  // namespace

Mat moment_matrix(const OVDistribution& d, std::size_t level) {
  if (2 * level > d.order)
    throw InputError("positivity_certificate: level " + std::to_string(level) + " needs order " +
                     std::to_string(2 * level) + ", distribution has order " + std::to_string(d.order));
  std::size_t count = 1, layer = 1;
  for (std::size_t j = 1; j <= level; ++j) {
    layer *= d.k * d.k;
    count += layer;
    if (count * d.k > kMaxMomentMatrixDim) break;
  }
  if (count * d.k > kMaxMomentMatrixDim)
    throw InputError("positivity_certificate: moment matrix at level " + std::to_string(level) +
                     " exceeds the size guard of " + std::to_string(kMaxMomentMatrixDim));
  const auto words = words_up_to(level, d.k);
  AMatrix grid(words.size(), words.size(), d.k);
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = 0; j < words.size(); ++j) grid(i, j) = word_pair_value(d, words[i], words[j]);
  return flatten(grid);
}

PSDReport positivity_certificate(const OVDistribution& d, std::size_t level, double tol) {
  return psd_check(moment_matrix(d, level), tol);
}

}  // namespace ovfree
