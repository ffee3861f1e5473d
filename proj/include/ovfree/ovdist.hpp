#pragma once

// A-valued distributions of one self-adjoint variable X over A = M_k(C):
// moment maps M_n(a_1, ..., a_{n-1}) = E(X a_1 X ... a_{n-1} X), free
// cumulants, eta-convolution powers and moment-matrix certificates.

#include "ovfree/algebra.hpp"
#include "ovfree/cpmaps.hpp"
#include "ovfree/ncpart.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ovfree {

/// Hard cap on the number of stored complex entries of one MultiMap.
inline constexpr std::size_t kMaxTensorEntries = std::size_t{1} << 22;

inline constexpr std::size_t kDefaultOrderLimit = 10;

/// Order guard: default_limit unless OVFREE_MAX_ORDER is set.
std::size_t order_limit(std::size_t default_limit = kDefaultOrderLimit);

/// A C-multilinear map A^arity -> A stored densely over matrix units.
///
/// The input multi-index (i_1, ..., i_n) has i_j = p*k + q for e_pq and is
/// flattened row-major with i_1 most significant.
class MultiMap {
 public:
  MultiMap(std::size_t k, std::size_t arity);

  std::size_t k() const { return k_; }
  std::size_t arity() const { return arity_; }
  /// (k^2)^arity.
  std::size_t basis_size() const { return basis_size_; }

  Mat at(std::size_t flat) const;
  void set(std::size_t flat, const Mat& value);

  /// Multilinear evaluation; zero coefficients of the arguments are skipped.
  Mat operator()(std::span<const Mat> args) const;

  std::span<const cplx> data() const { return data_; }

  /// eta applied to every output value.
  MultiMap mapped(const CPMap& eta) const;

 private:
  std::size_t k_;
  std::size_t arity_;
  std::size_t basis_size_;
  std::vector<cplx> data_;
};

double max_abs_diff(const MultiMap& a, const MultiMap& b);

/// max over basis inputs of |T(a_1..a_n)^* - T(a_n^*..a_1^*)|.
double hermitian_defect(const MultiMap& m);

std::vector<std::size_t> decode_index(std::size_t flat, std::size_t k, std::size_t arity);

struct OVDistribution {
  std::size_t k = 1;
  std::size_t order = 0;
  /// moments[n-1] is M_n, of arity n-1.
  std::vector<MultiMap> moments;
  std::string label;

  const MultiMap& moment(std::size_t n) const { return moments.at(n - 1); }
  /// M_{args.size()+1}(args).
  Mat evaluate(std::span<const Mat> args) const;
  double hermitian_defect() const;
};

/// A concrete self-adjoint X in M_d, d = k*p, with A embedded as a (x) 1_p
/// (row index i*p + s) and E = id_A (x) state, E(x)_ij = Tr(state * x_ij).
struct Realization {
  std::size_t k = 1;
  std::size_t p = 1;
  Mat x;
  Mat state;

  std::size_t d() const { return k * p; }
  Mat embed(const Mat& a) const;
  Mat condexp(const Mat& m) const;
  /// Throws InputError naming the violated identity.
  void validate(double tol = kDefaultTol) const;
};

OVDistribution moments_from_realization(const Realization& r, std::size_t order);

/// Value of one block given its (already nested) arguments.
using BlockValue = std::function<Mat(const std::vector<std::size_t>& block, std::span<const Mat> args)>;

/// Nested evaluation of kappa_pi on the word X letters[0] X ... letters[n-2] X.
Mat evaluate_partition(const NCPartition& partition, const EvaluationPlan& plan, std::span<const Mat> letters,
                       std::size_t k, const BlockValue& block_value);

/// cumulants[n-1] is omega_n.
std::vector<MultiMap> cumulants_from_moments(const OVDistribution& d);
OVDistribution moments_from_cumulants(std::span<const MultiMap> cumulants, std::size_t order);

OVDistribution eta_power(const OVDistribution& d, const CPMap& eta);

/// A = C family of constant maps, values[n-1] for arity n-1.
std::vector<MultiMap> scalar_family(std::span<const double> values);
/// A = C distribution with moments m_1, ..., m_N.
OVDistribution scalar_distribution(std::span<const double> moments, std::string label = "scalar");
/// Symmetric two-point law (delta_{-1} + delta_{+1}) / 2 up to the given order.
OVDistribution bernoulli_distribution(std::size_t order);

/// Largest flattened moment matrix positivity_certificate will build.
inline constexpr std::size_t kMaxMomentMatrixDim = 4096;

/// Block moment matrix (mu(w_i^* w_j)) over words a_0 X a_1 X ... a_{j-1} X of
/// X-degree j <= level (a's over matrix units; the empty word is 1). A PSD
/// result certifies positivity only up to this level; a witness refutes it.
PSDReport positivity_certificate(const OVDistribution& d, std::size_t level, double tol = kDefaultTol);

/// The flattened moment matrix itself.
Mat moment_matrix(const OVDistribution& d, std::size_t level);

}  // namespace ovfree
