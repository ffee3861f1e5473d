#pragma once

// The converse direction: when eta - id is not completely positive, build a
// projection a and a state phi with phi(eta_m(a)) < phi(a), compress through
// a GNS model to a scalar convolution power lambda < 1, and refute positivity
// of the two-point law's lambda-power with a moment-matrix witness.

#include "ovfree/algebra.hpp"
#include "ovfree/cpmaps.hpp"
#include "ovfree/ovdist.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ovfree {

// ---------------------------------------------------------------------------
// Tuples <-> matrices over A

using ColorWord = std::vector<std::size_t>;

/// Joint A-valued moments of an s-tuple (X_0, ..., X_{s-1}):
/// moments[(c_1..c_n)] is (a_1..a_{n-1}) |-> E(X_{c_1} a_1 X_{c_2} ... X_{c_n}).
struct JointDistribution {
  std::size_t k = 1;
  std::size_t s = 1;
  std::size_t order = 0;
  std::map<ColorWord, MultiMap> moments;

  const MultiMap& moment(const ColorWord& colors) const;
};

/// Same layout as JointDistribution, holding joint cumulants.
using JointCumulants = std::map<ColorWord, MultiMap>;

JointDistribution joint_moments_from_cumulants(const JointCumulants& cumulants, std::size_t k, std::size_t s,
                                               std::size_t order);
JointCumulants joint_cumulants_from_moments(const JointDistribution& d);
/// Joint cumulants composed with eta.
JointDistribution eta_power(const JointDistribution& d, const CPMap& eta);

/// X = (X_ij) as an M_m(A)-valued variable, color of X_ij = i*m + j and
/// M_m(M_k) indexed (i*k + p). Requires s = m^2.
OVDistribution pack_tuple(const JointDistribution& d);
JointDistribution unpack_tuple(const OVDistribution& packed, std::size_t m);

// ---------------------------------------------------------------------------
// Witness and GNS model

struct Witness {
  std::size_t m = 1;
  std::size_t k = 1;
  /// Projection in M_m(A) = M_{mk}.
  Mat a;
  /// Density matrix of phi.
  Mat phi;
  /// eta_m(a).
  Mat eta_a;
  double kappa = 0.0;
  /// Convex weight given to the state strictly positive on a.
  double mixing_weight = 0.0;

  double phi_of(const Mat& x) const { return (phi * x).trace().real(); }
  double phi_a() const { return phi_of(a); }
  double phi_eta_a() const { return phi_of(eta_a); }
  /// Throws std::logic_error if an invariant fails.
  void validate(double tol = kDefaultTol) const;
};

class NoWitness : public std::runtime_error {
 public:
  NoWitness(const std::string& what, PSDReport report) : std::runtime_error(what), report_(std::move(report)) {}
  const PSDReport& report() const { return report_; }

 private:
  PSDReport report_;
};

/// m = k, a = projection onto the maximally entangled vector, phi the
/// negative Choi eigenvector state of eta - id, mixed (midpoint of the
/// feasible weights) with the vector state of a or a positive eigenvector of
/// eta_m(a) when needed for 0 < phi(eta_m(a)) < phi(a). Throws NoWitness when
/// eta - id is completely positive or no such mixture exists.
Witness find_witness(const CPMap& eta, double tol = kDefaultTol);

/// GNS representation of phi on M_D (D = mk): H = C^D (x) C^R with R the rank
/// of phi, pi(x) = x (x) 1, cyclic vector the purification of phi.
struct GNSModel {
  std::size_t dim = 0;  // D
  std::size_t rank = 0;  // R
  std::size_t h_dim = 0;
  Vec xi;
  /// Orthonormal columns, basis.col(0) == xi.
  Mat basis;
  /// Number of basis vectors averaged by vartheta.
  std::size_t n = 0;
  /// Rank-one projection onto xi.
  Mat projection;

  Mat pi(const Mat& x) const;
  /// (1/N) sum_j <xi_j, op xi_j>.
  cplx vartheta(const Mat& op) const;
};

/// basis_count = 0 uses the full basis (N = h_dim). The basis starts with
/// xi and pi(a) xi, so any N >= 2 already gives vartheta(aPa)/vartheta(P) = phi(a).
GNSModel build_gns(const Witness& w, std::size_t basis_count = 0, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Compression cumulants

/// Cumulant chain for the compression of a scalar variable with cumulants
/// omega_1..omega_N. h arguments are operators on the GNS space.
class CompressionChain {
 public:
  CompressionChain(std::vector<double> scalar_cumulants, const Witness& w, const GNSModel& g);

  std::size_t order() const { return omega_.size(); }
  double omega(std::size_t n) const { return omega_.at(n - 1); }

  /// Cumulant of a^{1/2} X a^{1/2}: omega_{n+1} vartheta(a h_1 a) ... vartheta(a h_n a) a.
  Mat omega_prime(std::span<const Mat> h) const;
  /// eta-amplified: eta_m(a) omega_{n+1} prod vartheta(a h_j a).
  Mat omega_double(std::span<const Mat> h) const;
  /// Compressed by P: P eta_m(a) P omega_{n+1} prod vartheta(a P h_j P a).
  Mat omega_triple(std::span<const Mat> h) const;
  /// Same, using P eta_m(a) P = phi(eta_m(a)) P.
  Mat omega_triple_reduced(std::span<const Mat> h) const;
  /// Scalar cumulant vartheta(omega'''_{n+1}(1, ..., 1)).
  double omega_hat(std::size_t n_plus_1) const;
  /// vartheta(P) phi(eta_m(a)) vartheta(aPa)^n omega_{n+1}.
  double omega_hat_closed(std::size_t n_plus_1) const;
  /// Cumulants of Z = vartheta(aPa)^{-1} P Y P.
  double omega_tilde(std::size_t n) const;

  double vartheta_p() const { return theta_p_; }
  double vartheta_apa() const { return theta_apa_; }
  double lambda() const;

 private:
  double product_over(std::span<const Mat> h, bool through_p) const;

  std::vector<double> omega_;
  const Witness* w_;
  const GNSModel* g_;
  Mat pa_;
  Mat pea_;
  double theta_p_;
  double theta_apa_;
};

struct CompressionResult {
  double lambda = 0.0;
  double delta = 0.0;
  /// (phi(a) - kappa) / (phi(a) - delta).
  double bound = 1.0;
  std::vector<double> omega_tilde;  // omega_tilde[n-1]
  /// (n, omega_tilde_n / omega_n) for omega_n != 0.
  std::vector<std::pair<std::size_t, double>> ratios;
  double max_ratio_deviation = 0.0;
  /// Largest mismatch between each displayed formula and its reduced form.
  double formula_residual = 0.0;
};

/// Evaluates the chain for n = 1..N, checks omega_tilde_n = lambda omega_n and
/// lambda < (phi(a) - kappa)/(phi(a) - delta) < 1. Throws std::logic_error on
/// a failed check and InputError when delta >= kappa.
CompressionResult compression_cumulants(std::span<const double> scalar_cumulants, const Witness& w,
                                        const GNSModel& g);

/// Free cumulants omega_1..omega_N of the two-point law.
std::vector<double> bernoulli_cumulants(std::size_t order);

struct NonPositivity {
  double lambda = 0.0;
  /// First level with a negative eigenvalue, or the largest level checked.
  std::size_t level = 0;
  PSDReport report;

  bool negative() const { return !report.is_psd(); }
};

/// Two-point law with cumulants scaled by lambda; moment-matrix sweep over
/// levels 1..max_level. Requires lambda > 0.
NonPositivity certify_nonpositive(double lambda, std::size_t max_level, double tol = kDefaultTol);

struct CounterexampleReport {
  bool eta_minus_id_cp = false;
  PSDReport cp_report;
  std::optional<Witness> witness;
  std::optional<CompressionResult> compression;
  std::optional<NonPositivity> nonpositivity;

  std::optional<double> lambda() const {
    return compression ? std::optional<double>(compression->lambda) : std::nullopt;
  }
};

CounterexampleReport counterexample_report(const CPMap& eta, std::size_t max_level = 4,
                                           double tol = kDefaultTol);

}  // namespace ovfree
