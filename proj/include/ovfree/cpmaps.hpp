#pragma once

// Linear maps M_k -> M_k through their Choi matrices.
//
// Conventions (fixed across the library):
//   * vec() stacks columns: vec(M)[c*k + r] = M(r, c).
//   * The Choi matrix has block (p, q) equal to eta(e_pq), laid out as an
//     AMatrix flattening: choi[(p*k + r), (q*k + s)] = eta(e_pq)(r, s).
//   * Kraus form is eta(a) = sum_i K_i^* a K_i, so that
//     choi = sum_i vec(K_i^*) vec(K_i^*)^*.

#include "ovfree/algebra.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ovfree {

/// Column-stacking vectorization.
Vec vec(const Mat& m);
/// Inverse of vec for a k x k matrix.
Mat unvec(const Vec& v, std::size_t k);

/// A linear map on M_k stored through its Choi matrix, with an optional
/// Kraus decomposition when it was built from one. The name follows the
/// usual role of these maps; complete positivity is checked, not assumed.
class CPMap {
 public:
  static CPMap from_choi(Mat choi);
  static CPMap from_kraus(std::vector<Mat> kraus);
  static CPMap from_action(std::size_t k, const std::function<Mat(const Mat&)>& action);

  static CPMap identity(std::size_t k);
  static CPMap scaled_identity(std::size_t k, double t);
  static CPMap transpose(std::size_t k);
  static CPMap zero(std::size_t k);

  std::size_t k() const { return k_; }
  const Mat& choi() const { return choi_; }
  const std::optional<std::vector<Mat>>& kraus() const { return kraus_; }

  /// eta(e_pq), the (p, q) Choi block.
  Mat image_of_unit(std::size_t p, std::size_t q) const;

  Mat apply(const Mat& a) const;

  CPMap operator+(const CPMap& rhs) const;
  CPMap operator-(const CPMap& rhs) const;
  CPMap operator*(double t) const;

 private:
  CPMap(std::size_t k, Mat choi, std::optional<std::vector<Mat>> kraus);

  std::size_t k_;
  Mat choi_;
  std::optional<std::vector<Mat>> kraus_;
};

/// Choi construction from the images of the k^2 matrix units, ordered by
/// flat index p*k + q.
CPMap choi_of(std::size_t k, std::span<const Mat> images);

inline Mat apply(const CPMap& map, const Mat& a) { return map.apply(a); }

/// outer o inner.
CPMap compose(const CPMap& outer, const CPMap& inner);

PSDReport is_cp(const CPMap& map, double tol = kDefaultTol);

/// a |-> eta(a) - a.
CPMap eta_minus_id(const CPMap& eta);
PSDReport eta_minus_id_cp(const CPMap& eta, double tol = kDefaultTol);

/// Thrown where a completely positive map is required; carries the Choi
/// certificate exhibiting the negative direction.
class NotCompletelyPositive : public std::runtime_error {
 public:
  NotCompletelyPositive(const std::string& what, PSDReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const PSDReport& report() const { return report_; }

 private:
  PSDReport report_;
};

/// Minimal Kraus decomposition from the Choi eigendecomposition. Eigenvalues
/// below tol * (largest eigenvalue) are discarded.
std::vector<Mat> kraus_of(const CPMap& map, double tol = kDefaultTol);

/// id_m (x) eta acting blockwise on M_m(M_k) = M_{mk}.
CPMap amplify(const CPMap& map, std::size_t m);

}  // namespace ovfree
