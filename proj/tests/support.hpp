#pragma once

#include "ovfree/algebra.hpp"
#include "ovfree/cpmaps.hpp"
#include "ovfree/ovdist.hpp"

#include <random>
#include <vector>

namespace support {

using namespace ovfree;

inline Mat random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g;
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline Mat random_hermitian(std::mt19937& rng, std::size_t n) {
  const Mat m = random_matrix(rng, n, n);
  return 0.5 * (m + m.adjoint());
}

inline Vec random_unit(std::mt19937& rng, std::size_t n) {
  Vec v = random_matrix(rng, n, 1);
  return v / v.norm();
}

/// sum_i K_i^* a K_i with `rank` Gaussian Kraus operators of size `scale`.
inline CPMap random_cp(std::mt19937& rng, std::size_t k, std::size_t rank, double scale = 0.5) {
  std::vector<Mat> kraus;
  for (std::size_t i = 0; i < rank; ++i) kraus.push_back(scale * random_matrix(rng, k, k));
  return CPMap::from_kraus(kraus);
}

inline Realization random_realization(std::mt19937& rng, std::size_t k, std::size_t p) {
  Realization r;
  r.k = k;
  r.p = p;
  r.x = random_hermitian(rng, k * p);
  const Vec v = random_unit(rng, p);
  r.state = v * v.adjoint();
  return r;
}

/// Cumulant family with entries of size ~1, arities 0..order-1.
inline std::vector<MultiMap> random_family(std::mt19937& rng, std::size_t k, std::size_t order) {
  std::vector<MultiMap> out;
  for (std::size_t n = 0; n < order; ++n) {
    MultiMap m(k, n);
    for (std::size_t f = 0; f < m.basis_size(); ++f) m.set(f, random_matrix(rng, k, k));
    out.push_back(std::move(m));
  }
  return out;
}

/// Scalar moments from free cumulants through the power-series identity
/// M(z) = 1 + sum_n kappa_n z^n M(z)^n, iterated to a fixed point.
inline std::vector<double> scalar_moments(const std::vector<double>& cumulants, std::size_t order) {
  const std::size_t len = order + 1;
  auto mul = [len](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(len, 0.0);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; i + j < len; ++j) c[i + j] += a[i] * b[j];
    return c;
  };
  std::vector<double> m(len, 0.0);
  m[0] = 1.0;
  for (std::size_t iter = 0; iter < len; ++iter) {
    std::vector<double> next(len, 0.0), power(len, 0.0);
    next[0] = 1.0;
    power[0] = 1.0;
    for (std::size_t n = 1; n < len; ++n) {
      power = mul(power, m);
      const double kn = n <= cumulants.size() ? cumulants[n - 1] : 0.0;
      for (std::size_t i = 0; i + n < len; ++i) next[i + n] += kn * power[i];
    }
    m = next;
  }
  return {m.begin() + 1, m.end()};
}

}  // namespace support
