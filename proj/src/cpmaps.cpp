#include "ovfree/cpmaps.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_square(const Mat& a, std::size_t k, const char* where) {
  if (a.rows() != idx(k) || a.cols() != idx(k))
    throw InputError(std::string(where) + ": expected a " + std::to_string(k) + "x" + std::to_string(k) + " matrix");
}

}  // namespace

Vec vec(const Mat& m) {
  Vec out(m.size());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(c * m.rows() + r) = m(r, c);
  return out;
}

Mat unvec(const Vec& v, std::size_t k) {
  if (v.size() != idx(k * k)) throw InputError("unvec: length must be k^2");
  Mat out(idx(k), idx(k));
  for (Eigen::Index c = 0; c < idx(k); ++c)
    for (Eigen::Index r = 0; r < idx(k); ++r) out(r, c) = v(c * idx(k) + r);
  return out;
}

CPMap::CPMap(std::size_t k, Mat choi, std::optional<std::vector<Mat>> kraus)
    : k_(k), choi_(std::move(choi)), kraus_(std::move(kraus)) {}

CPMap CPMap::from_choi(Mat choi) {
  if (choi.rows() != choi.cols() || choi.rows() == 0) throw InputError("CPMap: Choi matrix must be square and non-empty");
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(choi.rows()))));
  if (idx(k * k) != choi.rows()) throw InputError("CPMap: Choi dimension must be a perfect square k^2");
  return CPMap(k, std::move(choi), std::nullopt);
}

CPMap CPMap::from_kraus(std::vector<Mat> kraus) {
  if (kraus.empty()) throw InputError("CPMap: empty Kraus list (use CPMap::zero)");
  const auto k = static_cast<std::size_t>(kraus.front().rows());
  if (k == 0) throw InputError("CPMap: Kraus operators must be non-empty");
  Mat choi = Mat::Zero(idx(k * k), idx(k * k));
  for (const Mat& op : kraus) {
    require_square(op, k, "CPMap::from_kraus");
    const Vec w = vec(op.adjoint());
    choi.noalias() += w * w.adjoint();
  }
  return CPMap(k, std::move(choi), std::move(kraus));
}

CPMap CPMap::from_action(std::size_t k, const std::function<Mat(const Mat&)>& action) {
  std::vector<Mat> images;
  images.reserve(k * k);
  for (std::size_t flat = 0; flat < k * k; ++flat) images.push_back(action(matrix_unit(k, flat)));
  return choi_of(k, images);
}

CPMap CPMap::identity(std::size_t k) { return from_kraus({Mat::Identity(idx(k), idx(k))}); }

CPMap CPMap::scaled_identity(std::size_t k, double t) {
  if (t >= 0.0) {
    if (t == 0.0) return zero(k);
    return from_kraus({std::sqrt(t) * Mat::Identity(idx(k), idx(k))});
  }
  return from_action(k, [t](const Mat& a) -> Mat { return t * a; });
}

CPMap CPMap::transpose(std::size_t k) {
  return from_action(k, [](const Mat& a) -> Mat { return a.transpose(); });
}

CPMap CPMap::zero(std::size_t k) {
  if (k == 0) throw InputError("CPMap: k must be positive");
  return CPMap(k, Mat::Zero(idx(k * k), idx(k * k)), std::vector<Mat>{});
}

Mat CPMap::image_of_unit(std::size_t p, std::size_t q) const {
  if (p >= k_ || q >= k_) throw InputError("CPMap::image_of_unit: index out of range");
  return choi_.block(idx(p * k_), idx(q * k_), idx(k_), idx(k_));
}

Mat CPMap::apply(const Mat& a) const {
  require_square(a, k_, "CPMap::apply");
  Mat out = Mat::Zero(idx(k_), idx(k_));
  for (std::size_t p = 0; p < k_; ++p)
    for (std::size_t q = 0; q < k_; ++q) {
      const cplx c = a(idx(p), idx(q));
      if (c == cplx(0.0)) continue;
      out += c * choi_.block(idx(p * k_), idx(q * k_), idx(k_), idx(k_));
    }
  return out;
}

CPMap CPMap::operator+(const CPMap& rhs) const {
  if (k_ != rhs.k_) throw InputError("CPMap sum: dimension mismatch");
  std::optional<std::vector<Mat>> kraus;
  if (kraus_ && rhs.kraus_) {
    kraus = *kraus_;
    kraus->insert(kraus->end(), rhs.kraus_->begin(), rhs.kraus_->end());
  }
  return CPMap(k_, choi_ + rhs.choi_, std::move(kraus));
}

CPMap CPMap::operator-(const CPMap& rhs) const {
  if (k_ != rhs.k_) throw InputError("CPMap difference: dimension mismatch");
  return CPMap(k_, choi_ - rhs.choi_, std::nullopt);
}

CPMap CPMap::operator*(double t) const {
  std::optional<std::vector<Mat>> kraus;
  if (kraus_ && t >= 0.0) {
    kraus = *kraus_;
    for (Mat& op : *kraus) op *= std::sqrt(t);
  }
  return CPMap(k_, t * choi_, std::move(kraus));
}

CPMap choi_of(std::size_t k, std::span<const Mat> images) {
  if (k == 0) throw InputError("choi_of: k must be positive");
  if (images.size() != k * k)
    throw InputError("choi_of: expected " + std::to_string(k * k) + " images, got " + std::to_string(images.size()));
  Mat choi(idx(k * k), idx(k * k));
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q) {
      const Mat& img = images[p * k + q];
      require_square(img, k, "choi_of");
      choi.block(idx(p * k), idx(q * k), idx(k), idx(k)) = img;
    }
  return CPMap::from_choi(std::move(choi));
}

CPMap compose(const CPMap& outer, const CPMap& inner) {
  if (outer.k() != inner.k()) throw InputError("compose: dimension mismatch");
  return CPMap::from_action(inner.k(), [&](const Mat& a) { return outer.apply(inner.apply(a)); });
}

PSDReport is_cp(const CPMap& map, double tol) { return psd_check(map.choi(), tol); }

CPMap eta_minus_id(const CPMap& eta) { return eta - CPMap::identity(eta.k()); }

PSDReport eta_minus_id_cp(const CPMap& eta, double tol) { return is_cp(eta_minus_id(eta), tol); }

std::vector<Mat> kraus_of(const CPMap& map, double tol) {
  PSDReport report = is_cp(map, tol);
  if (!report.is_psd())
    throw NotCompletelyPositive("kraus_of: map is not completely positive (min Choi eigenvalue " +
                                    std::to_string(report.min_eigenvalue) + ")",
                                std::move(report));
  const Mat sym = 0.5 * (map.choi() + map.choi().adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("kraus_of: eigensolver failed");
  const auto& values = solver.eigenvalues();
  const double largest = values(values.size() - 1);
  std::vector<Mat> kraus;
  if (largest <= tol) return kraus;
  // Descending order gives the dominant operator first.
  for (Eigen::Index j = values.size() - 1; j >= 0; --j) {
    if (values(j) <= tol * largest) break;
    const Vec w = std::sqrt(values(j)) * solver.eigenvectors().col(j);
    kraus.push_back(unvec(w, map.k()).adjoint());
  }
  return kraus;
}

CPMap amplify(const CPMap& map, std::size_t m) {
  if (m < 1) throw InputError("amplify: m must be at least 1");
  if (m == 1) return map;
  const std::size_t k = map.k();
  return CPMap::from_action(m * k, [&](const Mat& a) {
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        out.block(idx(i * k), idx(j * k), idx(k), idx(k)) =
            map.apply(a.block(idx(i * k), idx(j * k), idx(k), idx(k)));
    return out;
  });
}

}  // namespace ovfree
