#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace ovfree;

namespace {

std::vector<double> spectrum(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> s(h);
  std::vector<double> out(s.eigenvalues().data(), s.eigenvalues().data() + s.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

void check_spectrum(const Mat& h, std::vector<double> expected) {
  std::sort(expected.begin(), expected.end());
  const auto got = spectrum(h);
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

Mat kraus_action(const std::vector<Mat>& kraus, const Mat& a) {
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (const auto& k : kraus) out += k.adjoint() * a * k;
  return out;
}

}  // namespace

TEST_CASE("vec stacks columns") {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  const Vec v = vec(m);
  CHECK(v(0) == cplx(1.0));
  CHECK(v(1) == cplx(3.0));
  CHECK(v(2) == cplx(2.0));
  CHECK(v(3) == cplx(4.0));
  CHECK(max_abs_diff(unvec(v, 2), m) == 0.0);
}

TEST_CASE("choi_of on standard maps") {
  check_spectrum(CPMap::identity(2).choi(), {2, 0, 0, 0});
  check_spectrum(CPMap::transpose(2).choi(), {1, 1, 1, -1});

  // a |-> tr(a) 1 / k has Choi I / k.
  const std::size_t k = 3;
  std::vector<Mat> images;
  for (std::size_t u = 0; u < k * k; ++u) images.push_back(matrix_unit(k, u).trace() * Mat::Identity(k, k) / double(k));
  CHECK(max_abs_diff(choi_of(k, images).choi(), Mat::Identity(k * k, k * k) / double(k)) < 1e-15);

  // Choi block (p, q) is the image of e_pq.
  std::mt19937 rng(21);
  const CPMap psi = support::random_cp(rng, 3, 2);
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t q = 0; q < 3; ++q)
      CHECK(max_abs_diff(psi.image_of_unit(p, q), kraus_action(*psi.kraus(), matrix_unit(3, p, q))) < 1e-12);

  CHECK_THROWS_AS(choi_of(2, std::vector<Mat>(3, Mat::Zero(2, 2))), InputError);
}

TEST_CASE("apply reconstructed from the Choi matrix") {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const CPMap psi = support::random_cp(rng, 3, 3);
    const CPMap from_choi = CPMap::from_choi(psi.choi());
    const Mat a = support::random_matrix(rng, 3, 3);
    CHECK(max_abs_diff(from_choi.apply(a), kraus_action(*psi.kraus(), a)) < 1e-10);
    CHECK(max_abs_diff(from_choi.apply(a.adjoint()), from_choi.apply(a).adjoint()) < 1e-10);

    std::vector<Mat> images;
    for (std::size_t u = 0; u < 9; ++u) images.push_back(psi.apply(matrix_unit(3, u)));
    CHECK(max_abs_diff(choi_of(3, images).choi(), psi.choi()) < 1e-12);
  }
  const Mat a = support::random_matrix(rng, 2, 2);
  CHECK(max_abs_diff(CPMap::identity(2).apply(a), a) < 1e-15);
  const std::vector<Mat> kraus{support::random_matrix(rng, 2, 2), support::random_matrix(rng, 2, 2)};
  CHECK(max_abs_diff(CPMap::from_kraus(kraus).apply(Mat::Identity(2, 2)),
                     kraus[0].adjoint() * kraus[0] + kraus[1].adjoint() * kraus[1]) < 1e-12);
  CHECK_THROWS_AS(CPMap::identity(2).apply(Mat::Identity(3, 3)), InputError);
}

TEST_CASE("is_cp and eta_minus_id_cp") {
  std::mt19937 rng(23);
  CHECK(is_cp(CPMap::identity(3)).is_psd());
  const PSDReport t = is_cp(CPMap::transpose(2));
  REQUIRE_FALSE(t.is_psd());
  // The witness is the antisymmetric vector (e_01 - e_10)/sqrt 2.
  const Vec& w = *t.witness;
  CHECK(std::abs(w(0)) < 1e-12);
  CHECK(std::abs(w(3)) < 1e-12);
  CHECK(std::abs(w(1) + w(2)) < 1e-12);
  CHECK(std::abs(std::abs(w(1)) - std::sqrt(0.5)) < 1e-12);

  const std::vector<Mat> single{support::random_matrix(rng, 3, 3)};
  CHECK(is_cp(CPMap::from_kraus(single)).is_psd());

  CHECK(eta_minus_id_cp(CPMap::scaled_identity(2, 2.0)).is_psd());
  const PSDReport boundary = eta_minus_id_cp(CPMap::identity(2));
  CHECK(boundary.is_psd());
  CHECK(std::abs(boundary.min_eigenvalue) < 1e-12);
  CHECK_FALSE(eta_minus_id_cp(CPMap::scaled_identity(2, 0.5)).is_psd());

  // eta - id CP implies eta CP.
  for (int trial = 0; trial < 20; ++trial) {
    const CPMap eta = CPMap::identity(2) + support::random_cp(rng, 2, 2) - CPMap::scaled_identity(2, 0.3);
    if (eta_minus_id_cp(eta).is_psd()) CHECK(is_cp(eta).is_psd());
  }
}

TEST_CASE("kraus_of") {
  std::mt19937 rng(24);
  const auto id = kraus_of(CPMap::identity(3));
  REQUIRE(id.size() == 1);
  // Unique up to a phase.
  CHECK(max_abs(Mat(id[0].adjoint() * id[0] - Mat::Identity(3, 3))) < 1e-12);
  CHECK(std::abs(std::abs(id[0](0, 0)) - 1.0) < 1e-12);

  const auto two = kraus_of(eta_minus_id(CPMap::scaled_identity(2, 3.0)));
  REQUIRE(two.size() == 1);
  CHECK(max_abs(Mat(two[0].adjoint() * two[0] - 2.0 * Mat::Identity(2, 2))) < 1e-12);

  for (std::size_t rank = 1; rank <= 3; ++rank) {
    const CPMap psi = support::random_cp(rng, 3, rank);
    const auto kraus = kraus_of(psi);
    CHECK(kraus.size() == rank);
    for (std::size_t u = 0; u < 9; ++u)
      CHECK(max_abs_diff(kraus_action(kraus, matrix_unit(3, u)), psi.apply(matrix_unit(3, u))) < 1e-9);
    CHECK(max_abs_diff(CPMap::from_kraus(kraus).choi(), psi.choi()) < 1e-9);
  }
  try {
    kraus_of(CPMap::transpose(2));
    FAIL("transpose accepted");
  } catch (const NotCompletelyPositive& e) {
    CHECK(e.report().min_eigenvalue == doctest::Approx(-1.0));
    CHECK(e.report().witness.has_value());
  }
}

TEST_CASE("amplify") {
  std::mt19937 rng(25);
  const CPMap psi = support::random_cp(rng, 2, 2);
  CHECK(max_abs_diff(amplify(psi, 1).choi(), psi.choi()) < 1e-15);
  const Mat a = support::random_matrix(rng, 6, 6);
  CHECK(max_abs_diff(amplify(CPMap::identity(2), 3).apply(a), a) < 1e-12);

  const Mat big = amplify(psi, 3).apply(a);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(max_abs_diff(big.block(2 * i, 2 * j, 2, 2), psi.apply(a.block(2 * i, 2 * j, 2, 2))) < 1e-12);

  CHECK(is_cp(amplify(psi, 2)).is_psd());
  CHECK_FALSE(is_cp(amplify(CPMap::transpose(2), 2)).is_psd());
  CHECK_THROWS_AS(amplify(psi, 0), InputError);
}

TEST_CASE("map arithmetic and composition") {
  std::mt19937 rng(26);
  const CPMap p = support::random_cp(rng, 2, 2), q = support::random_cp(rng, 2, 1);
  const Mat a = support::random_matrix(rng, 2, 2);
  CHECK(max_abs_diff((p + q).apply(a), p.apply(a) + q.apply(a)) < 1e-12);
  CHECK(max_abs_diff((p - q).apply(a), p.apply(a) - q.apply(a)) < 1e-12);
  CHECK(max_abs_diff((p * 2.5).apply(a), 2.5 * p.apply(a)) < 1e-12);
  CHECK(max_abs_diff(compose(p, q).apply(a), p.apply(q.apply(a))) < 1e-12);
  CHECK(max_abs_diff(eta_minus_id(p).apply(a), p.apply(a) - a) < 1e-12);
  CHECK(max_abs(CPMap::zero(2).apply(a)) == 0.0);
  CHECK(max_abs_diff(CPMap::scaled_identity(2, 0.0).apply(a), Mat::Zero(2, 2)) == 0.0);
}
