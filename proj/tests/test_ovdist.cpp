#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <cstdlib>

using namespace ovfree;

namespace {

double scalar(const OVDistribution& d, std::size_t n) { return d.moment(n).at(0)(0, 0).real(); }

std::vector<Mat> word_args(std::mt19937& rng, std::size_t k, std::size_t count) {
  std::vector<Mat> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(support::random_matrix(rng, k, k));
  return out;
}

// E(X a_1 X ... a_n X) by direct matrix arithmetic.
Mat direct_moment(const Realization& r, const std::vector<Mat>& args) {
  Mat w = r.x;
  for (const auto& a : args) w = w * r.embed(a) * r.x;
  return r.condexp(w);
}

std::vector<double> catalan_moments(std::size_t order) {
  std::vector<double> m(order, 0.0);
  double c = 1.0;
  for (std::size_t j = 1; 2 * j <= order; ++j) {
    c = c * 2.0 * (2.0 * double(j) - 1.0) / (double(j) + 1.0);
    m[2 * j - 1] = c;
  }
  return m;
}

}  // namespace

TEST_CASE("MultiMap is multilinear over the matrix-unit basis") {
  std::mt19937 rng(31);
  MultiMap m(2, 2);
  for (std::size_t f = 0; f < m.basis_size(); ++f) m.set(f, support::random_matrix(rng, 2, 2));
  CHECK(m.basis_size() == 16);

  const auto args = word_args(rng, 2, 2);
  Mat expected = Mat::Zero(2, 2);
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t v = 0; v < 4; ++v)
      expected += args[0](Eigen::Index(u / 2), Eigen::Index(u % 2)) * args[1](Eigen::Index(v / 2), Eigen::Index(v % 2)) *
                  m.at(u * 4 + v);
  CHECK(max_abs_diff(m(args), expected) < 1e-12);
  CHECK(decode_index(13, 2, 2) == std::vector<std::size_t>{3, 1});
  CHECK_THROWS_AS(m.at(16), InputError);
}

TEST_CASE("realization validation names the violated identity") {
  std::mt19937 rng(32);
  Realization r = support::random_realization(rng, 2, 2);
  CHECK_NOTHROW(r.validate());

  Realization bad_x = r;
  bad_x.x(0, 1) += 1.0;
  CHECK_THROWS_WITH_AS(bad_x.validate(), doctest::Contains("X = X^*"), InputError);

  Realization bad_trace = r;
  bad_trace.state *= 2.0;
  CHECK_THROWS_WITH_AS(bad_trace.validate(), doctest::Contains("E(1) = 1"), InputError);

  Realization bad_state = r;
  bad_state.state = Mat::Zero(2, 2);
  bad_state.state(0, 0) = 1.5;
  bad_state.state(1, 1) = -0.5;
  CHECK_THROWS_WITH_AS(bad_state.validate(), doctest::Contains("positivity"), InputError);
}

TEST_CASE("moments of realized variables") {
  // Identity over A = C.
  Realization one{1, 3, Mat::Identity(3, 3), Mat::Identity(3, 3) / 3.0};
  const auto d1 = moments_from_realization(one, 5);
  for (std::size_t n = 1; n <= 5; ++n) CHECK(scalar(d1, n) == doctest::Approx(1.0));

  // Symmetric +-1 under the normalized trace.
  Mat x = Mat::Zero(2, 2);
  x(0, 0) = -1.0;
  x(1, 1) = 1.0;
  const auto d2 = moments_from_realization(Realization{1, 2, x, Mat::Identity(2, 2) / 2.0}, 4);
  CHECK(std::abs(scalar(d2, 1)) < 1e-15);
  CHECK(scalar(d2, 2) == doctest::Approx(1.0));
  CHECK(std::abs(scalar(d2, 3)) < 1e-15);
  CHECK(scalar(d2, 4) == doctest::Approx(1.0));

  // M_2 in M_2 (x) M_2 with E = id (x) normalized trace.
  std::mt19937 rng(33);
  Realization r = support::random_realization(rng, 2, 2);
  r.state = Mat::Identity(2, 2) / 2.0;
  const auto d = moments_from_realization(r, 4);
  for (int trial = 0; trial < 5; ++trial)
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto args = word_args(rng, 2, n - 1);
      CHECK(max_abs_diff(d.evaluate(args), direct_moment(r, args)) < 1e-10);
    }
  CHECK(d.hermitian_defect() < 1e-12);
  CHECK_THROWS_AS(moments_from_realization(r, 0), InputError);
  CHECK_THROWS_AS(moments_from_realization(r, 11), InputError);
}

TEST_CASE("scalar cumulants against the power-series oracle") {
  const auto semicircle = scalar_distribution(catalan_moments(8));
  const auto sc = cumulants_from_moments(semicircle);
  for (std::size_t n = 1; n <= 8; ++n) CHECK(std::abs(sc[n - 1].at(0)(0, 0) - cplx(n == 2 ? 1.0 : 0.0)) < 1e-12);

  const auto bc = cumulants_from_moments(bernoulli_distribution(6));
  const double expected[] = {0, 1, 0, -1, 0, 2};
  for (std::size_t n = 1; n <= 6; ++n) CHECK(std::abs(bc[n - 1].at(0)(0, 0) - cplx(expected[n - 1])) < 1e-12);

  const double pair_only[] = {0.0, 1.0};
  std::vector<MultiMap> fam = scalar_family(pair_only);
  for (std::size_t n = 3; n <= 6; ++n) fam.emplace_back(1, n - 1);
  const auto sm = moments_from_cumulants(fam, 6);
  CHECK(scalar(sm, 2) == doctest::Approx(1.0));
  CHECK(scalar(sm, 4) == doctest::Approx(2.0));
  CHECK(scalar(sm, 6) == doctest::Approx(5.0));

  std::vector<double> point(6, 0.0);
  point[0] = 1.7;
  const auto pm = moments_from_cumulants(scalar_family(point), 6);
  for (std::size_t n = 1; n <= 6; ++n) CHECK(scalar(pm, n) == doctest::Approx(std::pow(1.7, double(n))));

  std::mt19937 rng(34);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> kappa(8);
    for (double& c : kappa) c = g(rng);
    const auto oracle = support::scalar_moments(kappa, 8);
    const auto got = moments_from_cumulants(scalar_family(kappa), 8);
    for (std::size_t n = 1; n <= 8; ++n) CHECK(scalar(got, n) == doctest::Approx(oracle[n - 1]).epsilon(1e-10));
  }
}

TEST_CASE("operator-valued cumulants of low order by hand") {
  std::mt19937 rng(35);
  const Realization r = support::random_realization(rng, 2, 3);
  const auto d = moments_from_realization(r, 3);
  const auto c = cumulants_from_moments(d);
  const Mat w1 = c[0].at(0);
  auto w2 = [&](const Mat& a) { return c[1](std::vector<Mat>{a}); };
  for (int trial = 0; trial < 5; ++trial) {
    const auto ab = word_args(rng, 2, 2);
    const Mat& a = ab[0];
    const Mat& b = ab[1];
    CHECK(max_abs_diff(w1, d.evaluate(std::vector<Mat>{})) < 1e-12);
    CHECK(max_abs_diff(w2(a), d.evaluate(std::vector<Mat>{a}) - w1 * a * w1) < 1e-10);
    const Mat w3 = d.evaluate(ab) - w1 * a * w1 * b * w1 - w2(a) * b * w1 - w1 * a * w2(b) - w2(a * w1 * b);
    CHECK(max_abs_diff(c[2](ab), w3) < 1e-10);
  }
}

TEST_CASE("an element of A has vanishing higher cumulants") {
  std::mt19937 rng(36);
  const Mat a0 = support::random_hermitian(rng, 2);
  const auto c = cumulants_from_moments(moments_from_realization(Realization{2, 1, a0, Mat::Identity(1, 1)}, 5));
  CHECK(max_abs_diff(c[0].at(0), a0) < 1e-12);
  for (std::size_t n = 2; n <= 5; ++n) {
    double worst = 0.0;
    for (std::size_t f = 0; f < c[n - 1].basis_size(); ++f) worst = std::max(worst, max_abs(c[n - 1].at(f)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("moment-cumulant round trip over M_2") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 3; ++trial) {
    const auto fam = support::random_family(rng, 2, 6);
    const auto back = cumulants_from_moments(moments_from_cumulants(fam, 6));
    for (std::size_t n = 0; n < 6; ++n) CHECK(max_abs_diff(back[n], fam[n]) < 1e-9);

    const auto d = moments_from_cumulants(support::random_family(rng, 2, 6), 6);
    const auto again = moments_from_cumulants(cumulants_from_moments(d), 6);
    for (std::size_t n = 1; n <= 6; ++n) CHECK(max_abs_diff(again.moment(n), d.moment(n)) < 1e-9);
  }
}

TEST_CASE("eta powers") {
  std::mt19937 rng(38);
  const Realization r = support::random_realization(rng, 2, 2);
  const auto d = moments_from_realization(r, 5);
  const auto same = eta_power(d, CPMap::identity(2));
  for (std::size_t n = 1; n <= 5; ++n) CHECK(max_abs_diff(same.moment(n), d.moment(n)) < 1e-10);

  const auto semicircle = scalar_distribution(catalan_moments(6));
  for (double t : {0.5, 2.0, 3.5}) {
    const auto p = eta_power(semicircle, CPMap::scaled_identity(1, t));
    CHECK(scalar(p, 2) == doctest::Approx(t));
    CHECK(scalar(p, 4) == doctest::Approx(2 * t * t));
  }

  const auto half = eta_power(bernoulli_distribution(6), CPMap::scaled_identity(1, 0.5));
  CHECK(scalar(half, 2) == doctest::Approx(0.5));
  CHECK(std::abs(scalar(half, 4)) < 1e-12);
  Mat hankel(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) hankel(i, j) = i + j == 0 ? 1.0 : scalar(half, std::size_t(i + j));
  CHECK(std::abs(hankel.determinant() - cplx(-0.125)) < 1e-12);

  // Composition law: cumulants of the iterated power are (eta2 o eta1) o omega.
  const CPMap e1 = support::random_cp(rng, 2, 2), e2 = support::random_cp(rng, 2, 1);
  const auto twice = cumulants_from_moments(eta_power(eta_power(d, e1), e2));
  const auto base = cumulants_from_moments(d);
  const CPMap both = compose(e2, e1);
  for (std::size_t n = 0; n < 5; ++n) CHECK(max_abs_diff(twice[n], base[n].mapped(both)) < 1e-9);
  CHECK(eta_power(d, e1).hermitian_defect() < 1e-10);

  CHECK_THROWS_AS(eta_power(d, CPMap::identity(3)), InputError);
}

TEST_CASE("positivity certificates") {
  std::mt19937 rng(39);
  for (int trial = 0; trial < 2; ++trial) {
    const auto d = moments_from_realization(support::random_realization(rng, 2, 2), 8);
    CHECK(positivity_certificate(d, 4).is_psd());
  }

  const auto half = eta_power(bernoulli_distribution(6), CPMap::scaled_identity(1, 0.5));
  const PSDReport level3 = positivity_certificate(half, 3);
  CHECK_FALSE(level3.is_psd());
  // Degree <= 2 already holds the 3 x 3 Hankel block of determinant -1/8.
  CHECK_FALSE(positivity_certificate(half, 2).is_psd());

  const auto semicircle = scalar_distribution(catalan_moments(8));
  CHECK(positivity_certificate(eta_power(semicircle, CPMap::scaled_identity(1, 2.0)), 4).is_psd());

  CHECK_THROWS_AS(positivity_certificate(half, 4), InputError);
  CHECK(moment_matrix(half, 1).rows() == 2);
}

TEST_CASE("order guard honours OVFREE_MAX_ORDER") {
  CHECK(order_limit() == kDefaultOrderLimit);
  setenv("OVFREE_MAX_ORDER", "12", 1);
  CHECK(order_limit() == 12);
  setenv("OVFREE_MAX_ORDER", "junk", 1);
  CHECK(order_limit() == kDefaultOrderLimit);
  unsetenv("OVFREE_MAX_ORDER");
}
