#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovfree/converse.hpp"
#include "support.hpp"

using namespace ovfree;

namespace {

CPMap id_plus_transpose() { return CPMap::identity(2) + CPMap::transpose(2); }

// Free tuple: X_c = embedded independent Hermitian blocks of a direct sum.
JointDistribution random_joint(std::mt19937& rng, std::size_t k, std::size_t s, std::size_t order) {
  JointCumulants cums;
  std::vector<ColorWord> words{ColorWord{}};
  for (std::size_t n = 1; n <= order; ++n) {
    std::vector<ColorWord> next;
    for (const auto& w : words)
      for (std::size_t c = 0; c < s; ++c) {
        ColorWord e = w;
        e.push_back(c);
        MultiMap m(k, n - 1);
        for (std::size_t f = 0; f < m.basis_size(); ++f) m.set(f, support::random_matrix(rng, k, k));
        cums.emplace(e, std::move(m));
        next.push_back(std::move(e));
      }
    words = std::move(next);
  }
  return joint_moments_from_cumulants(cums, k, s, order);
}

}  // namespace

TEST_CASE("pack and unpack tuples") {
  std::mt19937 rng(61);
  const auto single = random_joint(rng, 2, 1, 3);
  const auto packed1 = pack_tuple(single);
  CHECK(packed1.k == 2);
  for (std::size_t n = 1; n <= 3; ++n) CHECK(max_abs_diff(packed1.moment(n), single.moment(ColorWord(n, 0))) == 0.0);

  const auto d = random_joint(rng, 1, 4, 3);
  const auto back = unpack_tuple(pack_tuple(d), 2);
  for (const auto& [colors, m] : d.moments) CHECK(max_abs_diff(back.moment(colors), m) < 1e-12);

  // Cumulants composed with eta on the tuple = (id_m (x) eta)-power of the packed variable.
  const CPMap eta = CPMap::scaled_identity(1, 2.5);
  const auto lhs = pack_tuple(eta_power(d, eta));
  const auto rhs = eta_power(pack_tuple(d), amplify(eta, 2));
  for (std::size_t n = 1; n <= 3; ++n) CHECK(max_abs_diff(lhs.moment(n), rhs.moment(n)) < 1e-10);

  const auto dk = random_joint(rng, 2, 4, 2);
  const CPMap psi = support::random_cp(rng, 2, 2);
  const auto lk = pack_tuple(eta_power(dk, psi));
  const auto rk = eta_power(pack_tuple(dk), amplify(psi, 2));
  for (std::size_t n = 1; n <= 2; ++n) CHECK(max_abs_diff(lk.moment(n), rk.moment(n)) < 1e-10);

  CHECK_THROWS_AS(pack_tuple(random_joint(rng, 1, 3, 1)), InputError);
}

TEST_CASE("packed second moment of a diagonal tuple is block diagonal") {
  // X_01 = X_10 = 0, X_00 and X_11 free semicirculars over A = C.
  JointCumulants cums;
  for (std::size_t n = 1; n <= 2; ++n) {
    std::vector<ColorWord> words{ColorWord{}};
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<ColorWord> next;
      for (const auto& w : words)
        for (std::size_t c = 0; c < 4; ++c) {
          ColorWord e = w;
          e.push_back(c);
          next.push_back(e);
        }
      words = next;
    }
    for (const auto& w : words) {
      MultiMap m(1, n - 1);
      if (n == 2 && w[0] == w[1] && (w[0] == 0 || w[0] == 3)) m.set(0, Mat::Constant(1, 1, 1.0));
      cums.emplace(w, m);
    }
  }
  const auto packed = pack_tuple(joint_moments_from_cumulants(cums, 1, 4, 2));
  const Mat second = packed.evaluate(std::vector<Mat>{Mat::Identity(2, 2)});
  CHECK(std::abs(second(0, 1)) < 1e-15);
  CHECK(std::abs(second(1, 0)) < 1e-15);
  CHECK(std::abs(second(0, 0) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(second(1, 1) - cplx(1.0)) < 1e-15);
}

TEST_CASE("witness for eta = id + transpose") {
  const CPMap eta = id_plus_transpose();
  const Witness w = find_witness(eta);
  CHECK(w.m == 2);
  CHECK_NOTHROW(w.validate());
  CHECK(w.phi_of(w.eta_a - w.a) < -2.0 * w.kappa);
  CHECK(w.phi_a() > 0.0);
  CHECK(w.phi_eta_a() > 0.0);
  // eta_m(a) - a is the Choi matrix of eta - id over k.
  CHECK(max_abs_diff(w.eta_a - w.a, eta_minus_id(eta).choi() / 2.0) < 1e-12);
}

TEST_CASE("scalar witness") {
  const Witness w = find_witness(CPMap::scaled_identity(1, 0.9));
  CHECK(w.m == 1);
  CHECK(std::abs(w.a(0, 0) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(w.phi(0, 0) - cplx(1.0)) < 1e-15);
  CHECK(w.phi_of(w.eta_a - w.a) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(find_witness(CPMap::scaled_identity(2, 2.0)), NoWitness);
}

TEST_CASE("GNS model") {
  Witness w;
  w.m = 1;
  w.k = 2;
  w.a = matrix_unit(2, 0, 0);
  w.phi = Mat::Identity(2, 2) / 2.0;
  w.eta_a = w.a;
  const GNSModel g = build_gns(w);
  CHECK(g.rank == 2);
  CHECK(g.h_dim == 4);
  CHECK(max_abs(Mat(g.basis.adjoint() * g.basis - Mat::Identity(4, 4))) < 1e-12);
  CHECK(max_abs_diff(Mat(g.basis.col(0)), Mat(g.xi)) == 0.0);
  CHECK(std::abs(g.vartheta(g.projection) - cplx(1.0 / 4.0)) < 1e-12);
  const Mat pa = g.pi(w.a);
  // Tr(aPa) = phi(a) and the full basis gives vartheta(aPa)/vartheta(P) = phi(a).
  CHECK(std::abs((pa * g.projection * pa).trace() - cplx(0.5)) < 1e-12);
  CHECK(std::abs(g.vartheta(pa * g.projection * pa) / g.vartheta(g.projection) - cplx(0.5)) < 1e-12);

  std::mt19937 rng(62);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat x = support::random_matrix(rng, 2, 2);
    CHECK(std::abs(g.xi.dot(g.pi(x) * g.xi) - (w.phi * x).trace()) < 1e-12);
  }

  Witness scalar = find_witness(CPMap::scaled_identity(1, 0.5));
  const GNSModel s = build_gns(scalar);
  CHECK(s.h_dim == 1);
  CHECK(std::abs(s.projection(0, 0) - cplx(1.0)) < 1e-12);
}

TEST_CASE("compression cumulants") {
  const auto cumulants = bernoulli_cumulants(6);
  CHECK(cumulants[1] == doctest::Approx(1.0));
  CHECK(cumulants[3] == doctest::Approx(-1.0));
  CHECK(cumulants[5] == doctest::Approx(2.0));

  const Witness scalar = find_witness(CPMap::scaled_identity(1, 0.6));
  const auto sc = compression_cumulants(cumulants, scalar, build_gns(scalar));
  CHECK(sc.lambda == doctest::Approx(0.6));

  const Witness w = find_witness(id_plus_transpose());
  const GNSModel g = build_gns(w);
  const auto c = compression_cumulants(cumulants, w, g);
  CHECK(c.lambda < 1.0);
  CHECK(c.lambda > 0.0);
  CHECK(c.lambda < c.bound);
  CHECK(c.bound < 1.0);
  CHECK(c.delta < 1e-12);
  CHECK(c.lambda == doctest::Approx(w.phi_eta_a() / w.phi_a()));
  CHECK(c.max_ratio_deviation < 1e-10);
  CHECK(c.formula_residual < 1e-10);
  for (const auto& [n, ratio] : c.ratios) CHECK(ratio == doctest::Approx(c.lambda).epsilon(1e-10));

  // One basis vector (xi alone) cannot resolve phi(a) within kappa here.
  const GNSModel thin = build_gns(w, 1);
  CHECK(std::abs(thin.vartheta(thin.projection) - cplx(1.0)) < 1e-12);
  CHECK_THROWS_AS(compression_cumulants(cumulants, w, thin), InputError);
  // Two already do: the basis starts with xi and pi(a) xi.
  const auto two = compression_cumulants(cumulants, w, build_gns(w, 2));
  CHECK(two.lambda == doctest::Approx(c.lambda).epsilon(1e-12));
}

TEST_CASE("two-point law powers") {
  const NonPositivity half = certify_nonpositive(0.5, 3);
  CHECK(half.negative());
  CHECK(half.level <= 3);
  CHECK(certify_nonpositive(1.0, 4).report.is_psd());
  CHECK(certify_nonpositive(2.0, 4).report.is_psd());

  // Monotone: smaller lambda fails no later.
  std::size_t previous = 5;
  for (double lambda : {0.9, 0.75, 0.5, 0.25}) {
    const NonPositivity np = certify_nonpositive(lambda, 4);
    REQUIRE(np.negative());
    CHECK(np.level <= previous);
    previous = np.level;
  }
  CHECK_THROWS_AS(certify_nonpositive(0.0, 3), InputError);
}

TEST_CASE("counterexample reports") {
  const auto preserved = counterexample_report(CPMap::scaled_identity(2, 3.0));
  CHECK(preserved.eta_minus_id_cp);
  CHECK_FALSE(preserved.witness.has_value());
  CHECK_FALSE(preserved.lambda().has_value());

  const auto full = counterexample_report(id_plus_transpose());
  CHECK_FALSE(full.eta_minus_id_cp);
  REQUIRE(full.lambda().has_value());
  CHECK(*full.lambda() < 1.0);
  REQUIRE(full.nonpositivity.has_value());
  CHECK(full.nonpositivity->negative());

  const auto scalar = counterexample_report(CPMap::scaled_identity(1, 0.9));
  CHECK(*scalar.lambda() == doctest::Approx(0.9));
  CHECK(scalar.nonpositivity->negative());
}
