#include "ovfree/converse.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::vector<ColorWord> color_words(std::size_t s, std::size_t n) {
  std::vector<ColorWord> out{ColorWord{}};
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<ColorWord> next;
    for (const auto& w : out)
      for (std::size_t c = 0; c < s; ++c) {
        ColorWord ext = w;
        ext.push_back(c);
        next.push_back(std::move(ext));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<Mat> units_of(std::size_t flat, std::size_t k, std::size_t arity) {
  std::vector<Mat> out;
  for (std::size_t u : decode_index(flat, k, arity)) out.push_back(matrix_unit(k, u));
  return out;
}

std::size_t perfect_root(std::size_t s) {
  const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(s))));
  if (m * m != s) throw InputError("tuple size " + std::to_string(s) + " is not a perfect square");
  return m;
}

// Joint moment-cumulant sum; skip_full drops the one-block partition.
Mat joint_sum(const std::vector<std::pair<NCPartition, EvaluationPlan>>& parts, const ColorWord& colors,
              std::span<const Mat> letters, std::size_t k, const JointCumulants& cumulants, bool skip_full) {
  const BlockValue lookup = [&](const std::vector<std::size_t>& block, std::span<const Mat> args) -> Mat {
    ColorWord sub;
    for (std::size_t i : block) sub.push_back(colors[i]);
    return cumulants.at(sub)(args);
  };
  Mat total = Mat::Zero(idx(k), idx(k));
  for (const auto& [partition, plan] : parts) {
    if (skip_full && partition.blocks.size() == 1) continue;
    total += evaluate_partition(partition, plan, letters, k, lookup);
  }
  return total;
}

std::vector<std::pair<NCPartition, EvaluationPlan>> planned(std::size_t n) {
  std::vector<std::pair<NCPartition, EvaluationPlan>> out;
  for (auto& p : enumerate_nc(n)) {
    auto plan = nesting_forest(p);
    out.emplace_back(std::move(p), std::move(plan));
  }
  return out;
}

}  // namespace

const MultiMap& JointDistribution::moment(const ColorWord& colors) const {
  auto it = moments.find(colors);
  if (it == moments.end()) throw InputError("JointDistribution: no moment for this color word");
  return it->second;
}

JointDistribution joint_moments_from_cumulants(const JointCumulants& cumulants, std::size_t k, std::size_t s,
                                               std::size_t order) {
  JointDistribution d;
  d.k = k;
  d.s = s;
  d.order = order;
  for (std::size_t n = 1; n <= order; ++n) {
    const auto parts = planned(n);
    for (const auto& colors : color_words(s, n)) {
      MultiMap m(k, n - 1);
      for (std::size_t f = 0; f < m.basis_size(); ++f)
        m.set(f, joint_sum(parts, colors, units_of(f, k, n - 1), k, cumulants, false));
      d.moments.emplace(colors, std::move(m));
    }
  }
  return d;
}

JointCumulants joint_cumulants_from_moments(const JointDistribution& d) {
  JointCumulants cumulants;
  for (std::size_t n = 1; n <= d.order; ++n) {
    const auto parts = planned(n);
    for (const auto& colors : color_words(d.s, n)) {
      MultiMap c(d.k, n - 1);
      const MultiMap& m = d.moment(colors);
      for (std::size_t f = 0; f < c.basis_size(); ++f)
        c.set(f, m.at(f) - joint_sum(parts, colors, units_of(f, d.k, n - 1), d.k, cumulants, true));
      cumulants.emplace(colors, std::move(c));
    }
  }
  return cumulants;
}

JointDistribution eta_power(const JointDistribution& d, const CPMap& eta) {
  if (eta.k() != d.k) throw InputError("eta_power: map and tuple distribution disagree on k");
  auto cumulants = joint_cumulants_from_moments(d);
  for (auto& [colors, c] : cumulants) c = c.mapped(eta);
  return joint_moments_from_cumulants(cumulants, d.k, d.s, d.order);
}

OVDistribution pack_tuple(const JointDistribution& d) {
  const std::size_t m = perfect_root(d.s);
  const std::size_t k = d.k;
  const std::size_t big = m * k;
  OVDistribution out;
  out.k = big;
  out.order = d.order;
  out.label = "packed";
  for (std::size_t n = 1; n <= d.order; ++n) {
    MultiMap packed(big, n - 1);
    for (std::size_t f = 0; f < packed.basis_size(); ++f) {
      // Argument l is E_{alpha_l beta_l} (x) e_{u_l}.
      const auto big_units = decode_index(f, big, n - 1);
      std::vector<std::size_t> alpha, beta, small;
      for (std::size_t u : big_units) {
        const std::size_t row = u / big, col = u % big;
        alpha.push_back(row / k);
        beta.push_back(col / k);
        small.push_back((row % k) * k + col % k);
      }
      std::size_t small_flat = 0;
      for (std::size_t u : small) small_flat = small_flat * k * k + u;
      Mat value = Mat::Zero(idx(big), idx(big));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          // X_{i alpha_1} e X_{beta_1 alpha_2} ... X_{beta_{n-1} j}
          ColorWord colors;
          std::size_t row = i;
          for (std::size_t l = 0; l + 1 < n; ++l) {
            colors.push_back(row * m + alpha[l]);
            row = beta[l];
          }
          colors.push_back(row * m + j);
          value.block(idx(i * k), idx(j * k), idx(k), idx(k)) = d.moment(colors).at(small_flat);
        }
      packed.set(f, value);
    }
    out.moments.push_back(std::move(packed));
  }
  return out;
}

JointDistribution unpack_tuple(const OVDistribution& packed, std::size_t m) {
  if (m == 0 || packed.k % m != 0) throw InputError("unpack_tuple: packed dimension is not a multiple of m");
  const std::size_t k = packed.k / m;
  const std::size_t big = packed.k;
  JointDistribution d;
  d.k = k;
  d.s = m * m;
  d.order = packed.order;
  for (std::size_t n = 1; n <= packed.order; ++n)
    for (const auto& colors : color_words(d.s, n)) {
      MultiMap out(k, n - 1);
      for (std::size_t f = 0; f < out.basis_size(); ++f) {
        const auto small = decode_index(f, k, n - 1);
        std::vector<Mat> args;
        for (std::size_t l = 0; l + 1 < n; ++l) {
          const std::size_t col = colors[l] % m, next_row = colors[l + 1] / m;
          const std::size_t p = small[l] / k, q = small[l] % k;
          args.push_back(matrix_unit(big, col * k + p, next_row * k + q));
        }
        const Mat value = packed.evaluate(args);
        const std::size_t i = colors.front() / m, j = colors.back() % m;
        out.set(f, value.block(idx(i * k), idx(j * k), idx(k), idx(k)));
      }
      d.moments.emplace(colors, std::move(out));
    }
  return d;
}

// ---------------------------------------------------------------------------

void Witness::validate(double tol) const {
  const auto n = idx(m * k);
  if (a.rows() != n || phi.rows() != n || eta_a.rows() != n) throw std::logic_error("witness: dimension mismatch");
  if (max_abs(a * a - a) > tol || max_abs(a - a.adjoint()) > tol) throw std::logic_error("witness: a is not a projection");
  if (!psd_check(phi, tol).is_psd() || std::abs(phi.trace() - cplx(1.0)) > tol)
    throw std::logic_error("witness: phi is not a state");
  if (!(phi_a() > 0.0)) throw std::logic_error("witness: phi(a) must be positive");
  if (!(kappa > 0.0)) throw std::logic_error("witness: kappa must be positive");
  if (!(phi_of(eta_a - a) < -2.0 * kappa)) throw std::logic_error("witness: phi(eta_m(a) - a) < -2 kappa fails");
  if (!(phi_eta_a() < phi_a() - kappa)) throw std::logic_error("witness: phi(eta_m(a)) < phi(a) - kappa fails");
  if (!(phi_eta_a() > 0.0)) throw std::logic_error("witness: phi(eta_m(a)) must be positive");
}

namespace {

// Open interval {t in [0, 1] : l0 + t (l1 - l0) > 0} intersected into [lo, hi).
void restrict_positive(double l0, double l1, double& lo, double& hi) {
  const double slope = l1 - l0;
  if (slope > 0.0)
    lo = std::max(lo, -l0 / slope);
  else if (slope < 0.0)
    hi = std::min(hi, -l0 / slope);
  else if (!(l0 > 0.0))
    hi = lo;
}

}  // namespace

Witness find_witness(const CPMap& eta, double tol) {
  PSDReport report = eta_minus_id_cp(eta, tol);
  if (report.is_psd()) throw NoWitness("no witness exists: eta - id is completely positive", std::move(report));

  const std::size_t k = eta.k();
  const std::size_t m = k;
  const auto n = idx(m * k);
  Vec omega = Vec::Zero(n);
  for (std::size_t i = 0; i < k; ++i) omega(idx(i * k + i)) = 1.0 / std::sqrt(static_cast<double>(k));

  Witness w;
  w.m = m;
  w.k = k;
  w.a = omega * omega.adjoint();
  // eta_m(a) - a = Choi(eta - id) / k.
  w.eta_a = amplify(eta, m).apply(w.a);

  auto on = [](const Vec& z, const Mat& x) { return z.dot(x * z).real(); };
  const Vec& u = *report.witness;
  // Along (1 - t) uu^* + t yy^*: need phi(eta_m(a)) > 0 and phi(a) - phi(eta_m(a)) > 0.
  const double f0 = on(u, w.eta_a), g0 = on(u, w.a);

  std::vector<Vec> partners{omega};
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (w.eta_a + w.eta_a.adjoint()));
  for (Eigen::Index j = n - 1; j >= 0; --j)
    if (solver.eigenvalues()(j) > tol) partners.push_back(solver.eigenvectors().col(j));

  const Mat pure = u * u.adjoint();
  bool found = false;
  if (f0 > tol && g0 - f0 > tol) {
    w.phi = pure;
    found = true;
  }
  for (std::size_t i = 0; i < partners.size() && !found; ++i) {
    const Vec& y = partners[i];
    const double f1 = on(y, w.eta_a), g1 = on(y, w.a);
    double lo = 0.0, hi = 1.0;
    restrict_positive(f0, f1, lo, hi);
    restrict_positive(g0 - f0, g1 - f1, lo, hi);
    if (!(hi - lo > tol)) continue;
    const double t = 0.5 * (lo + hi);
    const Mat rho = (1.0 - t) * pure + t * (y * y.adjoint());
    const double phi_a = (rho * w.a).trace().real(), phi_eta_a = (rho * w.eta_a).trace().real();
    if (phi_eta_a > tol && phi_a - phi_eta_a > tol) {
      w.phi = rho;
      w.mixing_weight = t;
      found = true;
    }
  }
  if (!found)
    throw NoWitness("no state with 0 < phi(eta_m(a)) < phi(a) on the maximally entangled projection",
                    std::move(report));
  w.kappa = (w.phi_a() - w.phi_eta_a()) / 3.0;
  w.validate(tol);
  return w;
}

// ---------------------------------------------------------------------------

Mat GNSModel::pi(const Mat& x) const {
  if (x.rows() != idx(dim) || x.cols() != idx(dim)) throw InputError("GNSModel::pi: element has the wrong size");
  Mat out = Mat::Zero(idx(h_dim), idx(h_dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (x(idx(i), idx(j)) != cplx(0.0))
        out.block(idx(i * rank), idx(j * rank), idx(rank), idx(rank)).diagonal().setConstant(x(idx(i), idx(j)));
  return out;
}

cplx GNSModel::vartheta(const Mat& op) const {
  cplx total(0.0);
  for (std::size_t j = 0; j < n; ++j) total += basis.col(idx(j)).dot(op * basis.col(idx(j)));
  return total / static_cast<double>(n);
}

GNSModel build_gns(const Witness& w, std::size_t basis_count, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (w.phi + w.phi.adjoint()));
  const auto& values = solver.eigenvalues();
  const double largest = values(values.size() - 1);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = values.size() - 1; j >= 0; --j)
    if (values(j) > tol * largest) kept.push_back(j);

  GNSModel g;
  g.dim = w.m * w.k;
  g.rank = kept.size();
  g.h_dim = g.dim * g.rank;

  // xi = sum_j sqrt(p_j) u_j (x) f_j, index (x, j) -> x * R + j.
  g.xi = Vec::Zero(idx(g.h_dim));
  double weight = 0.0;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const double pj = values(kept[j]);
    weight += pj;
    const Vec u = solver.eigenvectors().col(kept[j]);
    for (std::size_t x = 0; x < g.dim; ++x) g.xi(idx(x * g.rank + j)) = std::sqrt(pj) * u(idx(x));
  }
  g.xi /= std::sqrt(weight);

  // Gram-Schmidt over xi, pi(a) xi, then the standard basis.
  std::vector<Vec> candidates{g.xi, g.pi(w.a) * g.xi};
  for (std::size_t i = 0; i < g.h_dim; ++i) candidates.push_back(Vec::Unit(idx(g.h_dim), idx(i)));
  std::vector<Vec> basis;
  for (Vec c : candidates) {
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) c -= b.dot(c) * b;
    const double norm = c.norm();
    if (norm > 1e-8) basis.push_back(c / norm);
    if (basis.size() == g.h_dim) break;
  }
  g.basis = Mat(idx(g.h_dim), idx(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) g.basis.col(idx(j)) = basis[j];
  g.basis.col(0) = g.xi;

  g.n = basis_count == 0 ? basis.size() : basis_count;
  if (g.n < 1 || g.n > basis.size())
    throw InputError("build_gns: basis count must lie in [1, " + std::to_string(basis.size()) + "]");
  g.projection = g.xi * g.xi.adjoint();
  return g;
}

// ---------------------------------------------------------------------------

CompressionChain::CompressionChain(std::vector<double> scalar_cumulants, const Witness& w, const GNSModel& g)
    : omega_(std::move(scalar_cumulants)), w_(&w), g_(&g), pa_(g.pi(w.a)), pea_(g.pi(w.eta_a)) {
  if (omega_.empty()) throw InputError("CompressionChain: no cumulants supplied");
  theta_p_ = g.vartheta(g.projection).real();
  theta_apa_ = g.vartheta(pa_ * g.projection * pa_).real();
}

double CompressionChain::product_over(std::span<const Mat> h, bool through_p) const {
  const Mat& proj = g_->projection;
  double prod = 1.0;
  for (const Mat& x : h) {
    const Mat inner = through_p ? Mat(proj * x * proj) : x;
    prod *= g_->vartheta(pa_ * inner * pa_).real();
  }
  return prod;
}

Mat CompressionChain::omega_prime(std::span<const Mat> h) const {
  return omega(h.size() + 1) * product_over(h, false) * pa_ * pa_;
}

Mat CompressionChain::omega_double(std::span<const Mat> h) const {
  return pea_ * (omega(h.size() + 1) * product_over(h, false));
}

Mat CompressionChain::omega_triple(std::span<const Mat> h) const {
  const Mat& proj = g_->projection;
  return proj * pea_ * proj * (omega(h.size() + 1) * product_over(h, true));
}

Mat CompressionChain::omega_triple_reduced(std::span<const Mat> h) const {
  return w_->phi_eta_a() * omega(h.size() + 1) * product_over(h, true) * g_->projection;
}

double CompressionChain::omega_hat(std::size_t n_plus_1) const {
  const std::vector<Mat> ones(n_plus_1 - 1, Mat::Identity(idx(g_->h_dim), idx(g_->h_dim)));
  return g_->vartheta(omega_triple(ones)).real();
}

double CompressionChain::omega_hat_closed(std::size_t n_plus_1) const {
  return theta_p_ * w_->phi_eta_a() * std::pow(theta_apa_, static_cast<double>(n_plus_1 - 1)) * omega(n_plus_1);
}

double CompressionChain::omega_tilde(std::size_t n) const {
  return omega_hat(n) / std::pow(theta_apa_, static_cast<double>(n));
}

double CompressionChain::lambda() const { return w_->phi_eta_a() / (theta_apa_ / theta_p_); }

CompressionResult compression_cumulants(std::span<const double> scalar_cumulants, const Witness& w,
                                        const GNSModel& g) {
  const CompressionChain chain({scalar_cumulants.begin(), scalar_cumulants.end()}, w, g);
  CompressionResult out;
  out.lambda = chain.lambda();
  out.delta = std::abs(chain.vartheta_apa() / chain.vartheta_p() - w.phi_a());
  if (!(out.delta < w.kappa))
    throw InputError("compression_cumulants: delta = " + std::to_string(out.delta) + " is not below kappa = " +
                     std::to_string(w.kappa) + "; use more basis vectors");
  out.bound = (w.phi_a() - w.kappa) / (w.phi_a() - out.delta);

  const auto h_dim = idx(g.h_dim);
  for (std::size_t n = 1; n <= chain.order(); ++n) {
    const std::vector<Mat> ones(n - 1, Mat::Identity(h_dim, h_dim));
    // omega'' = eta_m applied to the a-part of omega'; compare against pi(eta_m(a)) times the same scalar.
    const Mat prime = chain.omega_prime(ones);
    const double scalar = (prime.trace() / g.pi(w.a).trace()).real();
    out.formula_residual = std::max(out.formula_residual, max_abs_diff(chain.omega_double(ones), scalar * g.pi(w.eta_a)));
    out.formula_residual =
        std::max(out.formula_residual, max_abs_diff(chain.omega_triple(ones), chain.omega_triple_reduced(ones)));
    out.formula_residual =
        std::max(out.formula_residual, std::abs(chain.omega_hat(n) - chain.omega_hat_closed(n)));
    out.omega_tilde.push_back(chain.omega_tilde(n));
    if (std::abs(chain.omega(n)) > 1e-12) {
      const double ratio = out.omega_tilde.back() / chain.omega(n);
      out.ratios.emplace_back(n, ratio);
      out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(ratio - out.lambda));
    }
  }
  if (!(out.lambda < out.bound && out.bound < 1.0))
    throw std::logic_error("compression_cumulants: lambda < (phi(a) - kappa)/(phi(a) - delta) < 1 fails");
  return out;
}

std::vector<double> bernoulli_cumulants(std::size_t order) {
  const auto cumulants = cumulants_from_moments(bernoulli_distribution(order));
  std::vector<double> out;
  for (const auto& c : cumulants) out.push_back(c.at(0)(0, 0).real());
  return out;
}

NonPositivity certify_nonpositive(double lambda, std::size_t max_level, double tol) {
  if (!(lambda > 0.0)) throw InputError("certify_nonpositive: lambda must be positive");
  if (max_level < 1) throw InputError("certify_nonpositive: level must be at least 1");
  const auto base = bernoulli_cumulants(2 * max_level);
  std::vector<double> scaled;
  for (double c : base) scaled.push_back(lambda * c);
  const auto family = scalar_family(scaled);
  const OVDistribution power = moments_from_cumulants(family, 2 * max_level);

  NonPositivity out;
  out.lambda = lambda;
  for (std::size_t level = 1; level <= max_level; ++level) {
    out.level = level;
    out.report = positivity_certificate(power, level, tol);
    if (out.negative()) break;
  }
  return out;
}

CounterexampleReport counterexample_report(const CPMap& eta, std::size_t max_level, double tol) {
  CounterexampleReport out;
  out.cp_report = eta_minus_id_cp(eta, tol);
  out.eta_minus_id_cp = out.cp_report.is_psd();
  if (out.eta_minus_id_cp) return out;

  out.witness = find_witness(eta, tol);
  const GNSModel g = build_gns(*out.witness, 0, tol);
  const auto cumulants = bernoulli_cumulants(2 * max_level);
  out.compression = compression_cumulants(cumulants, *out.witness, g);
  out.nonpositivity = certify_nonpositive(out.compression->lambda, max_level, tol);
  return out;
}

}  // namespace ovfree
