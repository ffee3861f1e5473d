#include "ovfree/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace ovfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t size_field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw InputError(std::string("\"") + key + "\" must be an integer");
  const auto n = v.get<long long>();
  if (n < 1) throw InputError(std::string("\"") + key + "\" must be positive");
  return static_cast<std::size_t>(n);
}

double real(double x) { return round12(x); }

std::vector<MultiMap> tensors_from_json(const Json& list, std::size_t k, const char* what) {
  if (!list.is_array()) throw InputError(std::string("\"") + what + "\" must be an array of tensors");
  std::vector<MultiMap> out;
  for (std::size_t n = 0; n < list.size(); ++n) out.push_back(multimap_from_json(list[n], k, n));
  return out;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file " + path);
  out << j.dump(2) << '\n';
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

cplx complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw InputError("expected a number or [re, im], got " + j.dump());
}

Mat matrix_from_json(const Json& j) {
  if (j.is_number()) return Mat::Constant(1, 1, complex_from_json(j));
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError("expected a matrix as nested arrays");
  const std::size_t rows = j.size(), cols = j[0].size();
  Mat m(idx(rows), idx(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InputError("matrix rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) m(idx(r), idx(c)) = complex_from_json(j[r][c]);
  }
  return m;
}

Vec vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("expected a non-empty vector");
  Vec v(idx(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(idx(i)) = complex_from_json(j[i]);
  return v;
}

MultiMap multimap_from_json(const Json& j, std::size_t k, std::size_t arity) {
  MultiMap m(k, arity);
  if (!j.is_array() || j.size() != m.basis_size())
    throw InputError("tensor of arity " + std::to_string(arity) + " needs " + std::to_string(m.basis_size()) +
                     " matrices");
  for (std::size_t f = 0; f < m.basis_size(); ++f) {
    const Mat value = matrix_from_json(j[f]);
    if (value.rows() != idx(k) || value.cols() != idx(k)) throw InputError("tensor entries must be k x k");
    m.set(f, value);
  }
  return m;
}

CPMap map_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("map spec must be a JSON object");
  const std::size_t k = size_field(j, "k");
  const bool has_kraus = j.contains("kraus"), has_choi = j.contains("choi");
  if (has_kraus == has_choi) throw InputError("map spec needs exactly one of \"kraus\" or \"choi\"");
  if (has_choi) {
    const Mat c = matrix_from_json(j.at("choi"));
    if (c.rows() != idx(k * k) || c.cols() != idx(k * k)) throw InputError("choi must be k^2 x k^2");
    return CPMap::from_choi(c);
  }
  const Json& list = j.at("kraus");
  if (!list.is_array() || list.empty()) throw InputError("\"kraus\" must be a non-empty array");
  std::vector<Mat> kraus;
  for (const auto& item : list) {
    Mat op = matrix_from_json(item);
    if (op.rows() != idx(k) || op.cols() != idx(k)) throw InputError("Kraus operators must be k x k");
    kraus.push_back(std::move(op));
  }
  return CPMap::from_kraus(kraus);
}

DistributionSpec distribution_from_json(const Json& j, std::size_t order) {
  if (!j.is_object()) throw InputError("distribution spec must be a JSON object");
  const std::size_t k = size_field(j, "k");
  const int kinds = int(j.contains("realization")) + int(j.contains("cumulants")) + int(j.contains("moments"));
  if (kinds != 1) throw InputError("distribution spec needs exactly one of \"realization\", \"cumulants\", \"moments\"");

  DistributionSpec out;
  if (j.contains("realization")) {
    const Json& r = j.at("realization");
    if (!r.is_object()) throw InputError("\"realization\" must be an object");
    if (r.value("embedding", std::string("tensor-block")) != "tensor-block")
      throw InputError("only the \"tensor-block\" embedding is supported");
    Realization real;
    real.k = k;
    real.p = size_field(r, "p");
    if (r.contains("d") && size_field(r, "d") != k * real.p) throw InputError("realization: d must equal k * p");
    if (!r.contains("X")) throw InputError("realization needs \"X\"");
    if (r.contains("state") == r.contains("density"))
      throw InputError("realization needs exactly one of \"state\" (vector) or \"density\" (matrix)");
    real.x = matrix_from_json(r.at("X"));
    if (r.contains("density")) {
      real.state = matrix_from_json(r.at("density"));
    } else {
      const Vec v = vector_from_json(r.at("state"));
      real.state = v * v.adjoint();
    }
    real.validate();
    out.distribution = moments_from_realization(real, order);
    out.realization = std::move(real);
  } else if (j.contains("cumulants")) {
    auto cumulants = tensors_from_json(j.at("cumulants"), k, "cumulants");
    for (std::size_t n = cumulants.size(); n < order; ++n) cumulants.emplace_back(k, n);
    cumulants.resize(order, MultiMap(k, 0));
    out.distribution = moments_from_cumulants(cumulants, order);
  } else {
    auto moments = tensors_from_json(j.at("moments"), k, "moments");
    if (moments.size() < order)
      throw InputError("moment spec lists " + std::to_string(moments.size()) + " moments, order " +
                       std::to_string(order) + " requested");
    moments.resize(order, MultiMap(k, 0));
    out.distribution.k = k;
    out.distribution.order = order;
    out.distribution.moments = std::move(moments);
  }
  out.distribution.label = j.value("label", std::string("input"));
  return out;
}

// ---------------------------------------------------------------------------

Json to_json(cplx z) { return Json::array({real(z.real()), real(z.imag())}); }

Json to_json(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const MultiMap& m) {
  Json out = Json::array();
  for (std::size_t f = 0; f < m.basis_size(); ++f) out.push_back(to_json(m.at(f)));
  return out;
}

Json to_json(const PSDReport& r) {
  return {{"is_psd", r.is_psd()},
          {"min_eigenvalue", real(r.min_eigenvalue)},
          {"tol", real(r.tol)},
          {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)}};
}

Json to_json(const Witness& w) {
  return {{"m", w.m},
          {"k", w.k},
          {"a", to_json(w.a)},
          {"phi", to_json(w.phi)},
          {"phi_a", real(w.phi_a())},
          {"phi_eta_a", real(w.phi_eta_a())},
          {"phi_eta_a_minus_a", real(w.phi_eta_a() - w.phi_a())},
          {"kappa", real(w.kappa)},
          {"mixing_weight", real(w.mixing_weight)}};
}

Json to_json(const CompressionResult& c) {
  Json ratios = Json::array();
  for (const auto& [n, ratio] : c.ratios) ratios.push_back({{"n", n}, {"ratio", real(ratio)}});
  Json tilde = Json::array();
  for (double x : c.omega_tilde) tilde.push_back(real(x));
  return {{"lambda", real(c.lambda)},
          {"delta", real(c.delta)},
          {"bound", real(c.bound)},
          {"omega_tilde", tilde},
          {"ratios", ratios},
          {"max_ratio_deviation", real(c.max_ratio_deviation)},
          {"formula_residual", real(c.formula_residual)}};
}

Json to_json(const NonPositivity& n) {
  return {{"lambda", real(n.lambda)},
          {"level", n.level},
          {"negative", n.negative()},
          {"min_eigenvalue", real(n.report.min_eigenvalue)},
          {"witness_vector", n.report.witness ? to_json(*n.report.witness) : Json(nullptr)}};
}

Json to_json(const CounterexampleReport& r) {
  Json out;
  out["eta_minus_id_cp"] = r.eta_minus_id_cp;
  out["cp_report"] = to_json(r.cp_report);
  out["verdict"] = r.eta_minus_id_cp ? "preserved" : "counterexample";
  out["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  out["compression"] = r.compression ? to_json(*r.compression) : Json(nullptr);
  out["lambda"] = r.lambda() ? Json(real(*r.lambda())) : Json(nullptr);
  out["nonpositivity"] = r.nonpositivity ? to_json(*r.nonpositivity) : Json(nullptr);
  return out;
}

Json distribution_to_json(const OVDistribution& d) {
  Json moments = Json::array(), cumulants = Json::array();
  for (const auto& m : d.moments) moments.push_back(to_json(m));
  for (const auto& c : cumulants_from_moments(d)) cumulants.push_back(to_json(c));
  return {{"k", d.k}, {"order", d.order}, {"label", d.label}, {"moments", moments}, {"cumulants", cumulants}};
}

}  // namespace ovfree
