#pragma once

// JSON input specs and canonical report serialization.
//
// Complex numbers are [re, im] (a bare number is read as real), matrices are
// row-major nested arrays. A multilinear map of arity n is an array of
// (k^2)^n matrices in flat-index order, see MultiMap.

#include "ovfree/algebra.hpp"
#include "ovfree/converse.hpp"
#include "ovfree/cpmaps.hpp"
#include "ovfree/ovdist.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace ovfree {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
/// Pretty-printed, trailing newline.
void write_json_file(const std::string& path, const Json& j);

/// 12 significant digits, -0 mapped to 0.
double round12(double x);

cplx complex_from_json(const Json& j);
Mat matrix_from_json(const Json& j);
Vec vector_from_json(const Json& j);
MultiMap multimap_from_json(const Json& j, std::size_t k, std::size_t arity);

/// {"k", "kraus": [K_1, ...]} or {"k", "choi": C}.
CPMap map_from_json(const Json& j);

struct DistributionSpec {
  OVDistribution distribution;
  std::optional<Realization> realization;
};

/// {"k", "realization": {"d", "p", "X", "state" | "density", "embedding": "tensor-block"}},
/// where state is a unit vector in C^p and density a p x p density matrix,
/// {"k", "cumulants": [...]} (missing orders are zero) or {"k", "moments": [...]}.
DistributionSpec distribution_from_json(const Json& j, std::size_t order);

Json to_json(cplx z);
Json to_json(const Mat& m);
Json to_json(const Vec& v);
Json to_json(const MultiMap& m);
Json to_json(const PSDReport& r);
Json to_json(const Witness& w);
Json to_json(const CompressionResult& c);
Json to_json(const NonPositivity& n);
Json to_json(const CounterexampleReport& r);
/// {"k", "order", "label", "moments", "cumulants"}.
Json distribution_to_json(const OVDistribution& d);

}  // namespace ovfree
