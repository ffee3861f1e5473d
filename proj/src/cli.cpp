#include "ovfree/cli.hpp"

#include "ovfree/converse.hpp"
#include "ovfree/freeprod.hpp"
#include "ovfree/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace ovfree {

namespace {

inline constexpr double kRealizationTolerance = 1e-8;

struct Options {
  std::string command;
  std::string in;
  std::string out;
  std::size_t order = 6;
  std::size_t level = 3;
  std::optional<std::size_t> depth;
  double tol = kDefaultTol;
};

struct Outcome {
  Json report;
  int code = kExitOk;
};

// Two-input commands read {"distribution": ..., "map": ...}.
const Json& field(const Json& in, const char* key) {
  if (!in.is_object() || !in.contains(key)) throw InputError(std::string("input needs a \"") + key + "\" object");
  return in.at(key);
}

void check_order(std::size_t order) {
  const std::size_t limit = order_limit();
  if (order < 1 || order > limit)
    throw InputError("--order must lie in [1, " + std::to_string(limit) + "], got " + std::to_string(order) +
                     " (set OVFREE_MAX_ORDER to raise the bound)");
}

Outcome check_cp(const Options& o, const Json& in) {
  const CPMap eta = map_from_json(in);
  const PSDReport eta_report = is_cp(eta, o.tol);
  const PSDReport diff_report = eta_minus_id_cp(eta, o.tol);
  return {{{"k", eta.k()},
           {"eta", to_json(eta_report)},
           {"eta_cp", eta_report.is_psd()},
           {"eta_minus_id", to_json(diff_report)},
           {"eta_minus_id_cp", diff_report.is_psd()}}};
}

Outcome convolve_power(const Options& o, const Json& in) {
  check_order(o.order);
  const CPMap eta = map_from_json(field(in, "map"));
  const DistributionSpec spec = distribution_from_json(field(in, "distribution"), o.order);
  if (eta.k() != spec.distribution.k) throw InputError("map and distribution disagree on k");
  return {distribution_to_json(eta_power(spec.distribution, eta))};
}

Outcome positivity(const Options& o, const Json& in) {
  check_order(o.order);
  // Either a distribution spec, or {"distribution", "map"} for the eta-power.
  const bool with_map = in.is_object() && in.contains("map");
  OVDistribution d = distribution_from_json(with_map ? field(in, "distribution") : in, o.order).distribution;
  if (with_map) {
    const CPMap eta = map_from_json(in.at("map"));
    if (eta.k() != d.k) throw InputError("map and distribution disagree on k");
    d = eta_power(d, eta);
  }
  const PSDReport r = positivity_certificate(d, o.level, o.tol);
  return {{{"k", d.k},
           {"order", d.order},
           {"level", o.level},
           {"is_psd", r.is_psd()},
           {"min_eigenvalue", round12(r.min_eigenvalue)},
           {"tol", round12(r.tol)},
           {"witness_vector", r.witness ? to_json(*r.witness) : Json(nullptr)}}};
}

Outcome verify_realization(const Options& o, const Json& in) {
  const CPMap eta = map_from_json(field(in, "map"));
  const PSDReport cp = eta_minus_id_cp(eta, o.tol);
  if (!cp.is_psd())
    return {{{"error", "eta - id is not completely positive; run the counterexample command"},
             {"eta_minus_id", to_json(cp)}},
            kExitPrecondition};

  const std::size_t limit = order_limit(kCompressedOrderLimit);
  if (o.order < 1 || o.order > limit)
    throw InputError("--order must lie in [1, " + std::to_string(limit) +
                     "] for verify-realization, got " + std::to_string(o.order) +
                     " (set OVFREE_MAX_ORDER to raise the bound)");
  const DistributionSpec spec = distribution_from_json(field(in, "distribution"), o.order);
  if (!spec.realization) throw InputError("verify-realization needs a distribution given by a realization");
  if (eta.k() != spec.realization->k) throw InputError("map and realization disagree on k");

  const std::size_t depth = o.depth.value_or(kCompressedMinimalDepth);
  const OVDistribution lhs = compressed_distribution(*spec.realization, eta, o.order, depth, o.tol);
  const OVDistribution rhs = eta_power(spec.distribution, eta);
  double deviation = 0.0;
  Json per_order = Json::array();
  for (std::size_t n = 1; n <= o.order; ++n) {
    const double dn = max_abs_diff(lhs.moment(n), rhs.moment(n));
    deviation = std::max(deviation, dn);
    per_order.push_back(round12(dn));
  }
  return {{{"k", eta.k()},
           {"order", o.order},
           {"depth", depth},
           {"max_deviation", round12(deviation)},
           {"deviation_by_order", per_order},
           {"threshold", kRealizationTolerance},
           {"pass", deviation < kRealizationTolerance}}};
}

Outcome counterexample(const Options& o, const Json& in) {
  const CPMap eta = map_from_json(in);
  try {
    return {to_json(counterexample_report(eta, o.level, o.tol))};
  } catch (const NoWitness& e) {
    return {{{"error", std::string(e.what())}, {"eta_minus_id", to_json(e.report())}}, kExitPrecondition};
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  Options o;
  CLI::App app{"ovfree: matrix-valued moments, cumulants and eta-powers"};
  app.add_option("command", o.command, "check-cp | convolve-power | positivity | verify-realization | counterexample")
      ->required()
      ->check(CLI::IsMember({"check-cp", "convolve-power", "positivity", "verify-realization", "counterexample"}));
  app.add_option("--in", o.in, "input JSON")->required();
  app.add_option("--out", o.out, "output JSON")->required();
  app.add_option("--order", o.order, "moment order")->capture_default_str();
  app.add_option("--level", o.level, "moment-matrix level")->capture_default_str();
  app.add_option("--depth", o.depth, "Fock depth (default: smallest exact depth)");
  app.add_option("--tol", o.tol, "tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const Json in = read_json_file(o.in);
    Outcome result;
    if (o.command == "check-cp")
      result = check_cp(o, in);
    else if (o.command == "convolve-power")
      result = convolve_power(o, in);
    else if (o.command == "positivity")
      result = positivity(o, in);
    else if (o.command == "verify-realization")
      result = verify_realization(o, in);
    else
      result = counterexample(o, in);
    result.report["command"] = o.command;
    write_json_file(o.out, result.report);
    if (result.code == kExitPrecondition) std::cerr << "ovfree: " << result.report["error"].get<std::string>() << '\n';
    return result.code;
  } catch (const InputError& e) {
    std::cerr << "ovfree: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Json::exception& e) {
    std::cerr << "ovfree: malformed input: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "ovfree: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ovfree
