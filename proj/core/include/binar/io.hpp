#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binar/estimators.hpp"
#include "binar/experiments.hpp"
#include "binar/limits.hpp"
#include "binar/model.hpp"
#include "binar/tree.hpp"
#include "binar/verify.hpp"

namespace binar::io {

using Json = nlohmann::json;

/// Parsed configuration document. Every field has a default, pinned in
/// default_config_json() and shipped as configs/defaults.json.
struct Config {
    VerifySettings verify;  // params, seed, generations, tolerances, truth, checks
    int simulate_depth = 14;
};

/// Built-in defaults as a JSON document.
const Json& default_config_json();

/// Overlays `doc` on the defaults. Unknown keys and type mismatches raise
/// ValidationError naming the key path (for example "model.offspring_a.mean").
Config parse_config(const Json& doc);
/// Reads and parses a JSON file; I/O and syntax errors raise ValidationError.
Config load_config(const std::string& path);
Json read_json_file(const std::string& path);

/// Tree CSV: header "label,generation,value", one row per node in ascending
/// label order, LF line endings.
void write_tree_csv(std::ostream& out, const BinarTree& tree);
std::string tree_to_csv(const BinarTree& tree);
/// Rejects malformed rows, gaps, duplicates, wrong generations and
/// incomplete trees with ValidationError carrying the line number.
BinarTree read_tree_csv(std::istream& in);
BinarTree load_tree_csv(const std::string& path);

/// Trajectory CSV: "replicate,n,stat,value".
void write_trajectory_csv(std::ostream& out, const std::vector<ReplicateTrajectory>& trajectories);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

Json to_json(const DerivedMoments& m);
Json to_json(const HypothesisReport& r);
Json to_json(const EstimateSet& e);
Json to_json(const LimitObjects& objs);
Json to_json(const RateReport& r);
Json to_json(const ConsistencyReport& r);
Json to_json(const QslReport& r);
Json to_json(const CltReport& r);
Json to_json(const VarianceConsistencyReport& r);
Json to_json(const VerifyReport& r);
Json to_json(const ModelParams& p);

/// Indented dump with a trailing newline; keys are sorted.
std::string dump(const Json& j);

}  // namespace binar::io
