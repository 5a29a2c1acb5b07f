// binar: simulate, fit and verify bifurcating integer-valued autoregressions.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "binar/errors.hpp"
#include "binar/estimators.hpp"
#include "binar/io.hpp"
#include "binar/limits.hpp"
#include "binar/model.hpp"
#include "binar/tree.hpp"
#include "binar/verify.hpp"

namespace fs = std::filesystem;
using binar::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "json";
};

binar::io::Config load(const Globals& g) {
    binar::io::Config cfg =
        g.config_path.empty() ? binar::io::parse_config(Json::object()) : binar::io::load_config(g.config_path);
    if (g.seed) cfg.verify.seed = *g.seed;
    return cfg;
}

// Flattens nested objects and arrays into "a.b[0],value" rows.
// RFC 4180 quoting for fields with commas, quotes or line breaks.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else if (j.is_number_float()) {
        out << prefix << ',' << binar::io::format_double(j.get<double>()) << '\n';
    } else if (j.is_string()) {
        out << prefix << ',' << csv_field(j.get<std::string>()) << '\n';
    } else {
        out << prefix << ',' << j.dump() << '\n';
    }
}

std::string render(const Json& j, const std::string& format) {
    if (format == "json") return binar::io::dump(j);
    std::ostringstream os;
    os << "key,value\n";
    flatten(j, "", os);
    return os.str();
}

void emit(const Globals& g, const std::string& stem, const std::string& text) {
    if (g.out_dir.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / stem;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw binar::Error("cannot write " + path.string());
    out << text;
}

void emit_structured(const Globals& g, const std::string& name, const Json& j) {
    emit(g, name + (g.format == "json" ? ".json" : ".csv"), render(j, g.format));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation, estimation and verification for bifurcating integer-valued autoregressions"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--out", g.out_dir, "Output directory (default: stdout)");
    app.add_option("--format", g.format, "Structured output format")->check(CLI::IsMember({"json", "csv"}));

    auto* simulate = app.add_subcommand("simulate", "Simulate one tree and write it as CSV");
    std::optional<int> depth;
    simulate->add_option("--depth", depth, "Tree depth (default: simulate.depth)");

    auto* estimate = app.add_subcommand("estimate", "Estimate parameters from a tree CSV");
    std::string tree_path;
    std::optional<int> generation;
    estimate->add_option("tree", tree_path, "Tree CSV file")->required()->check(CLI::ExistingFile);
    estimate->add_option("-n,--generation", generation, "Use generations up to n (default: tree depth)");

    auto* limits = app.add_subcommand("limits", "Compute the limit matrices");
    std::string route = "mc";
    std::string limits_tree;
    limits->add_option("--route", route, "mc or tree")->check(CLI::IsMember({"mc", "tree"}));
    limits->add_option("--tree", limits_tree, "Tree CSV for the tree route")->check(CLI::ExistingFile);

    auto* verify = app.add_subcommand("verify", "Run the statistical checks");
    std::vector<std::string> checks;
    verify->add_option("checks", checks, "Subset of rate, qsl, clt, variance (default: config)")
        ->check(CLI::IsMember({"rate", "qsl", "clt", "variance"}));

    auto* moments = app.add_subcommand("moments", "Derived moments and hypothesis report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        const binar::io::Config cfg = load(g);
        const binar::VerifySettings& s = cfg.verify;

        if (*simulate) {
            const int d = depth.value_or(cfg.simulate_depth);
            if (d < 0) throw binar::ValidationError("--depth must be nonnegative");
            const binar::BinarTree tree =
                binar::simulate_tree(s.params, d, binar::RngStream(s.seed, 0), s.max_depth);
            emit(g, "tree.csv", binar::io::tree_to_csv(tree));
        } else if (*estimate) {
            const binar::BinarTree tree = binar::io::load_tree_csv(tree_path);
            emit_structured(g, "estimates", binar::io::to_json(binar::estimate_all(tree, generation.value_or(tree.depth()))));
        } else if (*limits) {
            const binar::DerivedMoments m = binar::derive_moments(s.params);
            binar::require_hypotheses(m);
            binar::LimitObjects objs;
            if (route == "tree") {
                const binar::BinarTree tree =
                    limits_tree.empty()
                        ? binar::simulate_tree(s.params, cfg.simulate_depth, binar::RngStream(s.seed, 0), s.max_depth)
                        : binar::io::load_tree_csv(limits_tree);
                objs = binar::limit_matrices_tree(tree, m);
            } else {
                objs = binar::limit_matrices_mc(s.params, s.limit_draws, binar::RngStream(s.seed, binar::kLimitsStreamId),
                                                s.tail_tol);
            }
            emit_structured(g, "limits", binar::io::to_json(objs));
        } else if (*verify) {
            binar::VerifySettings run = s;
            if (!checks.empty()) {
                run.checks.clear();
                for (const auto& c : checks) run.checks.push_back(binar::check_from_string(c));
            }
            const binar::VerifyReport report = binar::run_verification(run);
            emit_structured(g, "report", binar::io::to_json(report));
            if (!g.out_dir.empty() && !report.trajectories.empty()) {
                std::ostringstream os;
                binar::io::write_trajectory_csv(os, report.trajectories);
                emit(g, "trajectories.csv", os.str());
            }
            if (!report.passed()) {
                std::cerr << "binar: one or more checks failed\n";
                return kExitCheckFailed;
            }
        } else if (*moments) {
            const binar::DerivedMoments m = binar::derive_moments(s.params);
            Json j = {{"model", binar::io::to_json(s.params)},
                      {"moments", binar::io::to_json(m)},
                      {"hypotheses", binar::io::to_json(binar::validate_hypotheses(m))},
                      {"mean_T", binar::mean_T(m)},
                      {"second_moment_T", binar::second_moment_T(m)},
                      {"sigma_rho_sq", binar::sigma_rho_sq(m)}};
            emit_structured(g, "moments", j);
        }
    } catch (const binar::ValidationError& e) {
        std::cerr << "binar: " << e.what() << '\n';
        return kExitValidation;
    } catch (const binar::CapacityError& e) {
        std::cerr << "binar: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "binar: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}
