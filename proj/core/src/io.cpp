#include "binar/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binar/errors.hpp"

namespace binar::io {

namespace {

const char* kDefaultConfig = R"({
  "seed": 1,
  "model": {
    "offspring_a": {"family": "bernoulli", "mean": 0.5},
    "offspring_b": {"family": "bernoulli", "mean": 0.5},
    "immigration": {"lambda0": 0.3, "lambda1": 0.7, "lambda2": 0.7},
    "x1": 1
  },
  "simulate": {"depth": 14},
  "limits": {"draws": 1000000, "tail_tol": 1e-8},
  "experiment": {
    "n_min": 6,
    "n_max": 14,
    "replicates": 200,
    "clt_generation": 12,
    "clt_replicates": 1000,
    "checks": ["rate", "qsl", "clt", "variance"]
  },
  "tolerances": {
    "rate_factor": 3.0,
    "sup_error": 0.1,
    "sup_error_fraction": 0.9,
    "qsl_rel_tol": 0.25,
    "clt_frobenius": 0.15,
    "rho_variance_rel": 0.2,
    "ks_alpha": 0.01
  },
  "memory": {"max_depth": 24},
  "truth": null
})";

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

const char* kind_name(const Json& j) {
    if (j.is_object()) return "object";
    if (j.is_array()) return "array";
    if (j.is_string()) return "string";
    if (j.is_boolean()) return "boolean";
    if (j.is_number()) return "number";
    return "null";
}

bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return true;
    return std::string(kind_name(a)) == kind_name(b);
}

void overlay(Json& base, const Json& doc, const std::string& path) {
    if (!doc.is_object()) fail(path, std::string("expected an object, got ") + kind_name(doc));
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string p = join(path, it.key());
        if (!base.contains(it.key())) fail(p, "unknown key");
        Json& target = base[it.key()];
        if (target.is_null()) {
            // Optional sections; validated when read.
            target = it.value();
        } else if (target.is_object()) {
            overlay(target, it.value(), p);
        } else {
            if (!same_kind(target, it.value()))
                fail(p, std::string("expected ") + kind_name(target) + ", got " + kind_name(it.value()));
            target = it.value();
        }
    }
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, std::string("expected number, got ") + kind_name(j));
    return j.get<double>();
}

std::int64_t integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const Json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    fail(path, "expected a nonnegative integer");
}

int small_int(const Json& j, const std::string& path) {
    const std::int64_t v = integer(j, path);
    if (v < 0 || v > 62) fail(path, "out of range");
    return static_cast<int>(v);
}

const Json& at(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) fail(join(path, key), "missing");
    return j.at(key);
}

OffspringFamily parse_family(const Json& j, const std::string& path) {
    const Json& fam = at(j, "family", path);
    if (!fam.is_string()) fail(join(path, "family"), "expected string");
    try {
        return OffspringFamily::make(family_kind_from_string(fam.get<std::string>()),
                                     number(at(j, "mean", path), join(path, "mean")));
    } catch (const InvalidParameter& e) {
        fail(path, e.what());
    }
}

template <std::size_t N>
Vector<N> parse_vector(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N) + " numbers");
    Vector<N> v;
    for (std::size_t i = 0; i < N; ++i) v[i] = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

}  // namespace

const Json& default_config_json() {
    static const Json defaults = Json::parse(kDefaultConfig);
    return defaults;
}

Config parse_config(const Json& doc) {
    Json merged = default_config_json();
    overlay(merged, doc, "");

    Config cfg;
    VerifySettings& v = cfg.verify;
    v.seed = unsigned_integer(merged["seed"], "seed");

    const Json& model = merged["model"];
    ImmigrationSpec im;
    const Json& imj = model["immigration"];
    im.lambda0 = number(imj["lambda0"], "model.immigration.lambda0");
    im.lambda1 = number(imj["lambda1"], "model.immigration.lambda1");
    im.lambda2 = number(imj["lambda2"], "model.immigration.lambda2");
    try {
        v.params = ModelParams(parse_family(model["offspring_a"], "model.offspring_a"),
                               parse_family(model["offspring_b"], "model.offspring_b"), im,
                               integer(model["x1"], "model.x1"));
    } catch (const InvalidParameter& e) {
        fail("model", e.what());
    }

    cfg.simulate_depth = small_int(merged["simulate"]["depth"], "simulate.depth");

    const Json& lim = merged["limits"];
    v.limit_draws = unsigned_integer(lim["draws"], "limits.draws");
    v.tail_tol = number(lim["tail_tol"], "limits.tail_tol");
    if (!(v.tail_tol > 0.0 && v.tail_tol < 1.0)) fail("limits.tail_tol", "must lie in (0, 1)");
    if (v.limit_draws < kMinLimitDraws) fail("limits.draws", "must be at least " + std::to_string(kMinLimitDraws));

    const Json& ex = merged["experiment"];
    v.n_min = small_int(ex["n_min"], "experiment.n_min");
    v.n_max = small_int(ex["n_max"], "experiment.n_max");
    v.replicates = unsigned_integer(ex["replicates"], "experiment.replicates");
    v.clt_generation = small_int(ex["clt_generation"], "experiment.clt_generation");
    v.clt_replicates = unsigned_integer(ex["clt_replicates"], "experiment.clt_replicates");
    if (v.n_min < 1 || v.n_max < v.n_min) fail("experiment", "need 1 <= n_min <= n_max");
    if (v.clt_generation < 1) fail("experiment.clt_generation", "must be at least 1");
    if (v.replicates < 1 || v.clt_replicates < 1) fail("experiment", "replicate counts must be positive");
    v.checks.clear();
    for (std::size_t i = 0; i < ex["checks"].size(); ++i) {
        const Json& c = ex["checks"][i];
        const std::string p = "experiment.checks[" + std::to_string(i) + "]";
        if (!c.is_string()) fail(p, "expected string");
        try {
            v.checks.push_back(check_from_string(c.get<std::string>()));
        } catch (const ValidationError& e) {
            fail(p, e.what());
        }
    }

    const Json& tol = merged["tolerances"];
    Tolerances& t = v.tolerances;
    t.rate_factor = number(tol["rate_factor"], "tolerances.rate_factor");
    t.sup_error = number(tol["sup_error"], "tolerances.sup_error");
    t.sup_error_fraction = number(tol["sup_error_fraction"], "tolerances.sup_error_fraction");
    t.qsl_rel_tol = number(tol["qsl_rel_tol"], "tolerances.qsl_rel_tol");
    t.clt_frobenius = number(tol["clt_frobenius"], "tolerances.clt_frobenius");
    t.rho_variance_rel = number(tol["rho_variance_rel"], "tolerances.rho_variance_rel");
    t.ks_alpha = number(tol["ks_alpha"], "tolerances.ks_alpha");

    v.max_depth = small_int(merged["memory"]["max_depth"], "memory.max_depth");

    const Json& truth = merged["truth"];
    if (!truth.is_null()) {
        if (!truth.is_object()) fail("truth", "expected an object or null");
        Truth tr = truth_from_moments(derive_moments(v.params));
        for (auto it = truth.begin(); it != truth.end(); ++it) {
            const std::string p = join("truth", it.key());
            if (it.key() == "theta")
                tr.theta = parse_vector<4>(it.value(), p);
            else if (it.key() == "eta")
                tr.eta = parse_vector<2>(it.value(), p);
            else if (it.key() == "zeta")
                tr.zeta = parse_vector<2>(it.value(), p);
            else if (it.key() == "rho")
                tr.rho = number(it.value(), p);
            else
                fail(p, "unknown key");
        }
        v.truth = tr;
    }

    try {
        check_capacity(cfg.simulate_depth, v.max_depth);
        check_capacity(v.n_max, v.max_depth);
        check_capacity(v.clt_generation, v.max_depth);
    } catch (const CapacityError& e) {
        fail("memory.max_depth", e.what());
    }
    return cfg;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

Config load_config(const std::string& path) { return parse_config(read_json_file(path)); }

void write_tree_csv(std::ostream& out, const BinarTree& tree) {
    out << "label,generation,value\n";
    for (std::uint64_t k = 1; k <= tree.node_count(); ++k) out << k << ',' << generation_of(k) << ',' << tree[k] << '\n';
}

std::string tree_to_csv(const BinarTree& tree) {
    std::ostringstream os;
    write_tree_csv(os, tree);
    return os.str();
}

namespace {

[[noreturn]] void csv_fail(std::size_t line, const std::string& what) {
    throw ValidationError("tree CSV line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_field(std::string_view s, std::size_t line, const char* name) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        csv_fail(line, std::string("malformed ") + name + " '" + std::string(s) + "'");
    return v;
}

}  // namespace

BinarTree read_tree_csv(std::istream& in) {
    std::string row;
    std::size_t line = 1;
    if (!std::getline(in, row)) csv_fail(line, "empty file");
    if (row != "label,generation,value") csv_fail(line, "expected header 'label,generation,value'");

    std::vector<std::int64_t> values{0};
    while (std::getline(in, row)) {
        ++line;
        if (row.empty() && in.peek() == std::char_traits<char>::eof()) break;
        const auto c1 = row.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : row.find(',', c1 + 1);
        if (c2 == std::string::npos || row.find(',', c2 + 1) != std::string::npos)
            csv_fail(line, "expected 3 comma-separated fields");
        const std::string_view view(row);
        const std::int64_t label = parse_field(view.substr(0, c1), line, "label");
        const std::int64_t gen = parse_field(view.substr(c1 + 1, c2 - c1 - 1), line, "generation");
        const std::int64_t value = parse_field(view.substr(c2 + 1), line, "value");
        const auto expected = static_cast<std::int64_t>(values.size());
        if (label != expected)
            csv_fail(line, "expected label " + std::to_string(expected) + ", found " + std::to_string(label) +
                               (label < expected ? " (duplicate or out of order)" : " (gap)"));
        if (gen != generation_of(static_cast<std::uint64_t>(label)))
            csv_fail(line, "label " + std::to_string(label) + " belongs to generation " +
                               std::to_string(generation_of(static_cast<std::uint64_t>(label))));
        if (value < 0) csv_fail(line, "negative value");
        values.push_back(value);
    }
    const std::uint64_t nodes = values.size() - 1;
    if (nodes == 0) csv_fail(line, "no rows");
    const int depth = generation_of(nodes);
    if (subtree_size(depth) != nodes)
        csv_fail(line, "incomplete tree: " + std::to_string(nodes) + " nodes is not 2^(n+1) - 1");
    return BinarTree(depth, std::move(values));
}

BinarTree load_tree_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return read_tree_csv(in);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const std::vector<ReplicateTrajectory>& trajectories) {
    out << "replicate,n,stat,value\n";
    for (const auto& t : trajectories) {
        for (const auto& g : t.generations) {
            auto row = [&](const char* stat, double v) {
                out << t.replicate << ',' << g.n << ',' << stat << ',' << format_double(v) << '\n';
            };
            row("a_hat", g.theta[0]);
            row("c_hat", g.theta[1]);
            row("b_hat", g.theta[2]);
            row("d_hat", g.theta[3]);
            row("sigma_a2_hat", g.eta[0]);
            row("sigma_c2_hat", g.eta[1]);
            row("sigma_b2_hat", g.zeta[0]);
            row("sigma_d2_hat", g.zeta[1]);
            row("rho_hat", g.rho);
            row("theta_err_sq", g.theta_err_sq);
            row("eta_err_sq", g.eta_err_sq);
            row("zeta_err_sq", g.zeta_err_sq);
            row("rho_err_sq", g.rho_err_sq);
            row("qsl_running", g.qsl_running);
        }
    }
}

namespace {

template <std::size_t N>
Json mat_json(const Matrix<N>& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < N; ++i) {
        Json r = Json::array();
        for (std::size_t j = 0; j < N; ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Json dense_json(const DenseMatrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        Json r = Json::array();
        for (std::size_t j = 0; j < m.n; ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

template <std::size_t N>
Json estimate_json(const MatrixEstimate<N>& e) {
    return {{"value", mat_json(e.value)}, {"se", mat_json(e.se)}};
}

Json scalar_json(const ScalarEstimate& e) { return {{"value", e.value}, {"se", e.se}}; }

Json family_json(const OffspringFamily& f) { return {{"family", to_string(f.kind())}, {"mean", f.mean()}}; }

}  // namespace

Json to_json(const ModelParams& p) {
    return {{"offspring_a", family_json(p.offspring_a())},
            {"offspring_b", family_json(p.offspring_b())},
            {"immigration",
             {{"lambda0", p.immigration().lambda0},
              {"lambda1", p.immigration().lambda1},
              {"lambda2", p.immigration().lambda2}}},
            {"x1", p.x1()}};
}

Json to_json(const DerivedMoments& m) {
    return {{"a", m.a},           {"b", m.b},           {"c", m.c},           {"d", m.d},
            {"sigma_a2", m.sigma_a2}, {"sigma_b2", m.sigma_b2}, {"sigma_c2", m.sigma_c2}, {"sigma_d2", m.sigma_d2},
            {"rho", m.rho},       {"nu2", m.nu2},       {"mu_a4", m.mu_a4},   {"mu_b4", m.mu_b4},
            {"mu_c4", m.mu_c4},   {"mu_d4", m.mu_d4},   {"tau_a6", m.tau_a6}, {"tau_b6", m.tau_b6},
            {"tau_c6", m.tau_c6}, {"tau_d6", m.tau_d6}, {"a_bar", m.a_bar},   {"a2_bar", m.a2_bar},
            {"c_bar", m.c_bar},   {"c2_bar", m.c2_bar}, {"upsilon", m.upsilon}};
}

Json to_json(const HypothesisReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"id", c.id}, {"condition", c.condition}, {"passed", c.passed},
                          {"by_construction", c.by_construction}});
    return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

Json to_json(const EstimateSet& e) {
    const auto& t = e.theta;
    const auto& v = e.variances;
    return {{"generation", e.generation},
            {"node_count", e.node_count},
            {"theta", {{"a", t.a}, {"c", t.c}, {"b", t.b}, {"d", t.d}}},
            {"eta", {{"sigma_a2", v.eta[0]}, {"sigma_c2", v.eta[1]}}},
            {"zeta", {{"sigma_b2", v.zeta[0]}, {"sigma_d2", v.zeta[1]}}},
            {"rho", v.rho},
            {"S", mat_json(t.S)},
            {"Q", mat_json(v.Q)},
            {"regularized", {{"S", t.regularized}, {"Q", v.regularized}}}};
}

Json to_json(const LimitObjects& o) {
    return {{"route", o.route},
            {"samples", o.samples},
            {"mean_T", scalar_json(o.mean_T)},
            {"second_moment_T", scalar_json(o.second_moment_T)},
            {"mean_one_plus_T_sq", scalar_json(o.mean_one_plus_T_sq)},
            {"mean_T_closed", o.mean_T_closed},
            {"second_moment_T_closed", o.second_moment_T_closed},
            {"sigma_rho_sq", o.sigma_rho_sq},
            {"A", estimate_json(o.A)},
            {"B", estimate_json(o.B)},
            {"L", estimate_json(o.L)},
            {"M_ac", estimate_json(o.M_ac)},
            {"M_bd", estimate_json(o.M_bd)},
            {"theta_clt_cov", mat_json(theta_clt_cov(o))},
            {"eta_clt_cov", mat_json(eta_clt_cov(o))},
            {"zeta_clt_cov", mat_json(zeta_clt_cov(o))},
            {"qsl_target", qsl_target(o)},
            {"qsl_target_via_inverse", qsl_target_via_inverse(o)}};
}

Json to_json(const RateReport& r) {
    return {{"statistic", r.statistic}, {"median_final", r.median_final}, {"median_early", r.median_early},
            {"ratio", r.ratio},         {"factor", r.factor},             {"passed", r.passed}};
}

Json to_json(const ConsistencyReport& r) {
    return {{"fraction_within", r.fraction_within},
            {"sup_error", r.sup_error},
            {"required_fraction", r.required_fraction},
            {"passed", r.passed}};
}

Json to_json(const QslReport& r) {
    return {{"n", r.n},
            {"median_running", r.median_running},
            {"target", r.target},
            {"target_via_inverse", r.target_via_inverse},
            {"relative_error", r.relative_error},
            {"rel_tol", r.rel_tol},
            {"passed", r.passed}};
}

Json to_json(const CltReport& r) {
    Json ks = Json::array();
    for (const auto& k : r.ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
    return {{"kind", to_string(r.kind)},
            {"replicates", r.replicates},
            {"empirical", dense_json(r.empirical)},
            {"theoretical", dense_json(r.theoretical)},
            {"relative_frobenius", r.relative_frobenius},
            {"threshold", r.threshold},
            {"ks", ks},
            {"ks_alpha", r.ks_alpha},
            {"empirical_psd", r.empirical_psd},
            {"passed_covariance", r.passed_covariance},
            {"passed_ks", r.passed_ks},
            {"passed", r.passed}};
}

Json to_json(const VarianceConsistencyReport& r) {
    return {{"eta", to_json(r.eta)}, {"zeta", to_json(r.zeta)}, {"rho", to_json(r.rho)}, {"passed", r.passed}};
}

Json to_json(const VerifyReport& r) {
    Json j = Json::object();
    j["truth"] = {{"theta", r.truth.theta.data},
                  {"eta", r.truth.eta.data},
                  {"zeta", r.truth.zeta.data},
                  {"rho", r.truth.rho}};
    if (r.limits) j["limits"] = to_json(*r.limits);
    if (r.rate) j["rate"] = to_json(*r.rate);
    if (r.consistency) j["consistency"] = to_json(*r.consistency);
    if (r.qsl) j["qsl"] = to_json(*r.qsl);
    if (!r.clt.empty()) {
        Json clt = Json::object();
        for (const auto& c : r.clt) clt[to_string(c.kind)] = to_json(c);
        j["clt"] = clt;
    }
    if (r.variance) j["variance"] = to_json(*r.variance);
    j["passed"] = r.passed();
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace binar::io
