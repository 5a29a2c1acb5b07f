#include "binar/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "binar/errors.hpp"
#include "binar/parallel.hpp"

namespace binar {

std::string to_string(Check check) {
    switch (check) {
        case Check::Rate: return "rate";
        case Check::Qsl: return "qsl";
        case Check::Clt: return "clt";
        case Check::Variance: return "variance";
    }
    return "unknown";
}

Check check_from_string(const std::string& name) {
    if (name == "rate") return Check::Rate;
    if (name == "qsl") return Check::Qsl;
    if (name == "clt") return Check::Clt;
    if (name == "variance") return Check::Variance;
    throw ValidationError("unknown check '" + name + "' (expected rate, qsl, clt or variance)");
}

std::string to_string(CltKind kind) {
    switch (kind) {
        case CltKind::Theta: return "theta";
        case CltKind::Eta: return "eta";
        case CltKind::Zeta: return "zeta";
        case CltKind::Rho: return "rho";
    }
    return "unknown";
}

Truth truth_from_moments(const DerivedMoments& m) {
    return {Vec4{{m.a, m.c, m.b, m.d}}, Vec2{{m.sigma_a2, m.sigma_c2}}, Vec2{{m.sigma_b2, m.sigma_d2}}, m.rho};
}

void ExperimentConfig::validate() const {
    if (n_min < 1) throw ValidationError("n_min must be at least 1");
    if (n_max < n_min) throw ValidationError("n_max must not be below n_min");
    if (replicates < 1) throw ValidationError("at least one replicate is required");
    check_capacity(n_max, max_depth);
}

ReplicateTrajectory trajectory_for_tree(const BinarTree& tree, const Truth& truth,
                                        const std::optional<Mat2>& lambda_factor) {
    ReplicateTrajectory traj;
    traj.generations.reserve(static_cast<std::size_t>(tree.depth()));
    const std::optional<Mat4> lambda =
        lambda_factor ? std::optional<Mat4>(block_diag2(*lambda_factor)) : std::nullopt;
    WlsAccumulator acc;
    double qsl_sum = 0.0;
    for (int n = 1; n <= tree.depth(); ++n) {
        acc.add_generation(tree, n - 1);
        const ThetaHat theta = acc.theta();
        const VarianceEstimates var = estimate_variances(tree, theta, n);

        GenerationRecord g;
        g.n = n;
        g.theta = theta.vec();
        g.eta = var.eta;
        g.zeta = var.zeta;
        g.rho = var.rho;
        g.regularized_S = theta.regularized;
        g.regularized_Q = var.regularized;
        const Vec4 dt = g.theta - truth.theta;
        g.theta_err_sq = dot(dt, dt);
        g.theta_err_sup = norm_inf(dt);
        const Vec2 de = g.eta - truth.eta;
        const Vec2 dz = g.zeta - truth.zeta;
        g.eta_err_sq = dot(de, de);
        g.zeta_err_sq = dot(dz, dz);
        g.rho_err_sq = (g.rho - truth.rho) * (g.rho - truth.rho);
        if (lambda) {
            g.qsl_term = static_cast<double>(subtree_size(n - 1)) * dot(dt, *lambda * dt);
            qsl_sum += g.qsl_term;
            g.qsl_running = qsl_sum / static_cast<double>(n);
        }
        traj.generations.push_back(g);
    }
    return traj;
}

std::vector<ReplicateTrajectory> run_replicates(const ExperimentConfig& config, const Truth& truth,
                                                const std::optional<Mat2>& lambda_factor) {
    config.validate();
    std::vector<ReplicateTrajectory> out(config.replicates);
    parallel_for(config.replicates, [&](std::size_t r) {
        const RngStream stream(config.seed, config.stream_offset + r);
        const BinarTree tree = simulate_tree(config.params, config.n_max, stream, config.max_depth);
        out[r] = trajectory_for_tree(tree, truth, lambda_factor);
        out[r].replicate = r;
    });
    return out;
}

ErrorTable error_table(const std::vector<ReplicateTrajectory>& trajectories, ErrorKind kind, int n_min,
                       int n_max) {
    ErrorTable t;
    t.n_min = n_min;
    t.n_max = n_max;
    t.err.reserve(trajectories.size());
    for (const auto& traj : trajectories) {
        if (static_cast<int>(traj.generations.size()) < n_max)
            throw InsufficientDataError("trajectory shorter than n_max");
        std::vector<double> row;
        for (int n = n_min; n <= n_max; ++n) {
            const GenerationRecord& g = traj.at(n);
            switch (kind) {
                case ErrorKind::Theta: row.push_back(g.theta_err_sq); break;
                case ErrorKind::Eta: row.push_back(g.eta_err_sq); break;
                case ErrorKind::Zeta: row.push_back(g.zeta_err_sq); break;
                case ErrorKind::Rho: row.push_back(g.rho_err_sq); break;
            }
        }
        t.err.push_back(std::move(row));
    }
    return t;
}

RateReport rate_check(const ErrorTable& table, double factor, const std::string& statistic) {
    const int span = table.n_max - table.n_min + 1;
    if (table.err.size() < 50) throw InsufficientDataError("rate check needs at least 50 replicates");
    if (span < 5) throw InsufficientDataError("rate check needs at least 5 generations");

    auto normalized = [](double err, int n) { return err * static_cast<double>(subtree_size(n - 1)) / n; };
    const int early_last = table.n_min + (table.n_max - table.n_min) / 2;
    std::vector<double> final_vals, early_vals;
    for (const auto& row : table.err) {
        if (static_cast<int>(row.size()) != span) throw InsufficientDataError("ragged error table");
        final_vals.push_back(normalized(row.back(), table.n_max));
        for (int n = table.n_min; n <= early_last; ++n) early_vals.push_back(normalized(row[n - table.n_min], n));
    }
    RateReport r;
    r.statistic = statistic;
    r.factor = factor;
    r.median_final = median(final_vals);
    r.median_early = median(early_vals);
    r.ratio = r.median_early > 0.0 ? r.median_final / r.median_early : (r.median_final > 0.0 ? INFINITY : 0.0);
    r.passed = std::isfinite(r.median_final) && r.median_final <= factor * r.median_early;
    return r;
}

ConsistencyReport consistency_check(const std::vector<ReplicateTrajectory>& trajectories, int n,
                                    const Tolerances& tol) {
    if (trajectories.empty()) throw InsufficientDataError("no trajectories");
    std::size_t within = 0;
    for (const auto& t : trajectories)
        if (t.at(n).theta_err_sup < tol.sup_error) ++within;
    ConsistencyReport r;
    r.fraction_within = static_cast<double>(within) / static_cast<double>(trajectories.size());
    r.sup_error = tol.sup_error;
    r.required_fraction = tol.sup_error_fraction;
    r.passed = r.fraction_within >= tol.sup_error_fraction;
    return r;
}

QslReport qsl_check(const std::vector<ReplicateTrajectory>& trajectories, int n, const LimitObjects& objs,
                    double rel_tol) {
    if (trajectories.empty()) throw InsufficientDataError("no trajectories");
    QslReport r;
    r.n = n;
    r.rel_tol = rel_tol;
    r.target = qsl_target(objs);
    r.target_via_inverse = qsl_target_via_inverse(objs);
    std::vector<double> running;
    running.reserve(trajectories.size());
    for (const auto& t : trajectories) running.push_back(t.at(n).qsl_running);
    r.median_running = median(running);
    r.relative_error = std::abs(r.median_running - r.target) / r.target;
    r.passed = std::isfinite(r.median_running) && r.relative_error <= rel_tol;
    return r;
}

std::vector<std::vector<double>> clt_samples(const std::vector<ReplicateTrajectory>& trajectories, int n,
                                             const Truth& truth, CltKind kind) {
    const double scale = std::sqrt(static_cast<double>(subtree_size(n - 1)));
    std::vector<std::vector<double>> rows;
    rows.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        const GenerationRecord& g = t.at(n);
        std::vector<double> row;
        switch (kind) {
            case CltKind::Theta:
                for (std::size_t i = 0; i < 4; ++i) row.push_back(scale * (g.theta[i] - truth.theta[i]));
                break;
            case CltKind::Eta:
                for (std::size_t i = 0; i < 2; ++i) row.push_back(scale * (g.eta[i] - truth.eta[i]));
                break;
            case CltKind::Zeta:
                for (std::size_t i = 0; i < 2; ++i) row.push_back(scale * (g.zeta[i] - truth.zeta[i]));
                break;
            case CltKind::Rho: row.push_back(scale * (g.rho - truth.rho)); break;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

template <std::size_t N>
DenseMatrix to_dense(const Matrix<N>& m) {
    DenseMatrix d(N);
    d.data.assign(m.data.begin(), m.data.end());
    return d;
}

}  // namespace

DenseMatrix clt_covariance(const LimitObjects& objs, CltKind kind) {
    switch (kind) {
        case CltKind::Theta: return to_dense(theta_clt_cov(objs));
        case CltKind::Eta: return to_dense(eta_clt_cov(objs));
        case CltKind::Zeta: return to_dense(zeta_clt_cov(objs));
        case CltKind::Rho: {
            DenseMatrix d(1);
            d(0, 0) = objs.sigma_rho_sq;
            return d;
        }
    }
    return {};
}

CltReport clt_check(const std::vector<std::vector<double>>& samples, const DenseMatrix& theory, CltKind kind,
                    const Tolerances& tol) {
    if (samples.size() < 500) throw InsufficientDataError("CLT check needs at least 500 replicate samples");
    const std::size_t dim = theory.n;
    for (std::size_t i = 0; i < dim; ++i)
        if (!(theory(i, i) > 0.0)) throw SingularMatrixError("theoretical CLT covariance is singular", 0.0);
    for (const auto& row : samples)
        if (row.size() != dim) throw ValidationError("sample dimension does not match the covariance");

    CltReport r;
    r.kind = kind;
    r.replicates = samples.size();
    r.theoretical = theory;
    r.empirical = sample_covariance(samples, dim);
    r.empirical_psd = is_symmetric_psd(r.empirical);
    r.relative_frobenius = relative_frobenius_error(r.empirical, theory);
    r.threshold = kind == CltKind::Rho ? tol.rho_variance_rel : tol.clt_frobenius;
    r.passed_covariance = r.relative_frobenius <= r.threshold;
    r.ks_alpha = tol.ks_alpha;
    r.passed_ks = true;
    for (std::size_t i = 0; i < dim; ++i) {
        const double sd = std::sqrt(theory(i, i));
        std::vector<double> z;
        z.reserve(samples.size());
        for (const auto& row : samples) z.push_back(row[i] / sd);
        const KsResult ks = ks_test_standard_normal(z);
        r.ks.push_back(ks);
        if (!(ks.p_value > tol.ks_alpha)) r.passed_ks = false;
    }
    r.passed = r.passed_covariance && r.passed_ks;
    return r;
}

VarianceConsistencyReport variance_consistency_check(const std::vector<ReplicateTrajectory>& trajectories,
                                                     int n_min, int n_max, double factor) {
    VarianceConsistencyReport r;
    r.eta = rate_check(error_table(trajectories, ErrorKind::Eta, n_min, n_max), factor, "eta");
    r.zeta = rate_check(error_table(trajectories, ErrorKind::Zeta, n_min, n_max), factor, "zeta");
    r.rho = rate_check(error_table(trajectories, ErrorKind::Rho, n_min, n_max), factor, "rho");
    r.passed = r.eta.passed && r.zeta.passed && r.rho.passed;
    return r;
}

}  // namespace binar
