#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "binar/estimators.hpp"
#include "binar/limits.hpp"
#include "binar/model.hpp"
#include "binar/stats.hpp"

namespace binar {

enum class Check { Rate, Qsl, Clt, Variance };

std::string to_string(Check check);
/// "rate", "qsl", "clt", "variance"; throws ValidationError otherwise.
Check check_from_string(const std::string& name);

/// Pass thresholds of the statistical checks.
struct Tolerances {
    double rate_factor = 3.0;          // median e_{n_max} <= factor * median e over the first half
    double sup_error = 0.1;            // ||theta_hat_{n_max} - theta||_inf < sup_error ...
    double sup_error_fraction = 0.9;   // ... in at least this fraction of replicates
    double qsl_rel_tol = 0.25;
    double clt_frobenius = 0.15;
    double rho_variance_rel = 0.20;
    double ks_alpha = 0.01;
};

/// Parameter values the estimates are compared against.
struct Truth {
    Vec4 theta;  // (a, c, b, d)
    Vec2 eta;    // (sigma_a^2, sigma_c^2)
    Vec2 zeta;   // (sigma_b^2, sigma_d^2)
    double rho = 0;
};

Truth truth_from_moments(const DerivedMoments& m);

struct ExperimentConfig {
    ModelParams params = reference_params();
    int n_min = 6;
    int n_max = 14;
    std::uint64_t replicates = 200;
    std::uint64_t seed = 1;
    /// Stream ids of replicate r are stream_offset + r.
    std::uint64_t stream_offset = 0;
    int max_depth = kDefaultMaxDepth;

    /// Throws ValidationError on an inconsistent configuration.
    void validate() const;
};

struct GenerationRecord {
    int n = 0;
    Vec4 theta;
    Vec2 eta;
    Vec2 zeta;
    double rho = 0;
    bool regularized_S = false;
    bool regularized_Q = false;
    double theta_err_sq = 0;   // ||theta_hat - theta||^2
    double theta_err_sup = 0;  // ||theta_hat - theta||_inf
    double eta_err_sq = 0;
    double zeta_err_sq = 0;
    double rho_err_sq = 0;
    /// |T_{n-1}| (theta_hat - theta)^t Lambda (theta_hat - theta); 0 without Lambda.
    double qsl_term = 0;
    /// (1/n) sum_{k<=n} qsl_term_k.
    double qsl_running = 0;
};

struct ReplicateTrajectory {
    std::uint64_t replicate = 0;
    std::vector<GenerationRecord> generations;  // n = 1 .. n_max

    const GenerationRecord& at(int n) const { return generations.at(static_cast<std::size_t>(n - 1)); }
};

/// Simulates one tree per replicate (stream (seed, stream_offset + r)) of depth
/// n_max and fits every generation incrementally. `lambda_factor` is the A of
/// Lambda = I_2 (x) A used for the quadratic strong law terms. Deterministic for
/// a fixed configuration and independent of the worker count.
std::vector<ReplicateTrajectory> run_replicates(const ExperimentConfig& config, const Truth& truth,
                                                const std::optional<Mat2>& lambda_factor = std::nullopt);

/// Fits of T_1 .. T_{tree.depth()} from one tree.
ReplicateTrajectory trajectory_for_tree(const BinarTree& tree, const Truth& truth,
                                        const std::optional<Mat2>& lambda_factor = std::nullopt);

/// Squared errors per replicate and generation, err[r][n - n_min].
struct ErrorTable {
    int n_min = 0;
    int n_max = 0;
    std::vector<std::vector<double>> err;
};

enum class ErrorKind { Theta, Eta, Zeta, Rho };

ErrorTable error_table(const std::vector<ReplicateTrajectory>& trajectories, ErrorKind kind, int n_min, int n_max);

struct RateReport {
    std::string statistic;
    double median_final = 0;  // median over replicates of e_{n_max}
    double median_early = 0;  // median over replicates and n in the first half of the range
    double ratio = 0;
    double factor = 0;
    bool passed = false;
};

/// e_n = err_n * |T_{n-1}| / n. Boundedness check: passes when
/// median(e_{n_max}) <= factor * median(e_n, n_min <= n <= n_min + (n_max - n_min)/2).
/// Needs >= 50 replicates and >= 5 generations (InsufficientDataError).
RateReport rate_check(const ErrorTable& table, double factor, const std::string& statistic = "theta");

struct ConsistencyReport {
    double fraction_within = 0;  // replicates with ||theta_hat_{n_max} - theta||_inf < sup_error
    double sup_error = 0;
    double required_fraction = 0;
    bool passed = false;
};

ConsistencyReport consistency_check(const std::vector<ReplicateTrajectory>& trajectories, int n,
                                    const Tolerances& tol);

struct QslReport {
    int n = 0;
    double median_running = 0;
    double target = 0;
    double target_via_inverse = 0;
    double relative_error = 0;
    double rel_tol = 0;
    bool passed = false;
};

/// Cross-replicate median of the running average at generation n against
/// tr(Lambda^{-1/2} L Lambda^{-1/2}). Trajectories must carry QSL terms.
QslReport qsl_check(const std::vector<ReplicateTrajectory>& trajectories, int n, const LimitObjects& objs,
                    double rel_tol);

enum class CltKind { Theta, Eta, Zeta, Rho };

std::string to_string(CltKind kind);

/// Rows sqrt(|T_{n-1}|) (estimate_n - truth), one per replicate.
std::vector<std::vector<double>> clt_samples(const std::vector<ReplicateTrajectory>& trajectories, int n,
                                             const Truth& truth, CltKind kind);

/// Theoretical covariance of the CLT for `kind`.
DenseMatrix clt_covariance(const LimitObjects& objs, CltKind kind);

struct CltReport {
    CltKind kind = CltKind::Theta;
    std::size_t replicates = 0;
    DenseMatrix empirical;
    DenseMatrix theoretical;
    double relative_frobenius = 0;
    double threshold = 0;
    std::vector<KsResult> ks;  // per component, standardised by the theoretical variance
    double ks_alpha = 0;
    bool empirical_psd = false;
    bool passed_covariance = false;
    bool passed_ks = false;
    bool passed = false;
};

/// Covariance agreement (relative Frobenius; for rho the relative variance
/// error against rho_variance_rel) plus a KS test of each standardised
/// component. Needs >= 500 samples; throws SingularMatrixError when a
/// theoretical variance is not positive.
CltReport clt_check(const std::vector<std::vector<double>>& samples, const DenseMatrix& theory, CltKind kind,
                    const Tolerances& tol);

struct VarianceConsistencyReport {
    RateReport eta;
    RateReport zeta;
    RateReport rho;
    bool passed = false;
};

VarianceConsistencyReport variance_consistency_check(const std::vector<ReplicateTrajectory>& trajectories,
                                                     int n_min, int n_max, double factor);

}  // namespace binar
