#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "binar/experiments.hpp"

namespace binar {

/// Stream ids reserved for each stage of a verification run. Replicates use
/// offset + replicate index.
inline constexpr std::uint64_t kRateStreamOffset = 0;
inline constexpr std::uint64_t kCltStreamOffset = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kLimitsStreamId = std::uint64_t{1} << 40;

struct VerifySettings {
    ModelParams params = reference_params();
    std::uint64_t seed = 1;
    int n_min = 6;
    int n_max = 14;
    std::uint64_t replicates = 200;
    int clt_generation = 12;
    std::uint64_t clt_replicates = 1000;
    std::uint64_t limit_draws = 1000000;
    double tail_tol = 1e-8;
    int max_depth = kDefaultMaxDepth;
    Tolerances tolerances;
    /// Replaces the model-implied truth when set.
    std::optional<Truth> truth;
    std::vector<Check> checks{Check::Rate, Check::Qsl, Check::Clt, Check::Variance};
};

struct VerifyReport {
    Truth truth;
    std::optional<LimitObjects> limits;
    std::optional<RateReport> rate;
    std::optional<ConsistencyReport> consistency;
    std::optional<QslReport> qsl;
    std::vector<CltReport> clt;
    std::optional<VarianceConsistencyReport> variance;
    /// Trajectories of the rate/QSL/variance run (empty when none of those ran).
    std::vector<ReplicateTrajectory> trajectories;

    bool passed() const;
};

/// Runs the requested checks. The rate, QSL and variance checks share one
/// replicate run over generations 1..n_max; the CLT checks use a separate run
/// at clt_generation. Limit objects come from the Monte Carlo route.
VerifyReport run_verification(const VerifySettings& settings);

}  // namespace binar
