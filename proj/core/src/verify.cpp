#include "binar/verify.hpp"

#include <algorithm>

namespace binar {

bool VerifyReport::passed() const {
    if (rate && !rate->passed) return false;
    if (consistency && !consistency->passed) return false;
    if (qsl && !qsl->passed) return false;
    for (const auto& c : clt)
        if (!c.passed) return false;
    if (variance && !variance->passed) return false;
    return true;
}

VerifyReport run_verification(const VerifySettings& s) {
    auto wants = [&](Check c) { return std::find(s.checks.begin(), s.checks.end(), c) != s.checks.end(); };

    VerifyReport report;
    const DerivedMoments m = derive_moments(s.params);
    report.truth = s.truth.value_or(truth_from_moments(m));
    if (s.checks.empty()) return report;
    require_hypotheses(m);

    if (wants(Check::Qsl) || wants(Check::Clt))
        report.limits = limit_matrices_mc(s.params, s.limit_draws, RngStream(s.seed, kLimitsStreamId), s.tail_tol);

    if (wants(Check::Rate) || wants(Check::Qsl) || wants(Check::Variance)) {
        ExperimentConfig cfg;
        cfg.params = s.params;
        cfg.n_min = s.n_min;
        cfg.n_max = s.n_max;
        cfg.replicates = s.replicates;
        cfg.seed = s.seed;
        cfg.stream_offset = kRateStreamOffset;
        cfg.max_depth = s.max_depth;
        const std::optional<Mat2> lambda =
            report.limits ? std::optional<Mat2>(report.limits->A.value) : std::nullopt;
        report.trajectories = run_replicates(cfg, report.truth, lambda);

        if (wants(Check::Rate)) {
            report.rate = rate_check(error_table(report.trajectories, ErrorKind::Theta, s.n_min, s.n_max),
                                     s.tolerances.rate_factor, "theta");
            report.consistency = consistency_check(report.trajectories, s.n_max, s.tolerances);
        }
        if (wants(Check::Qsl))
            report.qsl = qsl_check(report.trajectories, s.n_max, *report.limits, s.tolerances.qsl_rel_tol);
        if (wants(Check::Variance))
            report.variance =
                variance_consistency_check(report.trajectories, s.n_min, s.n_max, s.tolerances.rate_factor);
    }

    if (wants(Check::Clt)) {
        ExperimentConfig cfg;
        cfg.params = s.params;
        cfg.n_min = s.clt_generation;
        cfg.n_max = s.clt_generation;
        cfg.replicates = s.clt_replicates;
        cfg.seed = s.seed;
        cfg.stream_offset = kCltStreamOffset;
        cfg.max_depth = s.max_depth;
        const auto runs = run_replicates(cfg, report.truth);
        for (CltKind kind : {CltKind::Theta, CltKind::Eta, CltKind::Zeta, CltKind::Rho}) {
            report.clt.push_back(clt_check(clt_samples(runs, s.clt_generation, report.truth, kind),
                                           clt_covariance(*report.limits, kind), kind, s.tolerances));
        }
    }
    return report;
}

}  // namespace binar
