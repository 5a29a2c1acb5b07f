#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace binar {

enum class FamilyKind { Bernoulli, Poisson };

std::string to_string(FamilyKind kind);
/// Accepts "bernoulli" / "poisson" (case-sensitive). Throws InvalidParameter.
FamilyKind family_kind_from_string(const std::string& name);

/// Offspring law driving one thinning operator. The mean must lie in (0, 1):
/// stability forces it below one and both families then have positive variance.
class OffspringFamily {
public:
    static OffspringFamily bernoulli(double p);
    static OffspringFamily poisson(double lambda);
    static OffspringFamily make(FamilyKind kind, double mean);

    FamilyKind kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;

    friend bool operator==(const OffspringFamily&, const OffspringFamily&) = default;

private:
    OffspringFamily(FamilyKind kind, double mean) : kind_(kind), mean_(mean) {}

    FamilyKind kind_;
    double mean_;
};

/// Exact central moment of the offspring law. Orders 1, 2, 3, 4, 6.
double family_central_moment(const OffspringFamily& family, int order);

/// Common-shock Poisson immigration: eps_even = U + W1, eps_odd = U + W2 with
/// U ~ Poisson(lambda0), Wi ~ Poisson(lambda_i) all independent.
struct ImmigrationSpec {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    /// Throws InvalidParameter on negative or non-finite rates. All-zero rates
    /// are accepted (degenerate immigration); validate_hypotheses flags them.
    void validate() const;

    double mean_even() const noexcept { return lambda0 + lambda1; }
    double mean_odd() const noexcept { return lambda0 + lambda2; }
    double covariance() const noexcept { return lambda0; }

    friend bool operator==(const ImmigrationSpec&, const ImmigrationSpec&) = default;
};

class ModelParams {
public:
    /// Throws InvalidParameter unless 0 < max(a, b) < 1.
    ModelParams(OffspringFamily offspring_a, OffspringFamily offspring_b, ImmigrationSpec immigration,
                std::int64_t x1);

    const OffspringFamily& offspring_a() const noexcept { return offspring_a_; }
    const OffspringFamily& offspring_b() const noexcept { return offspring_b_; }
    const ImmigrationSpec& immigration() const noexcept { return immigration_; }
    std::int64_t x1() const noexcept { return x1_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    OffspringFamily offspring_a_;
    OffspringFamily offspring_b_;
    ImmigrationSpec immigration_;
    std::int64_t x1_;
};

/// Bernoulli(0.5) offspring on both sides, immigration (0.3, 0.7, 0.7), X1 = 1.
ModelParams reference_params();

/// Every moment and aggregate consumed by the estimators and the limit formulas.
/// A plain aggregate so that hypothesis checks can run on hand-edited values.
struct DerivedMoments {
    double a = 0, b = 0, c = 0, d = 0;
    double sigma_a2 = 0, sigma_b2 = 0, sigma_c2 = 0, sigma_d2 = 0;
    double rho = 0;
    /// E[(eps_even - c)^2 (eps_odd - d)^2].
    double nu2 = 0;
    double mu_a4 = 0, mu_b4 = 0, mu_c4 = 0, mu_d4 = 0;
    double tau_a6 = 0, tau_b6 = 0, tau_c6 = 0, tau_d6 = 0;
    double a_bar = 0;        // (a + b) / 2
    double a2_bar = 0;       // (a^2 + b^2) / 2
    double c_bar = 0;        // (c + d) / 2
    double c2_bar = 0;       // (sigma_c^2 + sigma_d^2 + c^2 + d^2) / 2
    double upsilon = 0;      // (sigma_a^2 + sigma_b^2) / (2 (a_bar - a2_bar))

    friend bool operator==(const DerivedMoments&, const DerivedMoments&) = default;
};

DerivedMoments derive_moments(const ModelParams& params);

struct HypothesisCheck {
    std::string id;         // "H.1" .. "H.5", or "aggregates"
    std::string condition;  // the inequality that was checked
    bool passed = false;
    bool by_construction = false;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;

    bool all_passed() const;
    /// Human-readable list of failing checks, empty when all pass.
    std::string failures() const;
};

HypothesisReport validate_hypotheses(const DerivedMoments& m);

/// Throws HypothesisViolation listing every failing check.
void require_hypotheses(const DerivedMoments& m);

}  // namespace binar
