#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "binar/errors.hpp"
#include "binar/model.hpp"
#include "binar/rng.hpp"
#include "oracles.hpp"

using namespace binar;

namespace {

bool check_passed(const HypothesisReport& r, const std::string& id) {
    bool found = false, ok = true;
    for (const auto& c : r.checks)
        if (c.id == id) {
            found = true;
            ok = ok && c.passed;
        }
    EXPECT_TRUE(found) << id;
    return ok;
}

ModelParams with_immigration(double l0, double l1, double l2) {
    return ModelParams(OffspringFamily::bernoulli(0.5), OffspringFamily::bernoulli(0.5), {l0, l1, l2}, 1);
}

}  // namespace

TEST(DeriveMoments, ReferenceParameters) {
    const DerivedMoments m = derive_moments(reference_params());
    EXPECT_DOUBLE_EQ(m.a, 0.5);
    EXPECT_DOUBLE_EQ(m.b, 0.5);
    EXPECT_DOUBLE_EQ(m.c, 1.0);
    EXPECT_DOUBLE_EQ(m.d, 1.0);
    EXPECT_DOUBLE_EQ(m.sigma_a2, 0.25);
    EXPECT_DOUBLE_EQ(m.sigma_b2, 0.25);
    EXPECT_DOUBLE_EQ(m.sigma_c2, 1.0);
    EXPECT_DOUBLE_EQ(m.sigma_d2, 1.0);
    EXPECT_DOUBLE_EQ(m.rho, 0.3);
    EXPECT_DOUBLE_EQ(m.a_bar, 0.5);
    EXPECT_DOUBLE_EQ(m.a2_bar, 0.25);
    EXPECT_DOUBLE_EQ(m.upsilon, 1.0);
    EXPECT_DOUBLE_EQ(m.c_bar, 1.0);
    EXPECT_DOUBLE_EQ(m.c2_bar, 2.0);
    EXPECT_DOUBLE_EQ(m.mu_a4, 0.0625);
    EXPECT_DOUBLE_EQ(m.mu_c4, 1.0 + 3.0);
}

TEST(DeriveMoments, NoCommonShockMeansZeroRho) {
    EXPECT_EQ(derive_moments(with_immigration(0.0, 0.7, 0.7)).rho, 0.0);
}

TEST(DeriveMoments, Deterministic) {
    const ModelParams p(OffspringFamily::poisson(0.35), OffspringFamily::bernoulli(0.7), {0.2, 0.9, 0.4}, 3);
    EXPECT_EQ(derive_moments(p), derive_moments(p));
}

TEST(DeriveMoments, MixedImmigrationMomentMatchesTripleSum) {
    for (const auto& l : std::vector<std::array<double, 3>>{{0.3, 0.7, 0.7}, {0.0, 1.0, 0.5}, {1.2, 0.1, 0.4}}) {
        const DerivedMoments m = derive_moments(with_immigration(l[0], l[1], l[2]));
        EXPECT_NEAR(m.nu2, oracle::common_shock_mixed_moment(l[0], l[1], l[2]), 1e-10);
        EXPECT_NEAR(m.mu_c4, oracle::poisson_central_moment(l[0] + l[1], 4), 1e-10);
        EXPECT_NEAR(m.tau_d6, oracle::poisson_central_moment(l[0] + l[2], 6), 1e-9);
    }
}

TEST(CentralMoment, ClosedFormsMatchSupportSums) {
    for (double p : {0.1, 0.5, 0.83}) {
        const OffspringFamily f = OffspringFamily::bernoulli(p);
        EXPECT_EQ(family_central_moment(f, 1), 0.0);
        for (int order : {2, 3, 4, 6})
            EXPECT_NEAR(family_central_moment(f, order), oracle::bernoulli_central_moment(p, order), 1e-14)
                << "p=" << p << " order=" << order;
    }
    for (double lambda : {0.05, 0.4, 0.95}) {
        const OffspringFamily f = OffspringFamily::poisson(lambda);
        EXPECT_EQ(family_central_moment(f, 1), 0.0);
        for (int order : {2, 3, 4, 6})
            EXPECT_NEAR(family_central_moment(f, order), oracle::poisson_central_moment(lambda, order), 1e-12)
                << "lambda=" << lambda << " order=" << order;
    }
    EXPECT_DOUBLE_EQ(family_central_moment(OffspringFamily::poisson(0.4), 4), 0.88);
    EXPECT_DOUBLE_EQ(family_central_moment(OffspringFamily::bernoulli(0.5), 4), 0.0625);
    EXPECT_THROW(family_central_moment(OffspringFamily::poisson(0.4), 5), InvalidParameter);
}

TEST(CentralMoment, MonteCarloWithinFourStandardErrors) {
    const int draws = 1000000;
    for (const OffspringFamily& f : {OffspringFamily::bernoulli(0.3), OffspringFamily::poisson(0.6)}) {
        RngStream rng(2024, static_cast<std::uint64_t>(f.kind()));
        std::vector<double> xs(draws);
        for (auto& x : xs) x = static_cast<double>(thin(f, 1, rng)) - f.mean();
        for (int order : {2, 4, 6}) {
            double s = 0, s2 = 0;
            for (double x : xs) {
                const double v = std::pow(x, order);
                s += v;
                s2 += v * v;
            }
            const double mean = s / draws;
            const double se = std::sqrt((s2 / draws - mean * mean) / draws);
            EXPECT_NEAR(mean, family_central_moment(f, order), 4 * se) << to_string(f.kind()) << " order " << order;
        }
    }
}

TEST(Family, RangeChecks) {
    EXPECT_THROW(OffspringFamily::poisson(1.2), InvalidParameter);
    EXPECT_THROW(OffspringFamily::bernoulli(0.0), InvalidParameter);
    EXPECT_THROW(OffspringFamily::bernoulli(1.0), InvalidParameter);
    EXPECT_THROW(family_kind_from_string("geometric"), InvalidParameter);
    EXPECT_EQ(family_kind_from_string("poisson"), FamilyKind::Poisson);
}

TEST(ModelParams, Validation) {
    EXPECT_THROW(with_immigration(-0.1, 0.7, 0.7), InvalidParameter);
    EXPECT_THROW(ModelParams(OffspringFamily::bernoulli(0.5), OffspringFamily::bernoulli(0.5), {0.3, 0.7, 0.7}, -1),
                 InvalidParameter);
    EXPECT_NO_THROW(with_immigration(0.0, 0.0, 0.0));
}

TEST(Hypotheses, ReferencePasses) {
    const HypothesisReport r = validate_hypotheses(derive_moments(reference_params()));
    EXPECT_TRUE(r.all_passed()) << r.failures();
    for (const char* id : {"H.1", "H.2", "H.3", "H.4", "H.5"}) EXPECT_TRUE(check_passed(r, id));
    bool by_construction_h1 = false;
    for (const auto& c : r.checks)
        if (c.id == "H.1") by_construction_h1 = c.by_construction;
    EXPECT_TRUE(by_construction_h1);
}

TEST(Hypotheses, CovarianceTooLargeFailsH3) {
    DerivedMoments m = derive_moments(reference_params());
    m.rho = 1.1;
    m.sigma_c2 = 1.0;
    m.sigma_d2 = 1.0;
    const HypothesisReport r = validate_hypotheses(m);
    EXPECT_FALSE(check_passed(r, "H.3"));
    EXPECT_FALSE(r.all_passed());
    EXPECT_THROW(require_hypotheses(m), HypothesisViolation);
}

TEST(Hypotheses, ZeroImmigrationFailsH2) {
    const HypothesisReport r = validate_hypotheses(derive_moments(with_immigration(0, 0, 0)));
    EXPECT_FALSE(check_passed(r, "H.2"));
}

TEST(Hypotheses, MonotoneInLambda1) {
    for (double l0 : {0.0, 0.3, 1.0, 5.0}) {
        bool previous = false;
        for (int i = 0; i <= 40; ++i) {
            const double l1 = 0.05 * i;
            const bool h3 = check_passed(validate_hypotheses(derive_moments(with_immigration(l0, l1, 0.0))), "H.3");
            if (previous) EXPECT_TRUE(h3) << "lambda0=" << l0 << " lambda1=" << l1;
            previous = h3;
        }
        if (l0 > 0) EXPECT_TRUE(previous);
    }
}
