#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "binar/errors.hpp"
#include "binar/estimators.hpp"
#include "binar/experiments.hpp"
#include "binar/limits.hpp"
#include "binar/stats.hpp"
#include "oracles.hpp"

using namespace binar;

namespace {

BinarTree three_node() { return BinarTree(1, {0, 1, 2, 0}); }

// X_2k = X_k and X_2k+1 = 2 exactly.
BinarTree noiseless(int depth) {
    std::vector<std::int64_t> v(subtree_size(depth) + 1, 0);
    v[1] = 1;
    for (std::uint64_t k = 1; k < subtree_size(depth - 1) + 1; ++k) {
        v[2 * k] = v[k];
        v[2 * k + 1] = 2;
    }
    return BinarTree(depth, std::move(v));
}

std::vector<std::int64_t> raw(const BinarTree& t) {
    std::vector<std::int64_t> v{0};
    for (auto x : t.labelled()) v.push_back(x);
    return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(WlsTheta, ThreeNodeTree) {
    const ThetaHat t = wls_theta(three_node(), 1);
    EXPECT_TRUE(t.regularized);
    EXPECT_EQ(t.S, make_mat2(0.5, 0.5, 0.5, 0.5));
    EXPECT_NEAR(t.a, 0.5, 1e-12);
    EXPECT_NEAR(t.c, 0.5, 1e-12);
    EXPECT_NEAR(t.b, 0.0, 1e-12);
    EXPECT_NEAR(t.d, 0.0, 1e-12);
    const auto o = oracle::wls_normal_equations(raw(three_node()), 1, 1.0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t.vec()[i], o[i], 1e-10);
}

TEST(WlsTheta, NoiselessTreeInterpolates) {
    const ThetaHat t = wls_theta(noiseless(3), 3);
    EXPECT_FALSE(t.regularized);
    EXPECT_NEAR(t.a, 1.0, 1e-12);
    EXPECT_NEAR(t.c, 0.0, 1e-12);
    EXPECT_NEAR(t.b, 0.0, 1e-12);
    EXPECT_NEAR(t.d, 2.0, 1e-12);
    for (const Residual& r : residuals(noiseless(3), t, 3)) {
        EXPECT_NEAR(r.even, 0.0, 1e-12);
        EXPECT_NEAR(r.odd, 0.0, 1e-12);
    }
    const VarianceEstimates v = estimate_variances(noiseless(3), t, 3);
    EXPECT_NEAR(v.eta[0], 0.0, 1e-12);
    EXPECT_NEAR(v.eta[1], 0.0, 1e-12);
    EXPECT_NEAR(v.rho, 0.0, 1e-12);
}

TEST(WlsTheta, MatchesBruteForceOnRandomTrees) {
    std::mt19937_64 gen(1234);
    std::uniform_int_distribution<int> value(0, 9);
    int regularized = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<std::int64_t> v(subtree_size(3) + 1, 0);
        for (std::size_t k = 1; k < v.size(); ++k) v[k] = value(gen);
        const BinarTree tree(3, v);
        for (int n = 1; n <= 3; ++n) {
            const ThetaHat t = wls_theta(tree, n);
            regularized += t.regularized;
            const auto o = oracle::wls_normal_equations(v, n, t.regularized ? 1.0 : 0.0);
            for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(rel_diff(t.vec()[i], o[i]), 1e-10) << rep << " n=" << n;

            const VarianceEstimates ve = estimate_variances(tree, t, n);
            const auto ov = oracle::variance_normal_equations(v, n, {t.a, t.c, t.b, t.d}, ve.regularized ? 1.0 : 0.0);
            EXPECT_LE(rel_diff(ve.eta[0], ov.eta[0]), 1e-10);
            EXPECT_LE(rel_diff(ve.eta[1], ov.eta[1]), 1e-10);
            EXPECT_LE(rel_diff(ve.zeta[0], ov.zeta[0]), 1e-10);
            EXPECT_LE(rel_diff(ve.zeta[1], ov.zeta[1]), 1e-10);
            EXPECT_LE(rel_diff(ve.rho, ov.rho), 1e-10);
        }
    }
    EXPECT_GT(regularized, 0);  // n = 1 always has a rank-one S
}

TEST(WlsTheta, GenerationRange) {
    EXPECT_THROW(wls_theta(three_node(), 0), OutOfRangeError);
    EXPECT_THROW(wls_theta(three_node(), 2), OutOfRangeError);
}

TEST(Residuals, ThreeNodeTree) {
    const BinarTree tree = three_node();
    const ThetaHat t = wls_theta(tree, 1);
    const auto r = residuals(tree, t, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].even, 1.0, 1e-12);
    EXPECT_NEAR(r[0].odd, 0.0, 1e-12);
    EXPECT_NEAR(rho_hat(tree, t, 1), 0.0, 1e-12);
}

TEST(Variance, ThreeNodeTree) {
    const BinarTree tree = three_node();
    const ThetaHat t = wls_theta(tree, 1);
    const VarianceFit eta = wls_eta(tree, t, 1);
    const VarianceFit zeta = wls_zeta(tree, t, 1);
    EXPECT_TRUE(eta.regularized);
    EXPECT_EQ(eta.Q, make_mat2(0.25, 0.25, 0.25, 0.25));
    // regularized Q = [[1.25, .25], [.25, 1.25]], rhs = (1/4)(1, 1)
    EXPECT_NEAR(eta.estimate[0], 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(eta.estimate[1], 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(zeta.estimate[0], 0.0, 1e-12);
    EXPECT_NEAR(zeta.estimate[1], 0.0, 1e-12);
}

TEST(Variance, TwoGenerationTreeAgainstBruteForce) {
    const BinarTree tree(2, {0, 3, 1, 4, 0, 2, 5, 1});
    const ThetaHat t = wls_theta(tree, 2);
    ASSERT_FALSE(t.regularized);
    const VarianceEstimates v = estimate_variances(tree, t, 2);
    const auto o = oracle::variance_normal_equations(raw(tree), 2, {t.a, t.c, t.b, t.d}, v.regularized ? 1.0 : 0.0);
    EXPECT_NEAR(v.eta[0], o.eta[0], 1e-10);
    EXPECT_NEAR(v.eta[1], o.eta[1], 1e-10);
    EXPECT_NEAR(v.zeta[0], o.zeta[0], 1e-10);
    EXPECT_NEAR(v.zeta[1], o.zeta[1], 1e-10);
    EXPECT_NEAR(v.rho, o.rho, 1e-10);
}

TEST(Estimates, SeparateAndCombinedAgree) {
    const BinarTree tree = simulate_tree(reference_params(), 8, RngStream(3, 0));
    const ThetaHat t = wls_theta(tree, 8);
    const VarianceEstimates v = estimate_variances(tree, t, 8);
    EXPECT_EQ(wls_eta(tree, t, 8).estimate, v.eta);
    EXPECT_EQ(wls_zeta(tree, t, 8).estimate, v.zeta);
    EXPECT_EQ(rho_hat(tree, t, 8), v.rho);
    const EstimateSet all = estimate_all(tree, 8);
    EXPECT_EQ(all.node_count, subtree_size(8));
    EXPECT_EQ(all.theta.vec(), t.vec());
}

TEST(Estimates, IncrementalEqualsScratch) {
    const BinarTree tree = simulate_tree(reference_params(), 12, RngStream(8, 1));
    const Truth truth = truth_from_moments(derive_moments(reference_params()));
    const ReplicateTrajectory traj = trajectory_for_tree(tree, truth);
    for (int n = 1; n <= 12; ++n) {
        const EstimateSet e = estimate_all(tree, n);
        EXPECT_EQ(traj.at(n).theta, e.theta.vec()) << n;
        EXPECT_EQ(traj.at(n).eta, e.variances.eta) << n;
        EXPECT_EQ(traj.at(n).zeta, e.variances.zeta) << n;
        EXPECT_EQ(traj.at(n).rho, e.variances.rho) << n;
    }
}

TEST(Estimates, PartitionInvariance) {
    const BinarTree tree = simulate_tree(reference_params(), 14, RngStream(21, 0));
    const ThetaHat whole = wls_theta(tree, 14);
    const std::uint64_t last = subtree_size(13);
    for (std::uint64_t parts : {2u, 3u, 7u, 64u}) {
        WlsAccumulator total;
        for (std::uint64_t p = 0; p < parts; ++p) {
            WlsAccumulator piece;
            const std::uint64_t lo = 1 + last * p / parts, hi = last * (p + 1) / parts;
            piece.add_range(tree, lo, hi);
            total.merge(piece);
        }
        EXPECT_EQ(total.mothers(), last);
        const ThetaHat t = total.theta();
        for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(rel_diff(t.vec()[i], whole.vec()[i]), 1e-10);
    }
}

TEST(Estimates, EvenOddDecoupling) {
    // Shuffling the odd leaves changes the odd responses but no regressor.
    const BinarTree tree = simulate_tree(reference_params(), 9, RngStream(4, 4));
    std::vector<std::int64_t> v = raw(tree);
    std::vector<std::int64_t> odd;
    for (std::uint64_t k = generation_size(8); k <= subtree_size(8); ++k) odd.push_back(v[2 * k + 1]);
    std::mt19937_64 gen(5);
    std::shuffle(odd.begin(), odd.end(), gen);
    for (std::uint64_t k = generation_size(8), i = 0; k <= subtree_size(8); ++k, ++i) v[2 * k + 1] = odd[i] + 3;
    const ThetaHat a = wls_theta(tree, 9);
    const ThetaHat b = wls_theta(BinarTree(9, v), 9);
    EXPECT_EQ(a.a, b.a);
    EXPECT_EQ(a.c, b.c);
    EXPECT_NE(a.d, b.d);
}

TEST(Estimates, ReferenceConsistencyAtDepth14) {
    const Truth truth = truth_from_moments(derive_moments(reference_params()));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const BinarTree tree = simulate_tree(reference_params(), 14, RngStream(seed, 0));
        const EstimateSet e = estimate_all(tree, 14);
        EXPECT_LT(norm_inf(e.theta.vec() - truth.theta), 0.1) << seed;
        EXPECT_LT(norm_inf(e.variances.eta - truth.eta), 0.1) << seed;
        EXPECT_LT(norm_inf(e.variances.zeta - truth.zeta), 0.1) << seed;
        EXPECT_LT(std::abs(e.variances.rho - truth.rho), 0.1) << seed;
        EXPECT_FALSE(e.theta.regularized);
    }
}

TEST(Estimates, NoRegularizationBeyondGeneration3) {
    const Truth truth = truth_from_moments(derive_moments(reference_params()));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto traj = trajectory_for_tree(simulate_tree(reference_params(), 8, RngStream(seed, 9)), truth);
        for (int n = 4; n <= 8; ++n) {
            EXPECT_FALSE(traj.at(n).regularized_S) << seed << " " << n;
            EXPECT_FALSE(traj.at(n).regularized_Q) << seed << " " << n;
        }
    }
}

TEST(Estimates, ResidualsCentered) {
    const BinarTree tree = simulate_tree(reference_params(), 16, RngStream(2, 2));
    const ThetaHat t = wls_theta(tree, 16);
    std::vector<double> e, o;
    for (const Residual& r : residuals(tree, t, 16)) {
        e.push_back(r.even);
        o.push_back(r.odd);
    }
    EXPECT_NEAR(mean(e), 0.0, 3 * std::sqrt(sample_variance(e) / e.size()));
    EXPECT_NEAR(mean(o), 0.0, 3 * std::sqrt(sample_variance(o) / o.size()));
}

TEST(IncreasingProcess, SingleAncestor) {
    const DerivedMoments m = derive_moments(reference_params());
    const MartingaleDiagnostic d = increasing_process(three_node(), m, 1);
    const Mat4 expected = 0.25 * kron2(make_mat2(1.25, 0.3, 0.3, 1.25), make_mat2(1, 1, 1, 1));
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(d.increasing.data[i], expected.data[i], 1e-15);
        EXPECT_NEAR(d.normalized.data[i], expected.data[i], 1e-15);
    }
}

TEST(IncreasingProcess, ZeroValueTerm) {
    const DerivedMoments m = derive_moments(reference_params());
    EXPECT_EQ(increasing_process_term(m, 0), kron2(make_mat2(1.0, 0.3, 0.3, 1.0), make_mat2(0, 0, 0, 1)));
}

TEST(IncreasingProcess, SymmetricPsdAndConvergesToL) {
    const DerivedMoments m = derive_moments(reference_params());
    const BinarTree tree = simulate_tree(reference_params(), 16, RngStream(10, 0));
    for (int n = 1; n <= 16; ++n) {
        const MartingaleDiagnostic d = increasing_process(tree, m, n);
        EXPECT_TRUE(is_symmetric(d.normalized));
        DenseMatrix dm(4);
        dm.data.assign(d.normalized.data.begin(), d.normalized.data.end());
        EXPECT_TRUE(is_symmetric_psd(dm)) << n;
    }
    const LimitObjects objs = limit_matrices_mc(reference_params(), 200000, RngStream(1, 77));
    const Mat4 diff = increasing_process(tree, m, 16).normalized - objs.L.value;
    EXPECT_LT(norm_frobenius(diff) / norm_frobenius(objs.L.value), 0.05);
}
