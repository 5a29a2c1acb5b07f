#include "binar/estimators.hpp"

#include <array>
#include <string>

#include "binar/errors.hpp"

namespace binar {

void WlsAccumulator::add_node(std::int64_t xi, std::int64_t even_child, std::int64_t odd_child) {
    const double x = static_cast<double>(xi);
    const double e = static_cast<double>(even_child);
    const double o = static_cast<double>(odd_child);
    const double w = 1.0 / (1.0 + x);
    const double v = w * w;
    sxx_.add(w * x * x);
    sx_.add(w * x);
    s1_.add(w);
    sx_even_.add(w * x * e);
    s_even_.add(w * e);
    sx_odd_.add(w * x * o);
    s_odd_.add(w * o);
    qxx_.add(v * x * x);
    qx_.add(v * x);
    q1_.add(v);
    ++count_;
}

void WlsAccumulator::add_range(const BinarTree& tree, std::uint64_t first, std::uint64_t last) {
    if (first < 1 || 2 * last + 1 > tree.node_count())
        throw OutOfRangeError("mother range [" + std::to_string(first) + ", " + std::to_string(last) +
                              "] has children outside the tree");
    for (std::uint64_t k = first; k <= last; ++k) add_node(tree[k], tree[2 * k], tree[2 * k + 1]);
}

void WlsAccumulator::add_generation(const BinarTree& tree, int r) {
    if (r < 0 || r >= tree.depth())
        throw OutOfRangeError("generation " + std::to_string(r) + " has no children in a tree of depth " +
                              std::to_string(tree.depth()));
    add_range(tree, generation_size(r), 2 * generation_size(r) - 1);
    ++generations_;
}

void WlsAccumulator::merge(const WlsAccumulator& other) {
    sxx_.merge(other.sxx_);
    sx_.merge(other.sx_);
    s1_.merge(other.s1_);
    sx_even_.merge(other.sx_even_);
    s_even_.merge(other.s_even_);
    sx_odd_.merge(other.sx_odd_);
    s_odd_.merge(other.s_odd_);
    qxx_.merge(other.qxx_);
    qx_.merge(other.qx_);
    q1_.merge(other.q1_);
    count_ += other.count_;
    generations_ = std::max(generations_, other.generations_);
}

Mat2 WlsAccumulator::S() const { return make_mat2(sxx_.value(), sx_.value(), sx_.value(), s1_.value()); }

Mat2 WlsAccumulator::Q() const { return make_mat2(qxx_.value(), qx_.value(), qx_.value(), q1_.value()); }

ThetaHat WlsAccumulator::theta(int generation) const {
    ThetaHat t;
    t.S = S();
    t.generation = generation < 0 ? generations_ : generation;
    const Regularized reg = regularize_if_singular(t.S);
    t.regularized = reg.regularized;
    // Sigma = I_2 (x) S decouples into the even and odd 2x2 systems.
    const Vec2 even = solve(reg.matrix, Vec2{{sx_even_.value(), s_even_.value()}});
    const Vec2 odd = solve(reg.matrix, Vec2{{sx_odd_.value(), s_odd_.value()}});
    t.a = even[0];
    t.c = even[1];
    t.b = odd[0];
    t.d = odd[1];
    return t;
}

void check_generation(const BinarTree& tree, int n) {
    if (n < 1 || n > tree.depth())
        throw OutOfRangeError("generation n = " + std::to_string(n) + " outside 1.." + std::to_string(tree.depth()));
}

ThetaHat wls_theta(const BinarTree& tree, int n) {
    check_generation(tree, n);
    WlsAccumulator acc;
    for (int r = 0; r < n; ++r) acc.add_generation(tree, r);
    return acc.theta();
}

std::vector<Residual> residuals(const BinarTree& tree, const ThetaHat& theta, int n) {
    check_generation(tree, n);
    const std::uint64_t mothers = subtree_size(n - 1);
    std::vector<Residual> out;
    out.reserve(mothers);
    for (std::uint64_t k = 1; k <= mothers; ++k) {
        const double x = static_cast<double>(tree[k]);
        out.push_back({static_cast<double>(tree[2 * k]) - theta.a * x - theta.c,
                       static_cast<double>(tree[2 * k + 1]) - theta.b * x - theta.d});
    }
    return out;
}

namespace {

struct VarianceSums {
    CompensatedSum qxx, qx, q1;
    CompensatedSum eta_x, eta_1, zeta_x, zeta_1;
    CompensatedSum cross;
};

VarianceSums accumulate_variance_sums(const BinarTree& tree, const ThetaHat& theta, int n) {
    check_generation(tree, n);
    VarianceSums s;
    const std::uint64_t mothers = subtree_size(n - 1);
    for (std::uint64_t k = 1; k <= mothers; ++k) {
        const double x = static_cast<double>(tree[k]);
        const double ve = static_cast<double>(tree[2 * k]) - theta.a * x - theta.c;
        const double vo = static_cast<double>(tree[2 * k + 1]) - theta.b * x - theta.d;
        const double w = 1.0 / ((1.0 + x) * (1.0 + x));
        s.qxx.add(w * x * x);
        s.qx.add(w * x);
        s.q1.add(w);
        s.eta_x.add(w * ve * ve * x);
        s.eta_1.add(w * ve * ve);
        s.zeta_x.add(w * vo * vo * x);
        s.zeta_1.add(w * vo * vo);
        s.cross.add(ve * vo);
    }
    return s;
}

Mat2 q_matrix(const VarianceSums& s) { return make_mat2(s.qxx.value(), s.qx.value(), s.qx.value(), s.q1.value()); }

}  // namespace

VarianceEstimates estimate_variances(const BinarTree& tree, const ThetaHat& theta, int n) {
    const VarianceSums s = accumulate_variance_sums(tree, theta, n);
    VarianceEstimates out;
    out.Q = q_matrix(s);
    const Regularized reg = regularize_if_singular(out.Q);
    out.regularized = reg.regularized;
    out.eta = solve(reg.matrix, Vec2{{s.eta_x.value(), s.eta_1.value()}});
    out.zeta = solve(reg.matrix, Vec2{{s.zeta_x.value(), s.zeta_1.value()}});
    out.rho = s.cross.value() / static_cast<double>(subtree_size(n - 1));
    return out;
}

VarianceFit wls_eta(const BinarTree& tree, const ThetaHat& theta, int n) {
    const VarianceEstimates v = estimate_variances(tree, theta, n);
    return {v.eta, v.Q, v.regularized};
}

VarianceFit wls_zeta(const BinarTree& tree, const ThetaHat& theta, int n) {
    const VarianceEstimates v = estimate_variances(tree, theta, n);
    return {v.zeta, v.Q, v.regularized};
}

double rho_hat(const BinarTree& tree, const ThetaHat& theta, int n) {
    return estimate_variances(tree, theta, n).rho;
}

EstimateSet estimate_all(const BinarTree& tree, int n) {
    EstimateSet out;
    out.generation = n;
    out.theta = wls_theta(tree, n);
    out.variances = estimate_variances(tree, out.theta, n);
    out.node_count = subtree_size(n);
    return out;
}

Mat4 increasing_process_term(const DerivedMoments& m, std::int64_t xi) {
    const double x = static_cast<double>(xi);
    const double c2 = (1.0 + x) * (1.0 + x);
    const Mat2 noise = make_mat2(m.sigma_a2 * x + m.sigma_c2, m.rho, m.rho, m.sigma_b2 * x + m.sigma_d2);
    const Mat2 design = make_mat2(x * x, x, x, 1.0);
    return (1.0 / c2) * kron2(noise, design);
}

MartingaleDiagnostic increasing_process(const BinarTree& tree, const DerivedMoments& m, int n) {
    check_generation(tree, n);
    std::array<CompensatedSum, 16> sums;
    const std::uint64_t mothers = subtree_size(n - 1);
    for (std::uint64_t k = 1; k <= mothers; ++k) {
        const Mat4 term = increasing_process_term(m, tree[k]);
        for (std::size_t i = 0; i < 16; ++i) sums[i].add(term.data[i]);
    }
    MartingaleDiagnostic out;
    out.generation = n;
    for (std::size_t i = 0; i < 16; ++i) out.increasing.data[i] = sums[i].value();
    out.normalized = (1.0 / static_cast<double>(mothers)) * out.increasing;
    return out;
}

}  // namespace binar
