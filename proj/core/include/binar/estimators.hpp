#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "binar/linalg.hpp"
#include "binar/model.hpp"
#include "binar/stats.hpp"
#include "binar/tree.hpp"

namespace binar {

/// Weighted least-squares estimate of theta = (a, c, b, d) from T_n, built
/// on S_{n-1} = sum_{k in T_{n-1}} (1/c_k) Phi_k Phi_k^t with Phi_k = (X_k, 1)
/// and c_k = 1 + X_k.
struct ThetaHat {
    double a = 0, c = 0, b = 0, d = 0;
    Mat2 S;                    // as accumulated, before regularisation
    bool regularized = false;  // S + I was inverted instead of S
    int generation = 0;

    /// (a, c, b, d).
    Vec4 vec() const { return Vec4{{a, c, b, d}}; }
};

/// Running sums behind ThetaHat and the variance estimators' Q matrix.
/// Sums are compensated; accumulation order is label order, so adding
/// generations one at a time reproduces a from-scratch fit bit for bit.
class WlsAccumulator {
public:
    /// Adds every mother k in G_r (requires r < tree.depth()).
    void add_generation(const BinarTree& tree, int r);
    /// Adds mothers with labels in [first, last]; used for partitioned sums.
    void add_range(const BinarTree& tree, std::uint64_t first, std::uint64_t last);
    /// Combines partial sums over disjoint label ranges.
    void merge(const WlsAccumulator& other);

    std::uint64_t mothers() const noexcept { return count_; }
    int generations() const noexcept { return generations_; }

    Mat2 S() const;
    Mat2 Q() const;

    /// Solves both 2x2 systems; generation is recorded as generations() unless
    /// overridden.
    ThetaHat theta(int generation = -1) const;

private:
    void add_node(std::int64_t x, std::int64_t even_child, std::int64_t odd_child);

    // 1/c weighted: x^2, x, 1, x*X_2k, X_2k, x*X_2k+1, X_2k+1
    CompensatedSum sxx_, sx_, s1_, sx_even_, s_even_, sx_odd_, s_odd_;
    // 1/d weighted: x^2, x, 1
    CompensatedSum qxx_, qx_, q1_;
    std::uint64_t count_ = 0;
    int generations_ = 0;
};

/// Throws OutOfRangeError unless 1 <= n <= tree.depth().
void check_generation(const BinarTree& tree, int n);

ThetaHat wls_theta(const BinarTree& tree, int n);

struct Residual {
    double even = 0;  // X_2k - a X_k - c
    double odd = 0;   // X_2k+1 - b X_k - d
};

/// Residuals over k in T_{n-1}, in label order.
std::vector<Residual> residuals(const BinarTree& tree, const ThetaHat& theta, int n);

struct VarianceFit {
    Vec2 estimate;  // (sigma_a^2, sigma_c^2) or (sigma_b^2, sigma_d^2)
    Mat2 Q;
    bool regularized = false;
};

/// eta_hat = Q_{n-1}^{-1} sum (1/d_k) Vhat_2k^2 Phi_k with d_k = (1 + X_k)^2.
VarianceFit wls_eta(const BinarTree& tree, const ThetaHat& theta, int n);
/// Same with Vhat_2k+1^2.
VarianceFit wls_zeta(const BinarTree& tree, const ThetaHat& theta, int n);
/// (1/|T_{n-1}|) sum Vhat_2k Vhat_2k+1.
double rho_hat(const BinarTree& tree, const ThetaHat& theta, int n);

/// Raw WLS output; variance estimates are not clipped at zero.
struct VarianceEstimates {
    Vec2 eta;
    Vec2 zeta;
    double rho = 0;
    Mat2 Q;
    bool regularized = false;
};

/// eta, zeta and rho in a single pass over T_{n-1}.
VarianceEstimates estimate_variances(const BinarTree& tree, const ThetaHat& theta, int n);

struct EstimateSet {
    int generation = 0;
    std::uint64_t node_count = 0;  // |T_n|
    ThetaHat theta;
    VarianceEstimates variances;
};

EstimateSet estimate_all(const BinarTree& tree, int n);

/// <M>_n = sum_{k<n} L_k evaluated with the true moments, and <M>_n / |T_{n-1}|.
struct MartingaleDiagnostic {
    Mat4 increasing;
    Mat4 normalized;
    int generation = 0;
};

/// L_k for a single node value x.
Mat4 increasing_process_term(const DerivedMoments& m, std::int64_t x);

MartingaleDiagnostic increasing_process(const BinarTree& tree, const DerivedMoments& m, int n);

}  // namespace binar
