#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "binar/linalg.hpp"
#include "binar/model.hpp"
#include "binar/rng.hpp"
#include "binar/tree.hpp"

namespace binar {

/// E[T] = c_bar / (1 - a_bar).
double mean_T(const DerivedMoments& m);

/// E[T^2] = Y c_bar/(1 - a_bar) + (c2_bar - Y c_bar)/(1 - a2_bar)
///          + 2 a_bar c_bar^2 / ((1 - a_bar)(1 - a_bar^2)),  Y = upsilon.
/// The last denominator squares a_bar itself, not a2_bar. The expression
/// treats the series terms of T as uncorrelated, which is exact when both
/// offspring laws have the same mean (a = b); otherwise it is an
/// approximation.
double second_moment_T(const DerivedMoments& m);

/// sigma_rho^2 = sigma_a^2 sigma_b^2 E[T^2] + (sigma_a^2 sigma_d^2 + sigma_b^2 sigma_c^2) E[T]
///               + nu^2 - rho^2, with both T moments in closed form.
double sigma_rho_sq(const DerivedMoments& m);

template <std::size_t N>
struct MatrixEstimate {
    Matrix<N> value;
    Matrix<N> se;  // per-entry standard error
};

struct ScalarEstimate {
    double value = 0;
    double se = 0;
};

/// Limit objects of the estimators: expectations of functions of the limit
/// variable T, estimated either from draws of T or from a tree average,
/// alongside the closed-form scalars.
struct LimitObjects {
    std::string route;  // "monte-carlo" or "tree"
    std::uint64_t samples = 0;

    ScalarEstimate mean_T;
    ScalarEstimate second_moment_T;
    ScalarEstimate mean_one_plus_T_sq;  // E[(1 + T)^2]

    double mean_T_closed = 0;
    double second_moment_T_closed = 0;
    double sigma_rho_sq = 0;

    MatrixEstimate<2> A;     // E[(1/(1+T)) [[T^2, T], [T, 1]]]
    MatrixEstimate<2> B;     // E[(1/(1+T)^2) [[T^2, T], [T, 1]]]
    MatrixEstimate<4> L;     // E[(1/(1+T)^2) [[sa T + sc, rho], [rho, sb T + sd]] (x) [[T^2, T], [T, 1]]]
    MatrixEstimate<2> M_ac;  // E[(2sa^4 T^2 + (mu_a - 3sa^4 + 4 sa sc) T + mu_c - sc^4)/(1+T)^4 [[T^2, T], [T, 1]]]
    MatrixEstimate<2> M_bd;
};

inline constexpr std::uint64_t kMinLimitDraws = 10000;

/// Monte Carlo route: R draws of T (draw i uses rng.derive(i)). Throws
/// PositiveDefiniteError when A, B or L is not positive definite, which
/// happens for degenerate T (for instance zero immigration).
LimitObjects limit_matrices_mc(const ModelParams& params, std::uint64_t draws, const RngStream& rng,
                               double tail_tol = 1e-8);

/// Tree-average route: E[f(T)] replaced by (1/|T_n|) sum_{k in T_n} f(X_k).
/// Standard errors come from batch means over the subtrees rooted at
/// generation batch_generation (default: min(6, depth / 2)).
LimitObjects limit_matrices_tree(const BinarTree& tree, const DerivedMoments& m, int batch_generation = -1);

/// Histogram route shared by both estimators, exposed for tests: `counts`
/// maps a value of T to its multiplicity.
LimitObjects limit_objects_from_counts(const std::map<std::int64_t, std::uint64_t>& counts,
                                       const DerivedMoments& m);

/// Lambda = I_2 (x) A.
Mat4 lambda_matrix(const LimitObjects& objs);

/// (I_2 (x) A^-1) L (I_2 (x) A^-1).
Mat4 theta_clt_cov(const LimitObjects& objs);
/// B^-1 M_ac B^-1 and B^-1 M_bd B^-1.
Mat2 eta_clt_cov(const LimitObjects& objs);
Mat2 zeta_clt_cov(const LimitObjects& objs);

/// tr(Lambda^{-1/2} L Lambda^{-1/2}), with Lambda^{-1/2} = I_2 (x) A^{-1/2}.
double qsl_target(const LimitObjects& objs);
/// tr(Lambda^{-1} L); equal to qsl_target by trace cyclicity.
double qsl_target_via_inverse(const LimitObjects& objs);

/// Throws PositiveDefiniteError unless A, B and L are positive definite.
void require_positive_definite(const LimitObjects& objs);

}  // namespace binar
