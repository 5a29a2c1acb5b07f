#include "binar/limits.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "binar/errors.hpp"
#include "binar/estimators.hpp"
#include "binar/parallel.hpp"

namespace binar {

double mean_T(const DerivedMoments& m) { return m.c_bar / (1.0 - m.a_bar); }

double second_moment_T(const DerivedMoments& m) {
    const double ab = m.a_bar;
    return m.upsilon * m.c_bar / (1.0 - ab) + (m.c2_bar - m.upsilon * m.c_bar) / (1.0 - m.a2_bar) +
           2.0 * ab * m.c_bar * m.c_bar / ((1.0 - ab) * (1.0 - ab * ab));
}

double sigma_rho_sq(const DerivedMoments& m) {
    return m.sigma_a2 * m.sigma_b2 * second_moment_T(m) +
           (m.sigma_a2 * m.sigma_d2 + m.sigma_b2 * m.sigma_c2) * mean_T(m) + m.nu2 - m.rho * m.rho;
}

namespace {

// Layout of the integrand vector f(T).
constexpr std::size_t kT = 0, kT2 = 1, kOnePlusT2 = 2, kA = 3, kB = 7, kL = 11, kMac = 27, kMbd = 31, kCount = 35;

using Integrands = std::array<double, kCount>;

Integrands integrands(const DerivedMoments& m, std::int64_t ti) {
    const double t = static_cast<double>(ti);
    const double u = 1.0 + t;
    const Mat2 design = make_mat2(t * t, t, t, 1.0);
    Integrands f{};
    f[kT] = t;
    f[kT2] = t * t;
    f[kOnePlusT2] = u * u;
    for (std::size_t i = 0; i < 4; ++i) {
        f[kA + i] = design.data[i] / u;
        f[kB + i] = design.data[i] / (u * u);
    }
    const Mat4 l = increasing_process_term(m, ti);
    for (std::size_t i = 0; i < 16; ++i) f[kL + i] = l.data[i];
    const double sa4 = m.sigma_a2 * m.sigma_a2;
    const double sb4 = m.sigma_b2 * m.sigma_b2;
    const double wac = (2.0 * sa4 * t * t + (m.mu_a4 - 3.0 * sa4 + 4.0 * m.sigma_a2 * m.sigma_c2) * t + m.mu_c4 -
                        m.sigma_c2 * m.sigma_c2) /
                       (u * u * u * u);
    const double wbd = (2.0 * sb4 * t * t + (m.mu_b4 - 3.0 * sb4 + 4.0 * m.sigma_b2 * m.sigma_d2) * t + m.mu_d4 -
                        m.sigma_d2 * m.sigma_d2) /
                       (u * u * u * u);
    for (std::size_t i = 0; i < 4; ++i) {
        f[kMac + i] = wac * design.data[i];
        f[kMbd + i] = wbd * design.data[i];
    }
    return f;
}

using Histogram = std::map<std::int64_t, std::uint64_t>;

struct Moments {
    Integrands mean{};
    Integrands se{};
    std::uint64_t samples = 0;
};

Integrands histogram_mean(const Histogram& h, const DerivedMoments& m, std::uint64_t& total) {
    total = 0;
    for (const auto& [t, n] : h) total += n;
    if (total == 0) throw InsufficientDataError("no samples to average");
    Integrands mean{};
    for (const auto& [t, n] : h) {
        const Integrands f = integrands(m, t);
        for (std::size_t i = 0; i < kCount; ++i) mean[i] += static_cast<double>(n) * f[i];
    }
    for (double& x : mean) x /= static_cast<double>(total);
    return mean;
}

Moments iid_moments(const Histogram& h, const DerivedMoments& m) {
    Moments out;
    out.mean = histogram_mean(h, m, out.samples);
    if (out.samples < 2) return out;
    Integrands ss{};
    for (const auto& [t, n] : h) {
        const Integrands f = integrands(m, t);
        for (std::size_t i = 0; i < kCount; ++i) {
            const double dev = f[i] - out.mean[i];
            ss[i] += static_cast<double>(n) * dev * dev;
        }
    }
    const double r = static_cast<double>(out.samples);
    for (std::size_t i = 0; i < kCount; ++i) out.se[i] = std::sqrt(ss[i] / (r - 1.0) / r);
    return out;
}

template <std::size_t N>
MatrixEstimate<N> extract(const Moments& mo, std::size_t offset) {
    MatrixEstimate<N> e;
    for (std::size_t i = 0; i < N * N; ++i) {
        e.value.data[i] = mo.mean[offset + i];
        e.se.data[i] = mo.se[offset + i];
    }
    return e;
}

LimitObjects assemble(const Moments& mo, const DerivedMoments& m, std::string route) {
    LimitObjects o;
    o.route = std::move(route);
    o.samples = mo.samples;
    o.mean_T = {mo.mean[kT], mo.se[kT]};
    o.second_moment_T = {mo.mean[kT2], mo.se[kT2]};
    o.mean_one_plus_T_sq = {mo.mean[kOnePlusT2], mo.se[kOnePlusT2]};
    o.mean_T_closed = mean_T(m);
    o.second_moment_T_closed = second_moment_T(m);
    o.sigma_rho_sq = sigma_rho_sq(m);
    o.A = extract<2>(mo, kA);
    o.B = extract<2>(mo, kB);
    o.L = extract<4>(mo, kL);
    o.M_ac = extract<2>(mo, kMac);
    o.M_bd = extract<2>(mo, kMbd);
    return o;
}

}  // namespace

LimitObjects limit_objects_from_counts(const std::map<std::int64_t, std::uint64_t>& counts,
                                       const DerivedMoments& m) {
    return assemble(iid_moments(counts, m), m, "monte-carlo");
}

namespace {

template <std::size_t N>
void require_pd(const Matrix<N>& m, const char* name) {
    if (!is_positive_definite(m)) throw PositiveDefiniteError(std::string("limit matrix ") + name + " is not positive definite");
}

}  // namespace

void require_positive_definite(const LimitObjects& objs) {
    require_pd(objs.A.value, "A");
    require_pd(objs.B.value, "B");
    require_pd(objs.L.value, "L");
}

LimitObjects limit_matrices_mc(const ModelParams& params, std::uint64_t draws, const RngStream& rng,
                               double tail_tol) {
    if (draws < kMinLimitDraws)
        throw InsufficientDataError("Monte Carlo limit estimation needs at least " + std::to_string(kMinLimitDraws) +
                                    " draws");
    const DerivedMoments m = derive_moments(params);
    const LimitVariableSampler sampler(params, tail_tol);

    // Fixed block layout; histograms merge exactly, so the result does not
    // depend on the number of workers.
    constexpr std::uint64_t kBlock = 1 << 14;
    const std::uint64_t blocks = (draws + kBlock - 1) / kBlock;
    std::vector<Histogram> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(draws, lo + kBlock);
        Histogram& h = partial[b];
        for (std::uint64_t i = lo; i < hi; ++i) {
            RngStream draw = rng.derive(i);
            ++h[sampler(draw)];
        }
    });
    Histogram total;
    for (const auto& h : partial)
        for (const auto& [t, n] : h) total[t] += n;

    LimitObjects objs = assemble(iid_moments(total, m), m, "monte-carlo");
    require_positive_definite(objs);
    return objs;
}

LimitObjects limit_matrices_tree(const BinarTree& tree, const DerivedMoments& m, int batch_generation) {
    const int depth = tree.depth();
    if (batch_generation < 0) batch_generation = std::min(6, depth / 2);
    if (batch_generation > depth) throw OutOfRangeError("batch generation deeper than the tree");

    Histogram all;
    for (std::int64_t x : tree.labelled()) ++all[x];
    Moments mo;
    mo.mean = histogram_mean(all, m, mo.samples);

    // Batch means over the subtrees rooted at G_batch_generation.
    const std::uint64_t batches = generation_size(batch_generation);
    if (batches >= 2) {
        std::vector<Integrands> batch_means(batches);
        for (std::uint64_t j = 0; j < batches; ++j) {
            Histogram h;
            const std::uint64_t root = batches + j;
            for (int r = batch_generation; r <= depth; ++r) {
                const int down = r - batch_generation;
                const std::uint64_t first = root << down;
                const std::uint64_t width = std::uint64_t{1} << down;
                for (std::uint64_t k = first; k < first + width; ++k) ++h[tree[k]];
            }
            std::uint64_t n = 0;
            batch_means[j] = histogram_mean(h, m, n);
        }
        const double nb = static_cast<double>(batches);
        for (std::size_t i = 0; i < kCount; ++i) {
            double bm = 0.0;
            for (const auto& v : batch_means) bm += v[i];
            bm /= nb;
            double ss = 0.0;
            for (const auto& v : batch_means) ss += (v[i] - bm) * (v[i] - bm);
            mo.se[i] = std::sqrt(ss / (nb - 1.0) / nb);
        }
    }
    return assemble(mo, m, "tree");
}

Mat4 lambda_matrix(const LimitObjects& objs) { return block_diag2(objs.A.value); }

Mat4 theta_clt_cov(const LimitObjects& objs) {
    require_pd(objs.A.value, "A");
    require_pd(objs.L.value, "L");
    const Mat4 a_inv = block_diag2(inverse(objs.A.value));
    return a_inv * objs.L.value * a_inv;
}

Mat2 eta_clt_cov(const LimitObjects& objs) {
    require_pd(objs.B.value, "B");
    const Mat2 b_inv = inverse(objs.B.value);
    return b_inv * objs.M_ac.value * b_inv;
}

Mat2 zeta_clt_cov(const LimitObjects& objs) {
    require_pd(objs.B.value, "B");
    const Mat2 b_inv = inverse(objs.B.value);
    return b_inv * objs.M_bd.value * b_inv;
}

double qsl_target(const LimitObjects& objs) {
    require_pd(objs.A.value, "A");
    require_pd(objs.L.value, "L");
    const Mat4 half = block_diag2(inv_sqrt_spd(objs.A.value));
    return trace(half * objs.L.value * half);
}

double qsl_target_via_inverse(const LimitObjects& objs) {
    require_pd(objs.A.value, "A");
    require_pd(objs.L.value, "L");
    return trace(inverse(lambda_matrix(objs)) * objs.L.value);
}

}  // namespace binar
