#include "binar/stats.hpp"

#include <algorithm>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "binar/errors.hpp"

namespace binar {

double frobenius(const DenseMatrix& m) {
    double s = 0.0;
    for (double x : m.data) s += x * x;
    return std::sqrt(s);
}

double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n != b.n) throw ValidationError("dimension mismatch in Frobenius comparison");
    DenseMatrix diff(a.n);
    for (std::size_t i = 0; i < a.data.size(); ++i) diff.data[i] = a.data[i] - b.data[i];
    return frobenius(diff) / frobenius(b);
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw InsufficientDataError("mean of an empty sample");
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw InsufficientDataError("variance needs at least two observations");
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

double median(std::span<const double> xs) {
    if (xs.empty()) throw InsufficientDataError("median of an empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DenseMatrix sample_covariance(const std::vector<std::vector<double>>& rows, std::size_t dim) {
    if (rows.size() < 2) throw InsufficientDataError("covariance needs at least two samples");
    std::vector<double> mu(dim, 0.0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) mu[i] += r[i];
    for (double& m : mu) m /= static_cast<double>(rows.size());
    DenseMatrix cov(dim);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) cov(i, j) += (r[i] - mu[i]) * (r[j] - mu[j]);
    for (double& c : cov.data) c /= static_cast<double>(rows.size() - 1);
    return cov;
}

bool is_symmetric_psd(const DenseMatrix& m) {
    const std::size_t n = m.n;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(m(i, i)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(scale, 1e-300)) return false;
    // Cholesky of m + eps I.
    const double eps = 1e-12 * std::max(scale, 1e-300);
    DenseMatrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j) + eps;
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < 0.0) return false;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = l(j, j) > 0.0 ? s / l(j, j) : 0.0;
        }
    }
    return true;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_standard_normal(std::span<const double> xs) {
    if (xs.empty()) throw InsufficientDataError("KS test on an empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double rn = std::sqrt(n);
    return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

double chi_square_survival(double statistic, int degrees_of_freedom) {
    if (degrees_of_freedom < 1) return 1.0;
    boost::math::chi_squared dist(degrees_of_freedom);
    return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

ChiSquareResult chi_square_two_sample(std::span<const std::int64_t> first, std::span<const std::int64_t> second,
                                      std::int64_t max_value, std::int64_t min_count) {
    if (first.empty() || second.empty()) throw InsufficientDataError("chi-square test needs two nonempty samples");
    const std::size_t bins = static_cast<std::size_t>(max_value) + 1;
    std::vector<double> h1(bins, 0.0), h2(bins, 0.0);
    auto bin_of = [&](std::int64_t v) { return static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, max_value)); };
    for (auto v : first) h1[bin_of(v)] += 1.0;
    for (auto v : second) h2[bin_of(v)] += 1.0;

    // Pool sparse bins from the top down.
    std::vector<std::pair<double, double>> pooled;
    double acc1 = 0.0, acc2 = 0.0;
    for (std::size_t i = bins; i-- > 0;) {
        acc1 += h1[i];
        acc2 += h2[i];
        if (acc1 + acc2 >= static_cast<double>(min_count)) {
            pooled.emplace_back(acc1, acc2);
            acc1 = acc2 = 0.0;
        }
    }
    if (acc1 + acc2 > 0.0) {
        if (pooled.empty())
            pooled.emplace_back(acc1, acc2);
        else {
            pooled.back().first += acc1;
            pooled.back().second += acc2;
        }
    }

    const double n1 = static_cast<double>(first.size());
    const double n2 = static_cast<double>(second.size());
    const double k1 = std::sqrt(n2 / n1);
    const double k2 = std::sqrt(n1 / n2);
    ChiSquareResult out;
    for (const auto& [a, b] : pooled) {
        const double diff = k1 * a - k2 * b;
        out.statistic += diff * diff / (a + b);
    }
    out.degrees_of_freedom = static_cast<int>(pooled.size()) - 1;
    out.p_value = chi_square_survival(out.statistic, out.degrees_of_freedom);
    return out;
}

}  // namespace binar
