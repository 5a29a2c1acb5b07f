#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace binar {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Square dense matrix for results whose dimension is only known at run time.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t dim) : n(dim), data(dim * dim, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

double frobenius(const DenseMatrix& m);
/// ||a - b||_F / ||b||_F.
double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b);

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double sample_variance(std::span<const double> xs);
/// Median; the input is copied.
double median(std::span<const double> xs);

/// Sample covariance of row vectors (rows = samples, each of length dim).
DenseMatrix sample_covariance(const std::vector<std::vector<double>>& rows, std::size_t dim);

/// Symmetric PSD check through a Cholesky attempt with a small jitter floor.
bool is_symmetric_psd(const DenseMatrix& m);

double normal_cdf(double x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1). The p-value uses the
/// asymptotic Kolmogorov law with Stephens' small-sample correction.
KsResult ks_test_standard_normal(std::span<const double> xs);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct ChiSquareResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 0.0;
};

/// Two-sample chi-square homogeneity test on integer samples binned over
/// 0 .. max_value (values above max_value share the last bin). Adjacent
/// sparse bins are pooled from the top until every bin holds at least
/// `min_count` observations.
ChiSquareResult chi_square_two_sample(std::span<const std::int64_t> first, std::span<const std::int64_t> second,
                                      std::int64_t max_value, std::int64_t min_count = 10);

double chi_square_survival(double statistic, int degrees_of_freedom);

}  // namespace binar
