#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace binar {

/// Fixed-size row-major square matrix. Only N = 2 and N = 4 are used.
template <std::size_t N>
struct Matrix {
    std::array<double, N * N> data{};

    static constexpr std::size_t size = N;

    constexpr double& operator()(std::size_t i, std::size_t j) { return data[i * N + j]; }
    constexpr double operator()(std::size_t i, std::size_t j) const { return data[i * N + j]; }

    static constexpr Matrix identity() {
        Matrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    static constexpr Matrix diagonal(const std::array<double, N>& d) {
        Matrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
        return m;
    }

    friend constexpr bool operator==(const Matrix&, const Matrix&) = default;
};

template <std::size_t N>
struct Vector {
    std::array<double, N> data{};

    constexpr double& operator[](std::size_t i) { return data[i]; }
    constexpr double operator[](std::size_t i) const { return data[i]; }

    friend constexpr bool operator==(const Vector&, const Vector&) = default;
};

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;
using Vec2 = Vector<2>;
using Vec4 = Vector<4>;

constexpr Mat2 make_mat2(double a11, double a12, double a21, double a22) {
    Mat2 m;
    m.data = {a11, a12, a21, a22};
    return m;
}

template <std::size_t N>
constexpr Matrix<N> operator+(const Matrix<N>& a, const Matrix<N>& b) {
    Matrix<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.data[i] = a.data[i] + b.data[i];
    return r;
}

template <std::size_t N>
constexpr Matrix<N> operator-(const Matrix<N>& a, const Matrix<N>& b) {
    Matrix<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.data[i] = a.data[i] - b.data[i];
    return r;
}

template <std::size_t N>
constexpr Matrix<N> operator*(double s, const Matrix<N>& a) {
    Matrix<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.data[i] = s * a.data[i];
    return r;
}

template <std::size_t N>
constexpr Matrix<N> operator*(const Matrix<N>& a, const Matrix<N>& b) {
    Matrix<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t j = 0; j < N; ++j) r(i, j) += a(i, k) * b(k, j);
    return r;
}

template <std::size_t N>
constexpr Vector<N> operator*(const Matrix<N>& a, const Vector<N>& v) {
    Vector<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) r[i] += a(i, j) * v[j];
    return r;
}

template <std::size_t N>
constexpr Vector<N> operator-(const Vector<N>& a, const Vector<N>& b) {
    Vector<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
constexpr Matrix<N> transpose(const Matrix<N>& a) {
    Matrix<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) r(j, i) = a(i, j);
    return r;
}

template <std::size_t N>
constexpr double trace(const Matrix<N>& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < N; ++i) t += a(i, i);
    return t;
}

template <std::size_t N>
constexpr double dot(const Vector<N>& a, const Vector<N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

/// Maximum absolute row sum.
template <std::size_t N>
double norm_inf(const Matrix<N>& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < N; ++j) row += std::abs(a(i, j));
        best = std::max(best, row);
    }
    return best;
}

template <std::size_t N>
double norm_inf(const Vector<N>& v) {
    double best = 0.0;
    for (double x : v.data) best = std::max(best, std::abs(x));
    return best;
}

template <std::size_t N>
double norm_frobenius(const Matrix<N>& a) {
    double s = 0.0;
    for (double x : a.data) s += x * x;
    return std::sqrt(s);
}

template <std::size_t N>
bool is_finite(const Matrix<N>& a) {
    for (double x : a.data)
        if (!std::isfinite(x)) return false;
    return true;
}

/// True when ||M - M^t||_inf <= 1e-12 * ||M||_inf.
template <std::size_t N>
bool is_symmetric(const Matrix<N>& a) {
    return norm_inf(a - transpose(a)) <= 1e-12 * norm_inf(a);
}

/// Relative conditioning floor used for every "is this invertible" decision.
inline constexpr double kConditioningFloor = 1e-12;

Mat4 kron2(const Mat2& a, const Mat2& b);

double determinant(const Mat2& m);

/// Throws SingularMatrixError when |det| <= kConditioningFloor * ||M||_inf^2.
Mat2 inverse(const Mat2& m);
Vec2 solve(const Mat2& m, const Vec2& v);

/// Gauss-Jordan with partial pivoting; singular when a pivot falls below
/// kConditioningFloor * ||M||_inf.
Mat4 inverse(const Mat4& m);
Vec4 solve(const Mat4& m, const Vec4& v);

bool is_invertible(const Mat2& m);

/// Leading principal minors.
bool is_positive_definite(const Mat2& m);
/// Cholesky attempt.
bool is_positive_definite(const Mat4& m);

struct Regularized {
    Mat2 matrix;
    bool regularized = false;
};

/// Returns S unchanged when invertible at the conditioning floor, else S + I.
Regularized regularize_if_singular(const Mat2& s);

/// Eigen-decomposition of a symmetric 2x2 matrix.
struct SymEigen2 {
    std::array<double, 2> values{};
    Mat2 vectors;  // columns are eigenvectors
};

SymEigen2 eigen_symmetric(const Mat2& m);

/// Principal square root and inverse square root of a symmetric PD matrix.
/// Throw PositiveDefiniteError otherwise.
Mat2 sqrt_spd(const Mat2& m);
Mat2 inv_sqrt_spd(const Mat2& m);

/// I_2 (x) M.
inline Mat4 block_diag2(const Mat2& m) { return kron2(Mat2::identity(), m); }

}  // namespace binar
