#include "binar/linalg.hpp"

#include <algorithm>
#include <utility>

#include "binar/errors.hpp"

namespace binar {

Mat4 kron2(const Mat2& a, const Mat2& b) {
    Mat4 r;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return r;
}

double determinant(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

bool is_invertible(const Mat2& m) {
    const double scale = norm_inf(m);
    return std::abs(determinant(m)) > kConditioningFloor * scale * scale;
}

Mat2 inverse(const Mat2& m) {
    const double det = determinant(m);
    if (!is_invertible(m)) throw SingularMatrixError("2x2 matrix is singular", std::abs(det));
    return make_mat2(m(1, 1) / det, -m(0, 1) / det, -m(1, 0) / det, m(0, 0) / det);
}

Vec2 solve(const Mat2& m, const Vec2& v) {
    const double det = determinant(m);
    if (!is_invertible(m)) throw SingularMatrixError("2x2 system is singular", std::abs(det));
    // Cramer's rule.
    return Vec2{{(v[0] * m(1, 1) - m(0, 1) * v[1]) / det, (m(0, 0) * v[1] - v[0] * m(1, 0)) / det}};
}

namespace {

// Reduces [m | rhs] in place; rhs has `cols` columns stored row-major.
template <std::size_t Cols>
void gauss_jordan(Mat4 m, std::array<double, 4 * Cols>& rhs) {
    const double floor = kConditioningFloor * norm_inf(m);
    double det = 1.0;
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 4; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        det *= m(pivot, col);
        if (std::abs(m(pivot, col)) <= floor)
            throw SingularMatrixError("4x4 matrix is singular", std::abs(det));
        if (pivot != col) {
            for (std::size_t j = 0; j < 4; ++j) std::swap(m(pivot, j), m(col, j));
            for (std::size_t j = 0; j < Cols; ++j) std::swap(rhs[pivot * Cols + j], rhs[col * Cols + j]);
        }
        const double inv_p = 1.0 / m(col, col);
        for (std::size_t j = 0; j < 4; ++j) m(col, j) *= inv_p;
        for (std::size_t j = 0; j < Cols; ++j) rhs[col * Cols + j] *= inv_p;
        for (std::size_t r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < 4; ++j) m(r, j) -= f * m(col, j);
            for (std::size_t j = 0; j < Cols; ++j) rhs[r * Cols + j] -= f * rhs[col * Cols + j];
        }
    }
}

}  // namespace

Mat4 inverse(const Mat4& m) {
    Mat4 id = Mat4::identity();
    gauss_jordan<4>(m, id.data);
    return id;
}

Vec4 solve(const Mat4& m, const Vec4& v) {
    Vec4 r = v;
    gauss_jordan<1>(m, r.data);
    return r;
}

bool is_positive_definite(const Mat2& m) {
    if (!is_finite(m)) return false;
    const double scale = norm_inf(m);
    return m(0, 0) > 0.0 && determinant(m) > kConditioningFloor * scale * scale;
}

bool is_positive_definite(const Mat4& m) {
    if (!is_finite(m)) return false;
    const double floor = kConditioningFloor * norm_inf(m);
    Mat4 l;
    for (std::size_t j = 0; j < 4; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= floor) return false;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < 4; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

Regularized regularize_if_singular(const Mat2& s) {
    if (is_invertible(s)) return {s, false};
    return {s + Mat2::identity(), true};
}

SymEigen2 eigen_symmetric(const Mat2& m) {
    const double a = m(0, 0);
    const double d = m(1, 1);
    const double b = 0.5 * (m(0, 1) + m(1, 0));
    SymEigen2 out;
    if (b == 0.0) {
        out.values = {a, d};
        out.vectors = Mat2::identity();
        return out;
    }
    const double half_tr = 0.5 * (a + d);
    const double disc = std::hypot(0.5 * (a - d), b);
    out.values = {half_tr + disc, half_tr - disc};
    // Jacobi rotation angle diagonalising m.
    const double theta = 0.5 * std::atan2(2.0 * b, a - d);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out.vectors = make_mat2(c, -s, s, c);
    return out;
}

namespace {

Mat2 spectral_apply(const Mat2& m, double (*f)(double)) {
    const SymEigen2 e = eigen_symmetric(m);
    const double scale = std::max(std::abs(e.values[0]), std::abs(e.values[1]));
    if (!(e.values[0] > kConditioningFloor * scale && e.values[1] > kConditioningFloor * scale))
        throw PositiveDefiniteError("matrix is not positive definite");
    const Mat2& v = e.vectors;
    const Mat2 fd = Mat2::diagonal({f(e.values[0]), f(e.values[1])});
    return v * fd * transpose(v);
}

}  // namespace

Mat2 sqrt_spd(const Mat2& m) {
    return spectral_apply(m, [](double x) { return std::sqrt(x); });
}

Mat2 inv_sqrt_spd(const Mat2& m) {
    return spectral_apply(m, [](double x) { return 1.0 / std::sqrt(x); });
}

}  // namespace binar
