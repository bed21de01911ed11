#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

namespace wqf {

// Dense square d x d real matrix, row-major. Sized at runtime; d stays small
// (target d <= 8), so everything is plain loops without blocking.
class Mat {
public:
    Mat() = default;
    explicit Mat(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}
    Mat(std::size_t dim, std::vector<double> entries);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
    const std::vector<double>& data() const { return a_; }
    double* raw() { return a_.data(); }
    const double* raw() const { return a_.data(); }

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);
    bool all_finite() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(Mat a, double s);

Mat transpose(const Mat& m);
Mat sym_part(const Mat& m);
Mat antisym_part(const Mat& m);
double trace(const Mat& m);
double frob_norm(const Mat& m);
double max_abs_entry(const Mat& m);

// Determinant by LU with partial pivoting; returns 0 for singular input.
double det(const Mat& m);

// Gauss-Jordan with partial pivoting. Throws Error(singular) when |det| < 1e-300
// or a pivot falls below 1e-14 * max-entry of the input.
Mat inverse(const Mat& m);

// Lower Cholesky factor, or nullopt when the matrix is not symmetric positive
// definite (within a small symmetry slack).
std::optional<Mat> cholesky_lower(const Mat& m);

// Upper bound for K0 = sup{ |M^-1| : |M - I_d| < 1/2 } in the Frobenius norm,
// via the Neumann series: |M^-1| <= sqrt(d) + sum_{n>=1} (1/2)^n = sqrt(d) + 1.
double k0_bound(std::size_t d);

// R^d vectors are plain std::vector<double>; just enough helpers for paths.
using Vec = std::vector<double>;

Vec mat_vec(const Mat& m, const Vec& v);
double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& v);

// Solves m x = b through a prefactored Cholesky lower factor.
Vec cholesky_solve(const Mat& lower, const Vec& b);

} // namespace wqf
