#include "wqf/mat.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "wqf/errors.hpp"

namespace wqf {

namespace {

constexpr double kDetFloor = 1e-300;
constexpr double kPivotRel = 1e-14;

} // namespace

Mat::Mat(std::size_t dim, std::vector<double> entries) : dim_(dim), a_(std::move(entries)) {
    if (dim_ == 0 || a_.size() != dim_ * dim_)
        fail(ErrorCode::spec_error, "Mat: entry count does not match dim^2");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) : dim_(rows.size()) {
    a_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
        if (row.size() != dim_)
            fail(ErrorCode::spec_error, "Mat: ragged initializer");
        for (double v : row)
            a_.push_back(v);
    }
}

Mat Mat::identity(std::size_t dim) {
    Mat m(dim);
    for (std::size_t i = 0; i < dim; ++i)
        m(i, i) = 1.0;
    return m;
}

Mat& Mat::operator+=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k)
        a_[k] += o.a_[k];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k)
        a_[k] -= o.a_[k];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : a_)
        v *= s;
    return *this;
}

bool Mat::all_finite() const {
    for (double v : a_)
        if (!std::isfinite(v))
            return false;
    return true;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }

Mat operator*(const Mat& a, const Mat& b) {
    const std::size_t d = a.dim();
    Mat c(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < d; ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

Mat operator*(double s, Mat a) { return a *= s; }
Mat operator*(Mat a, double s) { return a *= s; }

Mat transpose(const Mat& m) {
    const std::size_t d = m.dim();
    Mat t(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            t(j, i) = m(i, j);
    return t;
}

Mat sym_part(const Mat& m) {
    const std::size_t d = m.dim();
    Mat s(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

Mat antisym_part(const Mat& m) {
    const std::size_t d = m.dim();
    Mat s(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            s(i, j) = 0.5 * (m(i, j) - m(j, i));
    return s;
}

double trace(const Mat& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        t += m(i, i);
    return t;
}

double frob_norm(const Mat& m) {
    double s = 0.0;
    for (double v : m.data())
        s += v * v;
    return std::sqrt(s);
}

double max_abs_entry(const Mat& m) {
    double s = 0.0;
    for (double v : m.data())
        s = std::max(s, std::abs(v));
    return s;
}

double det(const Mat& m) {
    const std::size_t d = m.dim();
    Mat lu = m;
    double sign = 1.0;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(lu(r, col)) > std::abs(lu(piv, col)))
                piv = r;
        if (lu(piv, col) == 0.0)
            return 0.0;
        if (piv != col) {
            for (std::size_t j = 0; j < d; ++j)
                std::swap(lu(piv, j), lu(col, j));
            sign = -sign;
        }
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = lu(r, col) / lu(col, col);
            lu(r, col) = 0.0;
            for (std::size_t j = col + 1; j < d; ++j)
                lu(r, j) -= f * lu(col, j);
        }
    }
    double p = sign;
    for (std::size_t i = 0; i < d; ++i)
        p *= lu(i, i);
    return p;
}

Mat inverse(const Mat& m) {
    const std::size_t d = m.dim();
    const double scale = max_abs_entry(m);
    const double pivot_floor = kPivotRel * scale;
    Mat work = m;
    Mat inv = Mat::identity(d);
    double det_acc = 1.0;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(work(r, col)) > std::abs(work(piv, col)))
                piv = r;
        const double pv = work(piv, col);
        if (std::abs(pv) <= pivot_floor)
            fail(ErrorCode::singular, "inverse: pivot below tolerance");
        if (piv != col) {
            for (std::size_t j = 0; j < d; ++j) {
                std::swap(work(piv, j), work(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
            det_acc = -det_acc;
        }
        det_acc *= work(col, col);
        const double inv_pv = 1.0 / work(col, col);
        for (std::size_t j = 0; j < d; ++j) {
            work(col, j) *= inv_pv;
            inv(col, j) *= inv_pv;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col)
                continue;
            const double f = work(r, col);
            if (f == 0.0)
                continue;
            for (std::size_t j = 0; j < d; ++j) {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    if (std::abs(det_acc) < kDetFloor)
        fail(ErrorCode::singular, "inverse: |det| below 1e-300");
    return inv;
}

std::optional<Mat> cholesky_lower(const Mat& m) {
    const std::size_t d = m.dim();
    const double sym_tol = 1e-10 * (1.0 + max_abs_entry(m));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > sym_tol)
                return std::nullopt;
    Mat L(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s <= 0.0)
                    return std::nullopt;
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return L;
}

double k0_bound(std::size_t d) { return std::sqrt(static_cast<double>(d)) + 1.0; }

Vec mat_vec(const Mat& m, const Vec& v) {
    const std::size_t d = m.dim();
    Vec out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm_sq(const Vec& v) { return dot(v, v); }

Vec cholesky_solve(const Mat& lower, const Vec& b) {
    const std::size_t d = lower.dim();
    Vec y(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= lower(i, k) * y[k];
        y[i] = s / lower(i, i);
    }
    Vec x(d);
    for (std::size_t ii = d; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < d; ++k)
            s -= lower(k, ii) * x[k];
        x[ii] = s / lower(ii, ii);
    }
    return x;
}

} // namespace wqf
