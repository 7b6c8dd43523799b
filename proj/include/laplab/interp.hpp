#pragma once

#include <algorithm>
#include <vector>

#include "laplab/common.hpp"

namespace laplab {

// Monotone piecewise-cubic interpolant (Fritsch-Carlson limited slopes).
// C1, shape preserving; used for tabulated potentials where overshoot would
// corrupt the assumption checks.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 2)
            throw std::invalid_argument("MonotoneCubic: need matching samples, two or more");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("MonotoneCubic: abscissae must increase");
        build();
    }

    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

    double eval(double x) const { return eval_impl(x, 0); }
    double deriv(double x) const { return eval_impl(x, 1); }
    double deriv2(double x) const { return eval_impl(x, 2); }

private:
    std::vector<double> x_, y_, m_; // node slopes

    void build() {
        std::size_t n = x_.size();
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            m_[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
        // Fritsch-Carlson limiter.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            double a = m_[i] / d[i], b = m_[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double t = 3.0 / std::sqrt(s);
                m_[i] = t * a * d[i];
                m_[i + 1] = t * b * d[i];
            }
        }
    }

    double eval_impl(double x, int order) const {
        if (x < x_.front() || x > x_.back())
            throw std::domain_error("MonotoneCubic: query outside tabulated range");
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = std::min<std::size_t>(std::size_t(it - x_.begin()), x_.size() - 1) - 1;
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double h00 = 2 * t * t * t - 3 * t * t + 1;
        double h10 = t * t * t - 2 * t * t + t;
        double h01 = -2 * t * t * t + 3 * t * t;
        double h11 = t * t * t - t * t;
        if (order == 0)
            return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
        double g00 = 6 * t * t - 6 * t, g10 = 3 * t * t - 4 * t + 1;
        double g01 = -6 * t * t + 6 * t, g11 = 3 * t * t - 2 * t;
        if (order == 1)
            return (g00 * y_[i] + g01 * y_[i + 1]) / h + g10 * m_[i] + g11 * m_[i + 1];
        double k00 = 12 * t - 6, k10 = 6 * t - 4, k01 = -12 * t + 6, k11 = 6 * t - 2;
        return (k00 * y_[i] + k01 * y_[i + 1]) / (h * h) + (k10 * m_[i] + k11 * m_[i + 1]) / h;
    }
};

// Fornberg's algorithm: weights of the finite-difference approximation to the
// m-th derivative at x0 from samples at arbitrary nodes xs. Exact for
// polynomials of degree xs.size()-1, so an n-point stencil reaches order
// n-m on smoothly graded grids.
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
    int n = int(xs.size());
    if (m < 0 || m >= n) throw std::invalid_argument("fd_weights: derivative order vs stencil");
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0;
        double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

// Applies an npt-point FD derivative of order m to complex samples on a grid,
// sliding the stencil inside the boundary.
inline std::vector<cplx> fd_derivative(const std::vector<double>& r, const std::vector<cplx>& u,
                                       int m, int npt) {
    if (r.size() != u.size()) throw std::invalid_argument("fd_derivative: size mismatch");
    int n = int(r.size());
    if (n < npt) throw std::invalid_argument("fd_derivative: grid shorter than stencil");
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) {
        int lo = std::clamp(i - npt / 2, 0, n - npt);
        std::vector<double> xs(r.begin() + lo, r.begin() + lo + npt);
        std::vector<double> w = fd_weights(r[i], xs, m);
        cplx acc = 0.0;
        for (int k = 0; k < npt; ++k) acc += w[k] * u[lo + k];
        out[i] = acc;
    }
    return out;
}

} // namespace laplab
