#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "laplab/common.hpp"

namespace laplab {

// State of one directional sweep of the reduced radial equation: the wave u,
// its derivative v, and a running source integral I, stored renormalized.
// sigma is the log of the positive factor taken out, so the physical values
// are (u, v, I) * exp(sigma). Carrying the offset instead of the factor keeps
// sweeps with thousands of e-folds of growth inside double range.
struct ModeState {
    cplx u{};
    cplx v{};
    cplx I{};
    double sigma = 0.0;

    // Pulls the magnitude out into sigma when the components leave a safe
    // band. Returns the factor divided out (1.0 when nothing happened).
    double renormalize() {
        double m = std::max({std::abs(u), std::abs(v), std::abs(I)});
        if (m > 1e120 || (m > 0.0 && m < 1e-120)) {
            u /= m;
            v /= m;
            I /= m;
            sigma += std::log(m);
            return m;
        }
        return 1.0;
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b(5th) - b(4th), for the embedded error estimate
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
    static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
    static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
    static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
    static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
    static constexpr double e7 = -1.0 / 40;
};

} // namespace detail

// Integrates y' = f(r, y) for the 3-component complex state from a to b
// (either direction), with embedded 4th/5th-order error control against rtol.
// f has signature f(double r, const std::array<cplx,3>& y, std::array<cplx,3>&
// dy) and must be linear homogeneous in y, which holds for the mode equation
// with a co-scaled source integral; renormalization relies on it.
template <class F>
ModeState integrate_span(const F& f, double a, double b, ModeState y0, double rtol) {
    using A3 = std::array<cplx, 3>;
    using T = detail::Dopri5;
    if (a == b) return y0;
    ModeState s = y0;
    double r = a;
    const double span = b - a;
    double h = span; // error control cuts this down as needed
    std::size_t steps = 0;

    A3 y{s.u, s.v, s.I};
    A3 k1, k2, k3, k4, k5, k6, k7, yt, y5;
    f(r, y, k1);

    while (r != b) {
        if ((span > 0.0) ? (r + h > b) : (r + h < b)) h = b - r;
        if (++steps > 1000000)
            throw numerical_error("integrate_span: step budget exhausted");

        for (int j = 0; j < 3; ++j) yt[j] = y[j] + h * (T::a21 * k1[j]);
        f(r + T::c2 * h, yt, k2);
        for (int j = 0; j < 3; ++j) yt[j] = y[j] + h * (T::a31 * k1[j] + T::a32 * k2[j]);
        f(r + T::c3 * h, yt, k3);
        for (int j = 0; j < 3; ++j)
            yt[j] = y[j] + h * (T::a41 * k1[j] + T::a42 * k2[j] + T::a43 * k3[j]);
        f(r + T::c4 * h, yt, k4);
        for (int j = 0; j < 3; ++j)
            yt[j] = y[j] +
                    h * (T::a51 * k1[j] + T::a52 * k2[j] + T::a53 * k3[j] + T::a54 * k4[j]);
        f(r + T::c5 * h, yt, k5);
        for (int j = 0; j < 3; ++j)
            yt[j] = y[j] + h * (T::a61 * k1[j] + T::a62 * k2[j] + T::a63 * k3[j] +
                                T::a64 * k4[j] + T::a65 * k5[j]);
        f(r + h, yt, k6);
        for (int j = 0; j < 3; ++j)
            y5[j] = y[j] + h * (T::b1 * k1[j] + T::b3 * k3[j] + T::b4 * k4[j] + T::b5 * k5[j] +
                                T::b6 * k6[j]);
        f(r + h, y5, k7);

        double err = 0.0, mag = 0.0;
        for (int j = 0; j < 3; ++j)
            mag = std::max({mag, std::abs(y[j]), std::abs(y5[j])});
        for (int j = 0; j < 3; ++j) {
            cplx e = h * (T::e1 * k1[j] + T::e3 * k3[j] + T::e4 * k4[j] + T::e5 * k5[j] +
                          T::e6 * k6[j] + T::e7 * k7[j]);
            double sc = std::abs(y[j]) + std::abs(y5[j]) + 0.01 * mag + 1e-300;
            err = std::max(err, std::abs(e) / sc);
        }

        if (err <= rtol) {
            r += h;
            if (std::abs(b - r) < 1e-12 * std::abs(span)) r = b;
            s.u = y5[0];
            s.v = y5[1];
            s.I = y5[2];
            double m = s.renormalize();
            y = {s.u, s.v, s.I};
            k1 = k7; // first-same-as-last
            if (m != 1.0)
                for (auto& k : k1) k /= m;
        }
        double grow = (err > 0.0) ? 0.9 * std::pow(rtol / err, 0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (std::abs(h) < 1e-14 * std::abs(span))
            throw numerical_error("integrate_span: step size underflow");
    }
    s.u = y[0];
    s.v = y[1];
    s.I = y[2];
    return s;
}

} // namespace laplab
