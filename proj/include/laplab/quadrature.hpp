#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "laplab/common.hpp"

namespace laplab {

// Gauss-Kronrod 7-15 pair on [-1, 1]. Abscissae/weights from the usual
// tables; the embedded Gauss rule supplies the error estimate.
namespace gk {

inline constexpr std::array<double, 8> xk = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};

inline constexpr std::array<double, 8> wk = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};

inline constexpr std::array<double, 4> wg = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

} // namespace gk

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
PanelResult gk15_panel(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 7; ++j) {
        double fv1 = f(c - h * gk::xk[j]);
        double fv2 = f(c + h * gk::xk[j]);
        resk += gk::wk[j] * (fv1 + fv2);
        if (j % 2 == 1) resg += gk::wg[j / 2] * (fv1 + fv2);
    }
    double fc = f(c);
    resk += gk::wk[7] * fc;
    resg += gk::wg[3] * fc;
    PanelResult out;
    out.value = resk * h;
    out.error = std::abs(resk - resg) * h;
    return out;
}

// Adaptive refinement of the 7-15 pair by interval bisection, with a composite
// Simpson pass as a fallback when the recursion depth runs out (flat integrands
// whose Kronrod error estimate stalls). Relative tolerance on the panel value.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-8,
                          int max_depth = 24) {
    if (a == b) return 0.0;
    struct Worker {
        const F& f;
        double rel_tol;
        int max_depth;
        double simpson(double a, double b, int n) const {
            double h = (b - a) / n;
            double s = f(a) + f(b);
            for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
            return s * h / 3.0;
        }
        double run(double a, double b, double scale, int depth) const {
            PanelResult p = gk15_panel(f, a, b);
            double tol = rel_tol * std::max(scale, std::abs(p.value));
            if (p.error <= tol || b - a < 1e-300) return p.value;
            if (depth >= max_depth) {
                double s1 = simpson(a, b, 256);
                double s2 = simpson(a, b, 512);
                if (std::abs(s2 - s1) > 16.0 * tol)
                    throw numerical_error("integrate_adaptive: panel refuses to converge");
                return s2;
            }
            double m = 0.5 * (a + b);
            return run(a, m, scale, depth + 1) + run(m, b, scale, depth + 1);
        }
    };
    Worker w{f, rel_tol, max_depth};
    PanelResult whole = gk15_panel(f, a, b);
    return w.run(a, b, std::abs(whole.value), 0);
}

// 4-point Gauss-Legendre panel; exact through degree 7. Enough to integrate
// |p|^2 for a cubic interpolant p exactly, which keeps shell partitions of a
// cell consistent no matter where the shell boundary splits it.
template <class F>
double gl4_panel(const F& f, double a, double b) {
    static const double x1 = 0.339981043584856, x2 = 0.861136311594053;
    static const double w1 = 0.652145154862546, w2 = 0.347854845137454;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    return h * (w1 * (f(c - h * x1) + f(c + h * x1)) + w2 * (f(c - h * x2) + f(c + h * x2)));
}

} // namespace laplab
