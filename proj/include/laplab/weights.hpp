#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "laplab/common.hpp"

namespace laplab {

// C^2 cutoff profile: 1 on t <= 1, 0 on t >= 2, quintic smoothstep between
// (both value and first two derivatives match at the ends, slope <= 0).
inline double chi_base(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    double u = t - 1.0;
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

inline double chi_base_d1(double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    double u = t - 1.0;
    return -30.0 * u * u * sq(1.0 - u);
}

inline double chi_base_d2(double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    double u = t - 1.0;
    return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

// Dyadic cutoffs in the tau variable: chi_n lives below 2^n, bar_chi_m above
// 2^m, and the band chi_{m,n} = bar_chi_m chi_n selects 2^m ... 2^n.
inline double cutoff_chi(int n, double tau) { return chi_base(tau / std::ldexp(1.0, n)); }

inline double cutoff_chi_bar(int m, double tau) { return 1.0 - cutoff_chi(m, tau); }

inline double cutoff_band(int m, int n, double tau) {
    if (n < m) throw std::invalid_argument("cutoff_band: need n >= m");
    return cutoff_chi_bar(m, tau) * cutoff_chi(n, tau);
}

// Saturating escape weight theta(tau) = delta^-1 [1 - (1 + tau/R)^-delta],
// with closed-form first and second derivatives.
struct ThetaWeight {
    double delta = 1.0;
    double R = 1.0;

    ThetaWeight(double delta_, double R_) : delta(delta_), R(R_) {
        if (!(delta > 0.0)) throw std::invalid_argument("ThetaWeight: delta must be positive");
        if (!(R > 0.0)) throw std::invalid_argument("ThetaWeight: R must be positive");
    }

    double theta(double tau) const {
        check(tau);
        // -expm1(-delta log1p(x)) sidesteps the 1 - (1+x)^-delta cancellation
        // at small tau/R; the exact-comparison checks need theta to full
        // relative precision there.
        return -std::expm1(-delta * std::log1p(tau / R)) / delta;
    }
    double dtheta(double tau) const {
        check(tau);
        return std::pow(1.0 + tau / R, -1.0 - delta) / R;
    }
    double d2theta(double tau) const {
        check(tau);
        return -(1.0 + delta) * std::pow(1.0 + tau / R, -2.0 - delta) / (R * R);
    }

private:
    static void check(double tau) {
        if (tau < 0.0) throw std::domain_error("ThetaWeight: tau must be >= 0");
    }
};

// Two-sided comparison bounds for theta, checked pointwise:
//   exact:   theta <= tau/R,  theta' <= theta/tau,  theta'' <= 0,  R theta' <= 1
//   fitted:  c1 = min theta / min{1, tau/R}               (> 0)
//            c2 = min theta' tau^(1+delta) / (min{R,tau}^delta theta)  (> 0)
//            C2 = max -theta'' tau^2 / theta              (finite)
struct ThetaCheck {
    double delta = 0.0, R = 0.0;
    double worst_upper_margin = std::numeric_limits<double>::infinity();   // tau/R - theta
    double worst_ratio_margin = std::numeric_limits<double>::infinity();   // theta/tau - theta'
    double max_d2 = -std::numeric_limits<double>::infinity();              // sign check
    double fitted_c1 = std::numeric_limits<double>::infinity();
    double fitted_c2 = std::numeric_limits<double>::infinity();
    double fitted_C2 = 0.0;
    double max_R_dtheta = 0.0;

    bool pass(double tol = 1e-12) const {
        return worst_upper_margin >= -tol && worst_ratio_margin >= -tol && max_d2 <= tol &&
               fitted_c1 > 0.0 && fitted_c2 > 0.0 && std::isfinite(fitted_C2) &&
               max_R_dtheta <= 1.0 + tol;
    }
};

inline ThetaCheck check_theta_inequalities(const ThetaWeight& w, const std::vector<double>& taus) {
    ThetaCheck c;
    c.delta = w.delta;
    c.R = w.R;
    for (double tau : taus) {
        if (!(tau > 0.0)) continue;
        double th = w.theta(tau), d1 = w.dtheta(tau), d2 = w.d2theta(tau);
        c.worst_upper_margin = std::min(c.worst_upper_margin, tau / w.R - th);
        c.worst_ratio_margin = std::min(c.worst_ratio_margin, th / tau - d1);
        c.max_d2 = std::max(c.max_d2, d2);
        c.fitted_c1 = std::min(c.fitted_c1, th / std::min(1.0, tau / w.R));
        c.fitted_c2 = std::min(c.fitted_c2,
                               d1 * std::pow(tau, 1.0 + w.delta) /
                                   (std::pow(std::min(w.R, tau), w.delta) * th));
        c.fitted_C2 = std::max(c.fitted_C2, -d2 * tau * tau / th);
        c.max_R_dtheta = std::max(c.max_R_dtheta, w.R * d1);
    }
    return c;
}

} // namespace laplab
