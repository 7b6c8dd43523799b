#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "laplab/efftime.hpp"
#include "laplab/field.hpp"
#include "laplab/quadrature.hpp"

namespace laplab {

// Dyadic shell decomposition of the radial domain. Shell 1 is everything
// below the first threshold, shell n >= 2 the band between consecutive
// thresholds. Thresholds are tau = 2^n (travel-time shells) or |x| = 2^(n-m)
// (plain shells with scale offset m); cells straddling a threshold are split
// at the interpolated crossing radius.
struct DyadicDecomposition {
    GridPtr grid;
    std::vector<double> bounds; // ascending threshold radii inside the domain
    int offset = 0;             // weight exponent uses (n - offset)/2
    int leading_empty = 0;      // shells entirely below the first grid node

    std::size_t shells() const { return bounds.size() + 1; }

    // Shell index (1-based) of radius r.
    int shell_of(double r) const {
        return 1 + leading_empty +
               int(std::upper_bound(bounds.begin(), bounds.end(), r) - bounds.begin());
    }

    static DyadicDecomposition from_tau(const EffTimeTable& table) {
        DyadicDecomposition d;
        d.grid = table.grid;
        int n = 1;
        while (table.r_at_tau(std::ldexp(1.0, n)) <= table.grid->front()) ++n;
        d.leading_empty = n - 1;
        for (;; ++n) {
            double rn = table.r_at_tau(std::ldexp(1.0, n));
            if (!std::isfinite(rn) || rn >= table.grid->back()) break;
            d.bounds.push_back(rn);
        }
        return d;
    }

    static DyadicDecomposition from_abs_x(GridPtr grid, int m) {
        DyadicDecomposition d;
        d.grid = grid;
        d.offset = m;
        // Thresholds 2^(n-m) that land strictly inside the grid; shells below
        // the first node never receive mass, so leading bounds may be dropped
        // without changing any norm as long as indices stay aligned.
        int n = 1;
        while (std::ldexp(1.0, n - m) <= grid->front()) ++n;
        d.leading_empty = n - 1;
        for (;; ++n) {
            double rn = std::ldexp(1.0, n - m);
            if (rn >= grid->back()) break;
            d.bounds.push_back(rn);
        }
        return d;
    }

    // Physical shell index of local bin b (0-based bins over bounds).
    int shell_index(std::size_t bin) const { return int(bin) + 1 + leading_empty; }
};

namespace detail {

// Integral of w(r) |p(r)|^2 over [a, b] within one grid cell, where p is the
// in-cell interpolant of sector k. GL4 integrates |cubic|^2 exactly.
template <class W>
double cell_mass(const PartialWaveField& f, std::size_t k, double a, double b, const W& w) {
    auto g = [&](double r) { return w(r) * std::norm(eval_sector(f, k, r)); };
    return gl4_panel(g, a, b);
}

struct UnitWeight {
    double operator()(double) const { return 1.0; }
};

} // namespace detail

// Per-shell squared masses sum_l int w |u_l|^2 dr over window [wa, wb].
template <class W = detail::UnitWeight>
std::vector<double> shell_masses(const DyadicDecomposition& dec, const PartialWaveField& f,
                                 double wa = 0.0, double wb = std::numeric_limits<double>::infinity(),
                                 const W& w = {}) {
    if (f.grid->r != dec.grid->r)
        throw std::invalid_argument("shell_masses: field and decomposition grids differ");
    std::vector<double> mass(dec.shells(), 0.0);
    const auto& r = f.grid->r;
    for (std::size_t k = 0; k < f.sectors(); ++k) {
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            double a = std::max(r[i], wa);
            double b = std::min(r[i + 1], wb);
            if (!(b > a)) continue;
            // Split the cell at any thresholds it straddles.
            double lo = a;
            int bin = int(std::upper_bound(dec.bounds.begin(), dec.bounds.end(), lo) -
                          dec.bounds.begin());
            while (bin < int(dec.bounds.size()) && dec.bounds[bin] < b) {
                mass[bin] += detail::cell_mass(f, k, lo, dec.bounds[bin], w);
                lo = dec.bounds[bin];
                ++bin;
            }
            mass[bin] += detail::cell_mass(f, k, lo, b, w);
        }
    }
    return mass;
}

template <class W = detail::UnitWeight>
double l2_norm_sq(const PartialWaveField& f, double wa = 0.0,
                  double wb = std::numeric_limits<double>::infinity(), const W& w = {}) {
    double total = 0.0;
    const auto& r = f.grid->r;
    for (std::size_t k = 0; k < f.sectors(); ++k)
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            double a = std::max(r[i], wa);
            double b = std::min(r[i + 1], wb);
            if (b > a) total += detail::cell_mass(f, k, a, b, w);
        }
    return total;
}

template <class W = detail::UnitWeight>
double l2_norm(const PartialWaveField& f, double wa = 0.0,
               double wb = std::numeric_limits<double>::infinity(), const W& w = {}) {
    return std::sqrt(l2_norm_sq(f, wa, wb, w));
}

// Sesquilinear inner product <f, g> = sum_l int conj(f_l) g_l dr.
inline cplx inner(const PartialWaveField& f, const PartialWaveField& g, double wa = 0.0,
                  double wb = std::numeric_limits<double>::infinity()) {
    f.check_compatible(g);
    cplx total = 0.0;
    const auto& r = f.grid->r;
    for (std::size_t k = 0; k < f.sectors(); ++k)
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            double a = std::max(r[i], wa);
            double b = std::min(r[i + 1], wb);
            if (!(b > a)) continue;
            auto re = [&](double x) {
                return std::real(std::conj(eval_sector(f, k, x)) * eval_sector(g, k, x));
            };
            auto im = [&](double x) {
                return std::imag(std::conj(eval_sector(f, k, x)) * eval_sector(g, k, x));
            };
            total += cplx(gl4_panel(re, a, b), gl4_panel(im, a, b));
        }
    return total;
}

// Shell-weighted norms. norm_B sums 2^((n-offset)/2) ||1_n psi||, norm_Bstar
// takes the sup of the complementary weights.
template <class W = detail::UnitWeight>
double norm_B(const DyadicDecomposition& dec, const PartialWaveField& f, double wa = 0.0,
              double wb = std::numeric_limits<double>::infinity(), const W& w = {}) {
    auto mass = shell_masses(dec, f, wa, wb, w);
    double total = 0.0;
    for (std::size_t b = 0; b < mass.size(); ++b)
        total += std::exp2(0.5 * (dec.shell_index(b) - dec.offset)) * std::sqrt(mass[b]);
    return total;
}

template <class W = detail::UnitWeight>
double norm_Bstar(const DyadicDecomposition& dec, const PartialWaveField& f, double wa = 0.0,
                  double wb = std::numeric_limits<double>::infinity(), const W& w = {}) {
    auto mass = shell_masses(dec, f, wa, wb, w);
    double best = 0.0;
    for (std::size_t b = 0; b < mass.size(); ++b)
        best = std::max(best,
                        std::exp2(-0.5 * (dec.shell_index(b) - dec.offset)) * std::sqrt(mass[b]));
    return best;
}

struct ShellProfile {
    std::vector<int> shell;   // physical shell indices
    std::vector<double> value; // 2^(-(n-offset)/2) ||1_n psi||
};

// The vanishing-tail diagnostic behind the B*_0 membership test.
inline ShellProfile tail_profile(const DyadicDecomposition& dec, const PartialWaveField& f,
                                 double wa = 0.0,
                                 double wb = std::numeric_limits<double>::infinity()) {
    auto mass = shell_masses(dec, f, wa, wb);
    ShellProfile p;
    for (std::size_t b = 0; b < mass.size(); ++b) {
        p.shell.push_back(dec.shell_index(b));
        p.value.push_back(std::exp2(-0.5 * (dec.shell_index(b) - dec.offset)) *
                          std::sqrt(mass[b]));
    }
    return p;
}

// || <tau>^s psi ||_2 with tau interpolated linearly from the table.
inline double weighted_norm(const PartialWaveField& f, double s, const EffTimeTable& table,
                            double wa = 0.0,
                            double wb = std::numeric_limits<double>::infinity()) {
    auto w = [&](double r) { return std::pow(1.0 + sq(table.tau_at(r)), s); };
    return l2_norm(f, wa, wb, w);
}

} // namespace laplab
