#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <json.hpp>

#include "laplab/grid.hpp"
#include "laplab/potential.hpp"
#include "laplab/quadrature.hpp"

namespace laplab {

// Spectral point z = lambda +/- i mu. mu = 0 is allowed only on the closure
// of the upper/lower sector, i.e. for lambda >= 0.
struct SpectralParam {
    double lambda = 1.0;
    double mu = 0.0;
    int sign = +1; // +1 upper branch, -1 lower branch

    void validate() const {
        if (mu < 0.0) throw std::invalid_argument("SpectralParam: mu must be >= 0");
        if (sign != 1 && sign != -1) throw std::invalid_argument("SpectralParam: sign is +/-1");
        if (mu == 0.0 && lambda < 0.0)
            throw std::invalid_argument("SpectralParam: boundary values need lambda >= 0");
    }

    cplx value() const { return {lambda, sign * mu}; }

    // Membership in the sector {0 < |z| < rho, 0 < sign*arg z < omega},
    // counting real lambda in [0, rho) as closure points.
    bool in_sector(double rho, double omega) const {
        cplx z = value();
        double az = std::abs(z);
        if (mu == 0.0) return lambda >= 0.0 && az < rho;
        if (az >= rho || az == 0.0) return false;
        double arg = sign * std::arg(z);
        return arg > 0.0 && arg < omega;
    }
};

// Local classical speed a(lambda, r) = (2 max{lambda,0} - 2 V(r))^(1/2).
inline double speed_a(const PotentialSpec& spec, double lambda, double r) {
    double v = eval_potential(spec, r).V;
    double s = 2.0 * std::max(lambda, 0.0) - 2.0 * v;
    if (!(s > 0.0))
        throw std::domain_error("speed_a: 2 max{lambda,0} - 2V must be positive");
    return std::sqrt(s);
}

// Cumulative travel-time and eikonal tables on a shared radial grid:
//   tau(r) = int_0^r ds / a,   S(r) = int_0^r a ds.
struct EffTimeTable {
    PotentialSpec spec;
    GridPtr grid;
    double lambda = 0.0;
    std::vector<double> a, tau, S;

    double rmax() const { return grid->back(); }

    double tau_at(double r) const { return interp_linear(tau, r); }
    double S_at(double r) const { return interp_linear(S, r); }
    double a_at(double r) const { return interp_linear(a, r); }

    // Node value plus an in-cell quadrature correction. Smooth in r, so orbit
    // diagnostics see no interpolation kinks at the 1e-6 tolerance scale.
    double tau_refined(double r) const {
        check_range(r);
        std::size_t i = grid->cell_of(r);
        auto f = [&](double s) { return 1.0 / speed_a(spec, lambda, s); };
        return tau[i] + gl4_panel(f, grid->r[i], r);
    }

    // Radius where tau crosses t (linear in-cell inverse); +inf if the table
    // never reaches t.
    double r_at_tau(double t) const {
        if (t < 0.0) throw std::domain_error("EffTimeTable: tau is nonnegative");
        if (t > tau.back()) return std::numeric_limits<double>::infinity();
        auto it = std::lower_bound(tau.begin(), tau.end(), t);
        std::size_t i = std::size_t(it - tau.begin());
        if (i == 0) return grid->r.front();
        double w = (t - tau[i - 1]) / (tau[i] - tau[i - 1]);
        return grid->r[i - 1] + w * (grid->r[i] - grid->r[i - 1]);
    }

private:
    void check_range(double r) const {
        if (r < grid->front() || r > grid->back())
            throw std::domain_error("EffTimeTable: query outside the grid");
    }
    double interp_linear(const std::vector<double>& y, double r) const {
        check_range(r);
        std::size_t i = grid->cell_of(r);
        double w = (r - grid->r[i]) / (grid->r[i + 1] - grid->r[i]);
        return y[i] + w * (y[i + 1] - y[i]);
    }
};

// Builds tau/S by per-cell adaptive quadrature (relative tolerance per cell).
inline EffTimeTable build_efftime(const PotentialSpec& spec, double lambda, GridPtr grid,
                                  double rel_tol = 1e-8) {
    spec.validate();
    grid->validate();
    EffTimeTable t;
    t.spec = spec;
    t.grid = grid;
    t.lambda = lambda;
    std::size_t n = grid->size();
    t.a.resize(n);
    t.tau.resize(n);
    t.S.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.a[i] = speed_a(spec, lambda, grid->r[i]);
    t.tau[0] = 0.0;
    t.S[0] = 0.0;
    double tau0 = 0.0, S0 = 0.0;
    if (grid->front() > 0.0) {
        // Grid starts away from the origin; both integrals still anchor at 0.
        tau0 = integrate_adaptive([&](double s) { return 1.0 / speed_a(spec, lambda, s); }, 0.0,
                                  grid->front(), rel_tol);
        S0 = integrate_adaptive([&](double s) { return speed_a(spec, lambda, s); }, 0.0,
                                grid->front(), rel_tol);
    }
    t.tau[0] = tau0;
    t.S[0] = S0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double a0 = grid->r[i], b0 = grid->r[i + 1];
        t.tau[i + 1] =
            t.tau[i] + integrate_adaptive([&](double s) { return 1.0 / speed_a(spec, lambda, s); },
                                          a0, b0, rel_tol);
        t.S[i + 1] = t.S[i] + integrate_adaptive(
                                  [&](double s) { return speed_a(spec, lambda, s); }, a0, b0, rel_tol);
    }
    return t;
}

// Asymptotic complex phase b_z = (2(z-V))^(1/2) -/+ i V' / (4(z-V)), principal
// square root. The conjugate-branch symmetry conj(b_conj(z)) = b_z holds by
// construction.
inline cplx phase_b(const PotentialSpec& spec, const SpectralParam& z, double r) {
    z.validate();
    PotentialValues pv = eval_potential(spec, r);
    cplx w = z.value() - pv.V;
    if (w.imag() == 0.0 && w.real() <= 0.0)
        throw std::domain_error("phase_b: 2(z - V) lies on the branch cut");
    cplx root = std::sqrt(2.0 * w);
    cplx corr = cplx(0.0, 1.0) * (pv.dV / (4.0 * w));
    return z.sign > 0 ? root - corr : root + corr;
}

// ---- bound families for tau and S ---------------------------------------

struct RatioRange {
    std::string id;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double at_lo = 0.0, at_hi = 0.0;

    void update(double v, double r) {
        if (v < lo) { lo = v; at_lo = r; }
        if (v > hi) { hi = v; at_hi = r; }
    }
    bool within(double floor, double ceil) const { return lo >= floor && hi <= ceil; }
};

struct TauBoundsEntry {
    double lambda = 0.0;
    std::vector<RatioRange> families;
};

struct TauBoundsReport {
    std::vector<TauBoundsEntry> entries;
    bool all_within(double floor, double ceil) const {
        for (const auto& e : entries)
            for (const auto& f : e.families)
                if (!f.within(floor, ceil)) return false;
        return !entries.empty();
    }
};

// Empirical min/max of the four comparison ratios:
//   zero-energy:       tau(0,r) / (r <r>^(nu/2))          (lambda = 0 only)
//   uniform-positive:  tau <lambda>^(1/2) / r             (lambda >= lambda0)
//   eikonal:           S / (r a)
//   travel-speed:      tau a / r
inline TauBoundsReport check_tau_S_bounds(const std::vector<EffTimeTable>& tables,
                                          double lambda0 = 0.1) {
    TauBoundsReport rep;
    for (const auto& t : tables) {
        TauBoundsEntry e;
        e.lambda = t.lambda;
        RatioRange zero{"zero-energy"}, unif{"uniform-positive"}, eik{"eikonal"},
            speed{"travel-speed"};
        double nu = t.spec.nu;
        for (std::size_t i = 0; i < t.grid->size(); ++i) {
            double r = t.grid->r[i];
            if (r <= 0.0) continue;
            if (t.lambda == 0.0) zero.update(t.tau[i] / (r * std::pow(jbracket(r), 0.5 * nu)), r);
            if (t.lambda >= lambda0)
                unif.update(t.tau[i] * std::sqrt(jbracket(t.lambda)) / r, r);
            eik.update(t.S[i] / (r * t.a[i]), r);
            speed.update(t.tau[i] * t.a[i] / r, r);
        }
        if (t.lambda == 0.0) e.families.push_back(zero);
        if (t.lambda >= lambda0) e.families.push_back(unif);
        e.families.push_back(eik);
        e.families.push_back(speed);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

// ---- critical weight exponent --------------------------------------------

struct BetaCReport {
    double nu_term = 0.0;       // (2 - nu) / (2 (2 + nu))
    double nu_prime_term = 0.0; // (nu' - nu) / (2 + nu)
    double tail_term = 0.0;     // (2 + 3 eps)/8 * inf_lambda liminf tau a / r
    double value = 0.0;
    double rho = 0.0, rmax = 0.0, rtail = 0.0;
};

// The tail liminf of tau a / r is approximated by the minimum over the last
// decade of the grid, and the infimum over lambda by a grid on [0, rho].
inline BetaCReport beta_c(const PotentialSpec& spec, double rho, GridPtr grid,
                          std::size_t lambda_points = 9) {
    if (!(rho > 0.0)) throw std::invalid_argument("beta_c: rho must be positive");
    BetaCReport rep;
    rep.rho = rho;
    rep.rmax = grid->back();
    rep.rtail = rep.rmax / 10.0;
    rep.nu_term = (2.0 - spec.nu) / (2.0 * (2.0 + spec.nu));
    rep.nu_prime_term = (spec.nu_prime - spec.nu) / (2.0 + spec.nu);
    double inf_tail = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lambda_points; ++k) {
        double lam = rho * double(k) / double(lambda_points - 1);
        EffTimeTable t = build_efftime(spec, lam, grid);
        double tail = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid->size(); ++i) {
            double r = grid->r[i];
            if (r < rep.rtail || r <= 0.0) continue;
            tail = std::min(tail, t.tau[i] * t.a[i] / r);
        }
        inf_tail = std::min(inf_tail, tail);
    }
    rep.tail_term = (2.0 + 3.0 * spec.eps) / 8.0 * inf_tail;
    rep.value = std::min({rep.nu_term, rep.nu_prime_term, rep.tail_term});
    return rep;
}

inline nlohmann::ordered_json to_json(const BetaCReport& r) {
    nlohmann::ordered_json j;
    j["rho"] = r.rho;
    j["rmax"] = r.rmax;
    j["rtail"] = r.rtail;
    j["terms"] = {{"nu_term", r.nu_term},
                  {"nu_prime_term", r.nu_prime_term},
                  {"tail_term", r.tail_term}};
    j["beta_c"] = r.value;
    return j;
}

} // namespace laplab
