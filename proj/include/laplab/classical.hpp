#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "laplab/efftime.hpp"
#include "laplab/potential.hpp"

namespace laplab {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm3(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Snapshot of the Hamilton flow of H = p^2/2 + V(|x|). Unused components
// stay zero in dimension < 3.
struct OrbitState {
    Vec3 x{};
    Vec3 p{};
    double t = 0.0;

    double r() const { return norm3(x); }
    double p_r() const {
        double rr = r();
        return rr > 0.0 ? dot(x, p) / rr : 0.0;
    }
    double energy(const PotentialSpec& spec) const {
        return 0.5 * dot(p, p) + eval_potential(spec, r()).V;
    }
};

struct OrbitTrace {
    PotentialSpec spec;
    std::vector<OrbitState> states;
    double energy_drift = 0.0;   // max |E(t) - E(0)| / max(1, |E(0)|)
    bool near_origin = false;    // stopped after dipping below r_min
    bool escaped_2x = false;     // non-trapping heuristic: r(T) > 2 r(0)
    std::size_t steps = 0;

    std::size_t size() const { return states.size(); }
    double r(std::size_t i) const { return states[i].r(); }
    double p_r(std::size_t i) const { return states[i].p_r(); }
    double t(std::size_t i) const { return states[i].t; }
    double max_radius() const {
        double m = 0.0;
        for (const auto& s : states) m = std::max(m, s.r());
        return m;
    }
};

namespace detail {

inline Vec3 force(const PotentialSpec& spec, const Vec3& x) {
    double r = norm3(x);
    if (r == 0.0) return {0.0, 0.0, 0.0};
    double dV = eval_potential(spec, r).dV;
    double f = -dV / r; // -grad V = -V'(r) x/r
    return {f * x[0], f * x[1], f * x[2]};
}

} // namespace detail

// Leapfrog integration with n_samples snapshots at uniform macro times.
// Each macro interval is covered by kick-drift-kick substeps whose step is
// halved until |grad V| dt^2 <= 1e-4 r, which keeps the symplectic energy
// wobble under control near the origin.
inline OrbitTrace integrate_orbit(const PotentialSpec& spec, const Vec3& x0, const Vec3& p0,
                                  double T, double dt, std::size_t n_samples = 201,
                                  double r_min = 1e-6) {
    if (!(norm3(x0) > 0.0)) throw std::invalid_argument("integrate_orbit: |x0| must be positive");
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("integrate_orbit: T, dt must be positive");
    if (n_samples < 2) throw std::invalid_argument("integrate_orbit: need at least two samples");

    OrbitTrace tr;
    tr.spec = spec;
    OrbitState s;
    s.x = x0;
    s.p = p0;
    s.t = 0.0;
    tr.states.push_back(s);
    double E0 = s.energy(spec);

    double sample_dt = T / double(n_samples - 1);
    for (std::size_t k = 1; k < n_samples && !tr.near_origin; ++k) {
        double t_target = sample_dt * double(k);
        while (s.t < t_target - 1e-12 * T) {
            double h = std::min(dt, t_target - s.t);
            double r = norm3(s.x);
            if (r < r_min) {
                tr.near_origin = true;
                break;
            }
            Vec3 f = detail::force(spec, s.x);
            double fmag = norm3(f);
            while (fmag * h * h > 1e-4 * r) {
                h *= 0.5;
                if (h < 1e-12 * dt)
                    throw numerical_error("integrate_orbit: step underflow near the origin");
            }
            for (int c = 0; c < 3; ++c) s.p[c] += 0.5 * h * f[c];
            for (int c = 0; c < 3; ++c) s.x[c] += h * s.p[c];
            Vec3 f1 = detail::force(spec, s.x);
            for (int c = 0; c < 3; ++c) s.p[c] += 0.5 * h * f1[c];
            s.t += h;
            ++tr.steps;
        }
        s.t = tr.near_origin ? s.t : t_target;
        if (s.t > tr.states.back().t) {
            tr.states.push_back(s);
            tr.energy_drift = std::max(tr.energy_drift,
                                       std::abs(s.energy(spec) - E0) / std::max(1.0, std::abs(E0)));
        }
    }
    tr.escaped_2x = tr.states.back().r() > 2.0 * tr.states.front().r();
    return tr;
}

// Escape-inequality margins m(t) = tau(r(t)) - tau(r(0)) - p_r(0) t / a(r(0)).
// The trace must sit on the table's energy surface; the initial speed is
// evaluated analytically so m(0) = 0 holds exactly.
inline std::vector<double> check_escape_inequality(const OrbitTrace& tr, const EffTimeTable& table,
                                                   double energy_tol = 1e-6) {
    if (tr.states.empty()) throw std::invalid_argument("check_escape_inequality: empty trace");
    double E0 = tr.states.front().energy(tr.spec);
    if (std::abs(E0 - table.lambda) > energy_tol * std::max(1.0, std::abs(table.lambda)))
        throw std::invalid_argument("check_escape_inequality: trace energy differs from table lambda");
    if (tr.max_radius() > table.rmax())
        throw std::invalid_argument("check_escape_inequality: orbit leaves the table domain");

    double r0 = tr.states.front().r();
    double tau0 = table.tau_refined(r0);
    double slope = tr.states.front().p_r() / speed_a(tr.spec, table.lambda, r0);
    std::vector<double> m(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i)
        m[i] = table.tau_refined(tr.r(i)) - tau0 - slope * (tr.t(i) - tr.t(0));
    return m;
}

// Second finite differences of tau(lambda, x(t)) at interior samples; the
// convexity statement behind the escape inequality says these stay >= 0.
inline std::vector<double> d2tau_along_orbit(const OrbitTrace& tr, const EffTimeTable& table) {
    if (tr.size() < 3) throw std::invalid_argument("d2tau_along_orbit: need at least 3 samples");
    if (tr.max_radius() > table.rmax())
        throw std::invalid_argument("d2tau_along_orbit: orbit leaves the table domain");
    std::vector<double> tau(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) tau[i] = table.tau_refined(tr.r(i));
    std::vector<double> out(tr.size() - 2);
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
        double h0 = tr.t(i) - tr.t(i - 1);
        double h1 = tr.t(i + 1) - tr.t(i);
        out[i - 1] = 2.0 * ((tau[i + 1] - tau[i]) / h1 - (tau[i] - tau[i - 1]) / h0) / (h0 + h1);
    }
    return out;
}

// Closed-form d^2/dt^2 tau along a state, for cross-checking the finite
// differences: (p_T^2 / (r a^3)) (a^2 - r V'). Nonnegative whenever the
// virial inequality holds.
inline double d2tau_exact(const PotentialSpec& spec, double lambda, const OrbitState& s) {
    double r = s.r();
    double a = speed_a(spec, lambda, r);
    double pr = s.p_r();
    double pt2 = std::max(0.0, dot(s.p, s.p) - pr * pr);
    double dV = eval_potential(spec, r).dV;
    return pt2 / (r * a * a * a) * (a * a - r * dV);
}

// Initial data p perpendicular to x with |p|^2 = r V'(r): centripetal
// balance, so r(t) stays constant. Returns the state and its energy.
inline std::pair<OrbitState, double> circular_orbit(const PotentialSpec& spec, double r) {
    double dV = eval_potential(spec, r).dV;
    if (!(dV > 0.0)) throw std::invalid_argument("circular_orbit: potential must be attractive at r");
    OrbitState s;
    s.x = {r, 0.0, 0.0};
    s.p = {0.0, std::sqrt(r * dV), 0.0};
    double lambda = 0.5 * r * dV + eval_potential(spec, r).V;
    return {s, lambda};
}

// Random initial states on the energy surface E = lambda: |p| = a(lambda, r)
// puts them there exactly. Radii log-uniform in [r_lo, r_hi]; directions
// uniform (d = 2 or 3); the radial momentum fraction is kept away from zero
// and pointed outward.
inline std::vector<OrbitState> sample_orbits(const PotentialSpec& spec, double lambda,
                                             std::size_t n, std::uint64_t seed, double r_lo = 0.5,
                                             double r_hi = 20.0, double min_radial_frac = 0.01) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01;
    std::vector<OrbitState> out;
    out.reserve(n);
    int d = spec.dim >= 3 ? 3 : 2;
    while (out.size() < n) {
        double r = r_lo * std::pow(r_hi / r_lo, u01(rng));
        Vec3 xhat{}, phat{};
        do {
            for (int c = 0; c < d; ++c) xhat[c] = n01(rng);
        } while (norm3(xhat) < 1e-6);
        do {
            for (int c = 0; c < d; ++c) phat[c] = n01(rng);
        } while (norm3(phat) < 1e-6);
        double nx = norm3(xhat), np = norm3(phat);
        for (int c = 0; c < 3; ++c) {
            xhat[c] /= nx;
            phat[c] /= np;
        }
        double frac = dot(xhat, phat);
        if (std::abs(frac) < min_radial_frac) continue;
        if (frac < 0.0)
            for (int c = 0; c < 3; ++c) phat[c] -= 2.0 * frac * xhat[c]; // reflect outward
        OrbitState s;
        double speed = speed_a(spec, lambda, r);
        for (int c = 0; c < 3; ++c) {
            s.x[c] = r * xhat[c];
            s.p[c] = speed * phat[c];
        }
        out.push_back(s);
    }
    return out;
}

// Trace rows as CSV: t, position, momentum, energy, tau, margin.
inline void write_orbit_csv(std::ostream& os, const OrbitTrace& tr, const EffTimeTable& table,
                            const std::vector<double>& margins) {
    if (margins.size() != tr.size())
        throw std::invalid_argument("write_orbit_csv: margin series length mismatch");
    os << "t,x1,x2,x3,p1,p2,p3,E,tau,margin\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
        os << buf;
    };
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const OrbitState& s = tr.states[i];
        put(s.t, ',');
        for (int c = 0; c < 3; ++c) put(s.x[c], ',');
        for (int c = 0; c < 3; ++c) put(s.p[c], ',');
        put(s.energy(tr.spec), ',');
        put(table.tau_refined(s.r()), ',');
        put(margins[i], '\n');
    }
}

} // namespace laplab
