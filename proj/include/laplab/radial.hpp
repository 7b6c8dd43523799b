#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "laplab/common.hpp"
#include "laplab/efftime.hpp"
#include "laplab/field.hpp"
#include "laplab/grid.hpp"
#include "laplab/interp.hpp"
#include "laplab/norms.hpp"
#include "laplab/ode.hpp"
#include "laplab/potential.hpp"
#include "laplab/quadrature.hpp"

namespace laplab {

// ---- reduced operator ---------------------------------------------------

// Centrifugal index of the reduced operator: after u = r^{(d-1)/2} c the
// sector with angular eigenvalue ell(ell+d-2) satisfies
// -u''/2 + [V + q + kappa/(2r^2) - z] u = source, kappa as below.
inline double centrifugal_coeff(int ell, int dim) {
    if (ell < 0) throw std::invalid_argument("centrifugal_coeff: negative sector index");
    return double(ell) * (ell + dim - 2) + 0.25 * (dim - 1) * (dim - 3);
}

// Frobenius exponent at the origin; kappa = alpha(alpha - 1) exactly.
inline double origin_exponent(int ell, int dim) { return ell + 0.5 * (dim - 1); }

inline double reduced_potential(const PotentialSpec& spec, int ell, double r) {
    if (!(r > 0.0)) throw std::domain_error("reduced_potential: r must be positive");
    PotentialValues pv = eval_potential(spec, r);
    return pv.V + pv.q + 0.5 * centrifugal_coeff(ell, spec.dim) / (r * r);
}

// Asymptotic phase of the reduced operator (V + q + centrifugal), used to
// initialize the inward solve at R_max. Not the same object as phase_b, which
// is V-only and enters the radiation-condition measurements.
inline cplx phase_b_reduced(const PotentialSpec& spec, int ell, cplx z, int branch, double r) {
    PotentialValues pv = eval_potential(spec, r);
    double kappa = centrifugal_coeff(ell, spec.dim);
    double veff = pv.V + pv.q + 0.5 * kappa / (r * r);
    double dveff = pv.dV + pv.dq - kappa / (r * r * r);
    cplx w = z - veff;
    if (w.imag() == 0.0 && w.real() <= 0.0)
        throw numerical_error("phase_b_reduced: z - V_eff lies on the branch cut");
    cplx root = std::sqrt(2.0 * w);
    cplx corr = cplx(0.0, 1.0) * dveff / (4.0 * w);
    return branch >= 0 ? root - corr : root + corr;
}

// ---- solver grid ---------------------------------------------------------

struct SolverGridOptions {
    double ratio = 1.01;              // geometric growth where no cap binds
    double points_per_wavelength = 48; // keeps the FD residual well under 1e-6
    double max_efolds_per_cell = 0.75; // keeps damped-mode growth representable
    std::size_t max_nodes = 6000000;
};

// Grid for the mode solves. Geometric grading from eps_core = 1e-4 of the
// first wavelength, with the step capped both by the local oscillation length
// 2pi/|b| and by the e-folding length of the damped mode at the largest mu
// the grid will see.
inline RadialGrid solver_grid(const PotentialSpec& spec, double lambda, double mu_max,
                              double rmax, SolverGridOptions opt = {}) {
    if (!(rmax > 0.0)) throw std::invalid_argument("solver_grid: rmax must be positive");
    if (mu_max < 0.0) throw std::invalid_argument("solver_grid: mu_max must be >= 0");
    double a0 = speed_a(spec, lambda, 0.0);
    double eps_core = 1e-4 * (2.0 * pi / a0);
    if (!(eps_core < rmax)) throw std::invalid_argument("solver_grid: rmax below eps_core");
    const cplx z{std::max(lambda, 0.0), mu_max};

    RadialGrid g;
    g.dim = spec.dim;
    g.r.push_back(eps_core);
    while (g.r.back() < rmax) {
        double x = g.r.back();
        cplx b = std::sqrt(2.0 * (z - eval_potential(spec, x).V));
        double h = x * (opt.ratio - 1.0);
        h = std::min(h, 2.0 * pi / (opt.points_per_wavelength * std::max(std::abs(b), 1e-12)));
        double damp = std::abs(b.imag());
        if (damp > 0.0) h = std::min(h, opt.max_efolds_per_cell / damp);
        double next = x + h;
        g.r.push_back(next < rmax ? next : rmax);
        if (g.r.size() > opt.max_nodes)
            throw numerical_error("solver_grid: node budget exhausted; shrink rmax or mu range");
    }
    g.validate();
    return g;
}

// ---- directional sweeps ---------------------------------------------------

namespace detail {

struct PassResult {
    std::vector<cplx> u, v, I;  // renormalized node values
    std::vector<double> sigma;  // per-node log offsets
};

// One directional sweep of the reduced equation with the co-scaled source
// integral I' = +-u*src. Outward starts from the Frobenius series at the
// first node; inward starts from the reduced-phase condition at R_max, which
// selects the decaying solution for mu > 0 and the outgoing wave at mu = 0.
template <class Src>
PassResult integrate_pass(const PotentialSpec& spec, int ell, cplx z, int branch,
                          const RadialGrid& g, bool outward, const Src& src, double rtol) {
    const std::size_t n = g.size();
    if (n < 2) throw std::invalid_argument("integrate_pass: need at least two nodes");
    if (!(g.r.front() > 0.0))
        throw std::invalid_argument("integrate_pass: grid must start above r = 0");

    const double kappa = centrifugal_coeff(ell, spec.dim);
    const double isign = outward ? 1.0 : -1.0;
    auto deriv = [&](double r, const std::array<cplx, 3>& y, std::array<cplx, 3>& dy) {
        PotentialValues pv = eval_potential(spec, r);
        cplx w = pv.V + pv.q + 0.5 * kappa / (r * r) - z;
        dy[0] = y[1];
        dy[1] = 2.0 * w * y[0];
        dy[2] = isign * y[0] * src(r);
    };

    PassResult out;
    out.u.resize(n);
    out.v.resize(n);
    out.I.resize(n);
    out.sigma.resize(n);
    auto record = [&](std::size_t i, const ModeState& s) {
        out.u[i] = s.u;
        out.v[i] = s.v;
        out.I[i] = s.I;
        out.sigma[i] = s.sigma;
    };

    ModeState s;
    if (outward) {
        // u ~ r^alpha (1 + c1 r^2) near the origin; integrate the scaled wave
        // u e^{-alpha log eps} so high sectors start at O(1).
        const double eps = g.r.front();
        const double alpha = origin_exponent(ell, spec.dim);
        PotentialValues pv0 = eval_potential(spec, 0.0);
        cplx c1 = (pv0.V + pv0.q - z) / (2.0 * alpha + 1.0);
        s.u = 1.0 + c1 * eps * eps;
        s.v = alpha / eps + (alpha + 2.0) * c1 * eps;
        s.sigma = alpha * std::log(eps);
        record(0, s);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            s = integrate_span(deriv, g.r[i], g.r[i + 1], s, rtol);
            record(i + 1, s);
        }
    } else {
        const double rmax = g.r.back();
        cplx b = phase_b_reduced(spec, ell, z, branch, rmax);
        s.u = 1.0;
        s.v = cplx(0.0, branch >= 0 ? 1.0 : -1.0) * b;
        record(n - 1, s);
        for (std::size_t i = n - 1; i-- > 0;) {
            s = integrate_span(deriv, g.r[i + 1], g.r[i], s, rtol);
            record(i, s);
        }
    }
    return out;
}

struct WronskianStats {
    std::vector<cplx> w;       // scaled Wronskian per node
    std::vector<double> sigma; // offsets sigreg + sigout
    double max_ratio = 0.0;    // |w| over term size at the best node
    std::size_t ref = 0;
    cplx log_w{};
    double variation = 0.0;
};

inline WronskianStats wronskian_stats(const PassResult& reg, const PassResult& out) {
    const std::size_t n = reg.u.size();
    WronskianStats st;
    st.w.resize(n);
    st.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx t1 = reg.u[i] * out.v[i], t2 = reg.v[i] * out.u[i];
        st.w[i] = t1 - t2;
        st.sigma[i] = reg.sigma[i] + out.sigma[i];
        double scale = std::abs(t1) + std::abs(t2);
        double ratio = scale > 0.0 ? std::abs(st.w[i]) / scale : 0.0;
        if (ratio > st.max_ratio) {
            st.max_ratio = ratio;
            st.ref = i;
        }
    }
    if (st.max_ratio == 0.0) {
        st.variation = std::numeric_limits<double>::infinity();
        return st;
    }
    st.log_w = std::log(st.w[st.ref]) + st.sigma[st.ref];
    for (std::size_t i = 0; i < n; ++i) {
        if (st.w[i] == cplx(0.0)) {
            st.variation = std::numeric_limits<double>::infinity();
            continue;
        }
        cplx lw = std::log(st.w[i]) + st.sigma[i];
        // exp of the log difference is immune to 2*pi branch jumps
        st.variation = std::max(st.variation, std::abs(std::exp(lw - st.log_w) - 1.0));
    }
    return st;
}

[[noreturn]] inline void throw_resonance(int ell, cplx z) {
    std::ostringstream msg;
    msg << "mode solve: Wronskian collapse (eigenvalue or resonance nearby) at ell=" << ell
        << ", z=(" << z.real() << "," << z.imag() << ")";
    throw numerical_error(msg.str());
}

} // namespace detail

// ---- mode pairs ------------------------------------------------------------

// Regular and outgoing/decaying solutions of one sector, stored renormalized
// (value times exp(sigma)). The Wronskian u_reg u_out' - u_reg' u_out is kept
// as a log so sectors with huge dynamic range stay comparable.
struct ModePair {
    int ell = 0;
    SpectralParam z{};
    GridPtr grid;
    std::vector<cplx> ureg, vreg, uout, vout;
    std::vector<double> sigreg, sigout;
    cplx log_w{};
    double wronskian_variation = 0.0;

    cplx wronskian() const { return std::exp(log_w); }
    double log_abs_ureg(std::size_t i) const { return sigreg[i] + std::log(std::abs(ureg[i])); }
    double log_abs_uout(std::size_t i) const { return sigout[i] + std::log(std::abs(uout[i])); }
};

inline ModePair solve_modes(const PotentialSpec& spec, int ell, const SpectralParam& z,
                            GridPtr grid, double rtol = 1e-11) {
    z.validate();
    auto zero = [](double) { return cplx{}; };
    cplx zc = z.value();
    auto reg = detail::integrate_pass(spec, ell, zc, z.sign, *grid, true, zero, rtol);
    auto out = detail::integrate_pass(spec, ell, zc, z.sign, *grid, false, zero, rtol);
    auto st = detail::wronskian_stats(reg, out);
    if (st.max_ratio <= 1e-12) detail::throw_resonance(ell, zc);

    ModePair mp;
    mp.ell = ell;
    mp.z = z;
    mp.grid = std::move(grid);
    mp.ureg = std::move(reg.u);
    mp.vreg = std::move(reg.v);
    mp.sigreg = std::move(reg.sigma);
    mp.uout = std::move(out.u);
    mp.vout = std::move(out.v);
    mp.sigout = std::move(out.sigma);
    mp.log_w = st.log_w;
    mp.wronskian_variation = st.variation;
    return mp;
}

// ---- resolvent -------------------------------------------------------------

struct ResolventResult {
    PartialWaveField phi;
    double residual_rel = 0.0;        // ||(H-z)phi - psi||_2 / ||psi||_2 on the window
    double wronskian_variation = 0.0; // worst sector
    bool truncation_warning = false;  // source mass found beyond R_max / 4
};

// phi = R(z) psi sector by sector through the Wronskian Green kernel
//   phi(r) = -(2/W) [u_out(r) I_reg(r) + u_reg(r) I_out(r)],
// assembled from renormalized quantities (the offsets of the two sweeps cancel
// against the Wronskian's). The ODE residual is re-measured afterwards in weak
// form on [2 eps_core, R_max/2], with the L2 norm recovered by mass lumping;
// this is the operational contract every experiment checks inline.
inline ResolventResult apply_resolvent(const PotentialSpec& spec, const SpectralParam& z,
                                       const PartialWaveField& psi, double rtol = 1e-11) {
    z.validate();
    const RadialGrid& g = *psi.grid;
    const std::size_t n = g.size();
    if (n < 9) throw std::invalid_argument("apply_resolvent: grid too small");
    const cplx zc = z.value();

    ResolventResult res;
    res.phi = PartialWaveField::zeros(psi.grid, psi.ells, true);
    res.phi.produced_at = zc;

    const double win_lo = 2.0 * g.r.front();
    const double win_hi = 0.5 * g.r.back();
    const double support_hi = 0.25 * g.r.back();
    double num = 0.0, den = 0.0;

    for (std::size_t k = 0; k < psi.sectors(); ++k) {
        const int ell = psi.ells[k];
        std::function<cplx(double)> sfn;
        if (k < psi.analytic.size() && psi.analytic[k])
            sfn = psi.analytic[k];
        else
            sfn = [&psi, k](double r) { return eval_sector(psi, k, r); };

        auto reg = detail::integrate_pass(spec, ell, zc, z.sign, g, true, sfn, rtol);
        auto out = detail::integrate_pass(spec, ell, zc, z.sign, g, false, sfn, rtol);
        auto st = detail::wronskian_stats(reg, out);
        if (st.max_ratio <= 1e-12) detail::throw_resonance(ell, zc);
        res.wronskian_variation = std::max(res.wronskian_variation, st.variation);

        auto& phiu = res.phi.u[k];
        auto& phid = res.phi.du[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (st.w[i] == cplx(0.0))
                throw numerical_error("apply_resolvent: Wronskian vanished at a node");
            phiu[i] = -2.0 * (out.u[i] * reg.I[i] + reg.u[i] * out.I[i]) / st.w[i];
            phid[i] = -2.0 * (out.v[i] * reg.I[i] + reg.v[i] * out.I[i]) / st.w[i];
        }

        // Residual in weak form against the P1 hat functions of the window.
        // The stiffness action is exact given node values, so the assembled
        // field is never re-differentiated: a direct stencil would floor near
        // h^3 |psi'''| at the source edges (the family is C^2 by design),
        // orders of magnitude above the solver's actual defect. The potential
        // and source terms are integrated per cell with a quintic whose end
        // conditions take the curvature from the equation at the nodes.
        std::size_t i_lo = 1;
        while (i_lo < n && g.r[i_lo] < win_lo) ++i_lo;
        std::size_t i_hi = n - 1;
        while (i_hi > i_lo && g.r[i_hi - 1] > win_hi) --i_hi;
        if (i_lo + 1 >= i_hi)
            throw numerical_error("apply_resolvent: residual window is empty");

        // Per-cell integrals of ((V_eff - z) phi - psi) against the rising
        // and falling P1 pieces; the hat at node i collects rise[i-1]+fall[i].
        std::vector<cplx> rise(n, cplx(0.0)), fall(n, cplx(0.0));
        for (std::size_t j = i_lo - 1; j < i_hi; ++j) {
            const double ra = g.r[j], rb = g.r[j + 1], h = rb - ra;
            const cplx ua = phiu[j], ub = phiu[j + 1];
            const cplx va = phid[j], vb = phid[j + 1];
            const cplx wa = 2.0 * ((cplx(reduced_potential(spec, ell, ra)) - zc) * ua - psi.u[k][j]);
            const cplx wb = 2.0 * ((cplx(reduced_potential(spec, ell, rb)) - zc) * ub - psi.u[k][j + 1]);
            auto interp = [&](double t) {
                const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
                return ua * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) +
                       h * va * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) +
                       h * h * wa * (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5) +
                       ub * (10.0 * t3 - 15.0 * t4 + 6.0 * t5) +
                       h * vb * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) +
                       h * h * wb * (0.5 * t3 - t4 + 0.5 * t5);
            };
            const double c = 0.5 * (ra + rb), hh = 0.5 * h;
            cplx up = 0.0, dn = 0.0;
            auto add = [&](double x, double wq) {
                const double t = (x - ra) / h;
                cplx F = (cplx(reduced_potential(spec, ell, x)) - zc) * interp(t) - sfn(x);
                up += wq * t * F;
                dn += wq * (1.0 - t) * F;
            };
            for (int q = 0; q < 7; ++q) {
                add(c - hh * gk::xk[q], gk::wk[q]);
                add(c + hh * gk::xk[q], gk::wk[q]);
            }
            add(c, gk::wk[7]);
            rise[j] = up * hh;
            fall[j] = dn * hh;
        }
        for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double hm = g.r[i] - g.r[i - 1], hp = g.r[i + 1] - g.r[i];
            cplx bi = 0.5 * ((phiu[i] - phiu[i - 1]) / hm - (phiu[i + 1] - phiu[i]) / hp) +
                      rise[i - 1] + fall[i];
            num += std::norm(bi) / (0.5 * (hm + hp));
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double h = g.r[i + 1] - g.r[i];
            den += 0.5 * h * (std::norm(psi.u[k][i]) + std::norm(psi.u[k][i + 1]));
        }
        for (std::size_t i = 0; i < n; ++i)
            if (g.r[i] > support_hi && psi.u[k][i] != cplx(0.0)) {
                res.truncation_warning = true;
                break;
            }
    }
    // zero source: phi is exactly zero and the contract holds vacuously
    res.residual_rel = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return res;
}

// Energy-flux balance Im<psi, phi> = Im(z) ||phi||^2 + flux(R_max) for
// phi = R(z) psi. The boundary term completes the mass beyond the truncated
// domain exactly, so the identity is checkable even when the tail matters.
struct FluxBalance {
    double lhs = 0.0;
    double interior = 0.0;
    double boundary = 0.0;
    double rel_gap = 0.0;
};

inline FluxBalance flux_balance(const SpectralParam& z, const PartialWaveField& psi,
                                const PartialWaveField& phi) {
    psi.check_compatible(phi);
    if (!phi.has_du())
        throw std::invalid_argument("flux_balance: phi must carry derivatives");
    FluxBalance fb;
    fb.lhs = inner(psi, phi).imag();
    fb.interior = z.sign * z.mu * l2_norm_sq(phi);
    for (std::size_t k = 0; k < phi.sectors(); ++k) {
        cplx ub = phi.u[k].back(), vb = phi.du[k].back();
        fb.boundary += 0.5 * std::imag(std::conj(ub) * vb);
    }
    double scale = std::max({std::abs(fb.lhs), std::abs(fb.interior) + std::abs(fb.boundary),
                             1e-300});
    fb.rel_gap = std::abs(fb.lhs - fb.interior - fb.boundary) / scale;
    return fb;
}

// ---- first-order operators --------------------------------------------------

// p_r = -i d/dr acting on the unreduced sector coefficient c = u r^{-(d-1)/2},
// mapped back to reduced form. Uses the carried derivative when the field has
// one (integrator accuracy); otherwise a sliding 5-point stencil, 4th order.
inline PartialWaveField apply_p_r(const PartialWaveField& f) {
    const RadialGrid& g = *f.grid;
    const int d = g.dim;
    if (d > 1 && !(g.r.front() > 0.0))
        throw std::invalid_argument("apply_p_r: grid must start above r = 0");
    if (f.produced_at && f.produced_at->real() > 0.0) {
        double kmin = std::sqrt(2.0 * f.produced_at->real());
        for (std::size_t i = 0; i + 1 < g.size(); ++i)
            if ((g.r[i + 1] - g.r[i]) * kmin > 0.25 * pi)
                throw numerical_error("apply_p_r: fewer than 8 nodes per wavelength");
    }

    PartialWaveField out = PartialWaveField::zeros(f.grid, f.ells, false);
    out.produced_at = f.produced_at;
    const double beta = 0.5 * (d - 1);
    const cplx mi{0.0, -1.0};
    const std::size_t n = g.size();
    for (std::size_t k = 0; k < f.sectors(); ++k) {
        if (f.has_du()) {
            for (std::size_t i = 0; i < n; ++i)
                out.u[k][i] = mi * (f.du[k][i] - beta / g.r[i] * f.u[k][i]);
        } else {
            std::vector<cplx> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = f.u[k][i] * std::pow(g.r[i], -beta);
            std::vector<cplx> dc = fd_derivative(g.r, c, 1, 5);
            for (std::size_t i = 0; i < n; ++i) out.u[k][i] = mi * dc[i] * std::pow(g.r[i], beta);
        }
    }
    return out;
}

inline PartialWaveField apply_a_inv_p_r(const PotentialSpec& spec, double lambda,
                                        const PartialWaveField& f) {
    PartialWaveField out = apply_p_r(f);
    const RadialGrid& g = *f.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double ai = speed_a(spec, lambda, g.r[i]);
        for (std::size_t k = 0; k < out.sectors(); ++k) out.u[k][i] /= ai;
    }
    return out;
}

// Radiation defect (p_r - sign * b_z) phi, the combination whose smallness
// expresses the outgoing condition. b_z here is the V-only phase.
inline PartialWaveField apply_radiation_defect(const PotentialSpec& spec, const SpectralParam& z,
                                               const PartialWaveField& f) {
    PartialWaveField out = apply_p_r(f);
    const RadialGrid& g = *f.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx b = phase_b(spec, z, g.r[i]);
        for (std::size_t k = 0; k < out.sectors(); ++k)
            out.u[k][i] -= double(z.sign) * b * f.u[k][i];
    }
    return out;
}

// ---- angular form ------------------------------------------------------------

// sum_ell ell(ell+d-2) int w(r) r^{-2} |u_ell|^2 dr, cells clipped at r_hi.
// The weight must be nonnegative wherever it is sampled.
inline double angular_form(const PartialWaveField& f, const std::function<double(double)>& w,
                           double r_hi = std::numeric_limits<double>::infinity()) {
    const RadialGrid& g = *f.grid;
    const int d = g.dim;
    double total = 0.0;
    for (std::size_t k = 0; k < f.sectors(); ++k) {
        double fac = double(f.ells[k]) * (f.ells[k] + d - 2);
        if (fac == 0.0) continue;
        double acc = 0.0;
        auto integrand = [&](double r) {
            double wr = w(r);
            if (wr < 0.0) throw std::invalid_argument("angular_form: negative weight");
            cplx u = eval_sector(f, k, r);
            return wr * std::norm(u) / (r * r);
        };
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            if (g.r[i + 1] > r_hi) break;
            acc += gl4_panel(integrand, g.r[i], g.r[i + 1]);
        }
        total += fac * acc;
    }
    return total;
}

// ---- eigenvalue scans -----------------------------------------------------------

struct JostPoint {
    double lambda = 0.0;
    double tail_ratio = 0.0; // tail envelope of u_reg over its global peak
    bool decays = false;     // detector for a square-integrable tail
};

struct JostReport {
    int ell = 0;
    std::vector<JostPoint> points;
    double min_ratio = std::numeric_limits<double>::infinity();
    bool zero_free = true;
};

// Scans real energies for square-integrable regular solutions. The envelope
// sqrt(a_loc |u|^2 + |u'|^2 / a_loc) stays order-one for scattering energies;
// an eigenvalue collapses the tail by many orders. Negative lambda is allowed
// so a control well can demonstrate that the detector fires.
inline JostReport jost_scan(const PotentialSpec& spec, int ell, const std::vector<double>& lambdas,
                            GridPtr grid, double rtol = 1e-11) {
    JostReport rep;
    rep.ell = ell;
    const RadialGrid& g = *grid;
    const double half = 0.5 * g.r.back();
    auto zero = [](double) { return cplx{}; };
    for (double lam : lambdas) {
        auto reg = detail::integrate_pass(spec, ell, cplx(lam, 0.0), +1, g, true, zero, rtol);
        double peak = -std::numeric_limits<double>::infinity();
        double tail = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double veff = reduced_potential(spec, ell, g.r[i]);
            double floor = 1e-3 * (1.0 + std::abs(lam)); // forbidden-region regularization
            double aloc = std::sqrt(2.0 * std::max(lam - veff, floor));
            double m2 = aloc * std::norm(reg.u[i]) + std::norm(reg.v[i]) / aloc;
            if (m2 <= 0.0) continue;
            double loge = reg.sigma[i] + 0.5 * std::log(m2);
            peak = std::max(peak, loge);
            if (g.r[i] >= half) tail = std::min(tail, loge);
        }
        JostPoint p;
        p.lambda = lam;
        p.tail_ratio = std::exp(tail - peak);
        p.decays = !(p.tail_ratio >= 1e-3);
        rep.min_ratio = std::min(rep.min_ratio, p.tail_ratio);
        rep.zero_free = rep.zero_free && !p.decays;
        rep.points.push_back(p);
    }
    return rep;
}

// Bisection for a genuine negative eigenvalue: at lambda < 0 the regular
// solution escapes to +-infinity at R_max and the sign flips exactly at
// eigenvalues of the reduced operator.
inline double shooting_eigenvalue(const PotentialSpec& spec, int ell, double lo, double hi,
                                  GridPtr grid, double rtol = 1e-11) {
    if (!(lo < hi)) throw std::invalid_argument("shooting_eigenvalue: need lo < hi");
    auto zero = [](double) { return cplx{}; };
    auto endpoint = [&](double lam) {
        auto reg = detail::integrate_pass(spec, ell, cplx(lam, 0.0), +1, *grid, true, zero, rtol);
        return reg.u.back().real();
    };
    double flo = endpoint(lo), fhi = endpoint(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("shooting_eigenvalue: no sign change over [lo, hi]");
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = endpoint(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section minimum of the jost tail ratio over [lo, hi]; localizes the
// energy at which the detector fires hardest.
inline std::pair<double, double> jost_minimum(const PotentialSpec& spec, int ell, double lo,
                                              double hi, GridPtr grid, int iters = 60,
                                              double rtol = 1e-11) {
    // The tail ratio itself cannot localize the eigenvalue: below the
    // continuum every regular solution, eigenstate or not, leaves the last
    // node at the envelope peak (rounding admixture of the growing branch
    // overtakes the decaying one well before the boundary), so the ratio sits
    // on a flat noise floor across the whole bracket. What does move is the
    // renormalized endpoint magnitude log|u(R)| + sigma(R): it crosses zero
    // linearly in lambda at the eigenvalue, a clean V for golden section.
    auto zero = [](double) { return cplx{}; };
    auto endpoint = [&](double lam) {
        auto reg = detail::integrate_pass(spec, ell, cplx(lam, 0.0), +1, *grid, true, zero, rtol);
        double mag = std::abs(reg.u.back());
        return reg.sigma.back() + (mag > 0.0 ? std::log(mag) : -1e300);
    };
    // Coarse odd-count scan first so the golden bracket starts on the correct
    // descending flank even if the V is narrow relative to [lo, hi].
    const int npre = 33;
    const double step = (hi - lo) / double(npre - 1);
    double best_x = lo, best_f = std::numeric_limits<double>::infinity();
    for (int i = 0; i < npre; ++i) {
        double x = lo + step * double(i);
        double f = endpoint(x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = endpoint(x1), f2 = endpoint(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = endpoint(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = endpoint(x2);
        }
    }
    double lam_star = f1 < f2 ? x1 : x2;
    if (best_f < std::min(f1, f2))
        lam_star = best_x;
    // Report the detector's own statistic at the located minimum so callers
    // can apply the same firing threshold the scan uses.
    return {lam_star, jost_scan(spec, ell, {lam_star}, grid, rtol).points[0].tail_ratio};
}

// ---- cross-check integrator ---------------------------------------------------

// Fixed-step Numerov propagation of the same reduced equation; an independent
// discretization with a different error law, seeded by two starting values.
inline std::vector<cplx> numerov_mode(const PotentialSpec& spec, int ell, cplx z, double r_lo,
                                      double r_hi, std::size_t n_steps, cplx u0, cplx u1) {
    if (!(r_hi > r_lo) || n_steps < 2)
        throw std::invalid_argument("numerov_mode: bad range or step count");
    const double h = (r_hi - r_lo) / double(n_steps);
    const double h12 = h * h / 12.0;
    auto f = [&](double r) { return 2.0 * (cplx(reduced_potential(spec, ell, r)) - z); };
    std::vector<cplx> u(n_steps + 1);
    u[0] = u0;
    u[1] = u1;
    cplx fm = f(r_lo), fc = f(r_lo + h);
    for (std::size_t i = 1; i < n_steps; ++i) {
        cplx fp = f(r_lo + double(i + 1) * h);
        u[i + 1] =
            (2.0 * u[i] * (1.0 + 5.0 * h12 * fc) - u[i - 1] * (1.0 - h12 * fm)) / (1.0 - h12 * fp);
        fm = fc;
        fc = fp;
    }
    return u;
}

} // namespace laplab
