#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "laplab/grid.hpp"

namespace laplab {

// Partial-wave data on a radial grid. Each sector stores the reduced wave
// u_l(r) = r^((d-1)/2) * (sector coefficient), so plain dr integrals of |u|^2
// carry the full r^(d-1) measure. Fields produced by the resolvent also carry
// du = u' at integrator accuracy; analytic sources carry an evaluator for
// in-cell quadrature.
struct PartialWaveField {
    GridPtr grid;
    std::vector<int> ells;
    std::vector<std::vector<cplx>> u;
    std::vector<std::vector<cplx>> du;                      // empty if unavailable
    std::vector<std::function<cplx(double)>> analytic;      // empty slots allowed
    std::optional<cplx> produced_at;                        // z for resolvent outputs

    std::size_t sectors() const { return ells.size(); }
    bool has_du() const { return !du.empty(); }

    static PartialWaveField zeros(GridPtr g, std::vector<int> ells_, bool with_du = false) {
        PartialWaveField f;
        f.grid = std::move(g);
        f.ells = std::move(ells_);
        f.u.assign(f.ells.size(), std::vector<cplx>(f.grid->size(), cplx(0.0)));
        if (with_du) f.du.assign(f.ells.size(), std::vector<cplx>(f.grid->size(), cplx(0.0)));
        return f;
    }

    void check_compatible(const PartialWaveField& o) const {
        if (grid != o.grid && (grid->r != o.grid->r || grid->dim != o.grid->dim))
            throw std::invalid_argument("PartialWaveField: grids do not match");
        if (ells != o.ells)
            throw std::invalid_argument("PartialWaveField: sector lists do not match");
    }
};

// y += alpha * x
inline void axpy(cplx alpha, const PartialWaveField& x, PartialWaveField& y) {
    y.check_compatible(x);
    for (std::size_t k = 0; k < y.sectors(); ++k) {
        for (std::size_t i = 0; i < y.u[k].size(); ++i) y.u[k][i] += alpha * x.u[k][i];
        if (y.has_du() && x.has_du())
            for (std::size_t i = 0; i < y.du[k].size(); ++i) y.du[k][i] += alpha * x.du[k][i];
    }
    if (y.has_du() && !x.has_du()) y.du.clear();
    y.analytic.clear();
}

inline PartialWaveField subtract(const PartialWaveField& a, const PartialWaveField& b) {
    a.check_compatible(b);
    PartialWaveField out = a;
    out.analytic.clear();
    for (std::size_t k = 0; k < out.sectors(); ++k) {
        for (std::size_t i = 0; i < out.u[k].size(); ++i) out.u[k][i] -= b.u[k][i];
        if (out.has_du() && b.has_du())
            for (std::size_t i = 0; i < out.du[k].size(); ++i) out.du[k][i] -= b.du[k][i];
    }
    if (out.has_du() && !b.has_du()) out.du.clear();
    return out;
}

// Multiplies every sector by a radial weight. If the weight's derivative is
// supplied the carried u' data stays valid, otherwise it is dropped.
inline PartialWaveField multiply_radial(const PartialWaveField& f,
                                        const std::function<double(double)>& w,
                                        const std::function<double(double)>& dw = {}) {
    PartialWaveField out = f;
    out.analytic.clear();
    bool keep_du = f.has_du() && bool(dw);
    if (!keep_du) out.du.clear();
    const auto& r = f.grid->r;
    for (std::size_t k = 0; k < f.sectors(); ++k) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            double wi = w(r[i]);
            if (keep_du) out.du[k][i] = wi * f.du[k][i] + dw(r[i]) * f.u[k][i];
            out.u[k][i] *= wi;
        }
    }
    return out;
}

// In-cell evaluation of one sector: analytic evaluator when present, cubic
// Hermite from carried derivatives otherwise, 4-node Lagrange as fallback.
inline cplx eval_sector(const PartialWaveField& f, std::size_t k, double r) {
    if (k < f.analytic.size() && f.analytic[k]) return f.analytic[k](r);
    const auto& x = f.grid->r;
    std::size_t i = f.grid->cell_of(r);
    if (f.has_du()) {
        double h = x[i + 1] - x[i];
        double t = (r - x[i]) / h;
        double h00 = 2 * t * t * t - 3 * t * t + 1;
        double h10 = t * t * t - 2 * t * t + t;
        double h01 = -2 * t * t * t + 3 * t * t;
        double h11 = t * t * t - t * t;
        return h00 * f.u[k][i] + h10 * h * f.du[k][i] + h01 * f.u[k][i + 1] +
               h11 * h * f.du[k][i + 1];
    }
    std::size_t n = x.size();
    std::size_t j0 = (i == 0) ? 0 : std::min(i - 1, n - 4);
    cplx acc = 0.0;
    for (std::size_t a = j0; a < j0 + 4; ++a) {
        double L = 1.0;
        for (std::size_t b = j0; b < j0 + 4; ++b)
            if (b != a) L *= (r - x[b]) / (x[a] - x[b]);
        acc += L * f.u[k][a];
    }
    return acc;
}

} // namespace laplab
