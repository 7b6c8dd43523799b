#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "laplab/efftime.hpp"
#include "laplab/field.hpp"
#include "laplab/radial.hpp"

namespace laplab {

// Fixed, versioned family of test sources: C2 bumps over travel-time shells
// {2,3,4} in sectors 0..2, plus one Gaussian. Experiments maximize ratios over
// this family only, so its membership is part of every report's meaning; bump
// the version when changing anything here.
inline constexpr int source_family_version = 1;

struct SourceSpec {
    std::string name;
    int ell = 0;
    int shell = 0; // travel-time shell of the bump; 0 marks the Gaussian
};

inline std::vector<SourceSpec> source_family(int lmax = 2) {
    std::vector<SourceSpec> fam;
    for (int shell = 2; shell <= 4; ++shell)
        for (int ell = 0; ell <= lmax && ell <= 2; ++ell)
            fam.push_back({"shell" + std::to_string(shell) + "_l" + std::to_string(ell), ell,
                           shell});
    fam.push_back({"gauss_l0", 0, 0});
    return fam;
}

namespace detail {

// (1 - t^2)^3 on |t| < 1: compactly supported with two continuous derivatives,
// which keeps the B norm finite and the solver error smooth.
inline double bump3(double t) {
    double s = 1.0 - t * t;
    return s > 0.0 ? s * s * s : 0.0;
}

} // namespace detail

// Reduced single-sector source localized in the travel-time variable of the
// table (bumps) or at fixed radius (the Gaussian). The analytic callback is
// what the solver integrates; node samples serve the norm plumbing.
inline PartialWaveField make_source(const SourceSpec& s,
                                    std::shared_ptr<const EffTimeTable> table) {
    GridPtr g = table->grid;
    PartialWaveField f = PartialWaveField::zeros(g, {s.ell});
    f.analytic.resize(1);
    const double alpha = origin_exponent(s.ell, g->dim);
    std::function<cplx(double)> profile;
    if (s.shell == 0) {
        profile = [alpha](double r) {
            double t = (r - 4.0) / 1.5;
            return cplx(std::pow(r / 4.0, alpha) * std::exp(-t * t));
        };
    } else {
        // tau_refined is smooth between nodes, so the bump stays C2 in r
        double tc = 1.5 * std::ldexp(1.0, s.shell - 1);
        double th = 0.45 * std::ldexp(1.0, s.shell - 1);
        profile = [table, tc, th](double r) {
            return cplx(detail::bump3((table->tau_refined(r) - tc) / th));
        };
    }
    f.analytic[0] = profile;
    for (std::size_t i = 0; i < g->size(); ++i) f.u[0][i] = profile(g->r[i]);
    return f;
}

// The 2^-m contraction of the family member in plain radius, normalized so
// the L2 mass is m-independent: u_m(r) = 2^{m/2} u_0(2^m r). Pairs with the
// |x|-shell decompositions at scale offset m.
inline PartialWaveField make_scaled_source(const SourceSpec& s, GridPtr g, int m) {
    PartialWaveField f = PartialWaveField::zeros(g, {s.ell});
    f.analytic.resize(1);
    const double alpha = origin_exponent(s.ell, g->dim);
    const double scale = std::ldexp(1.0, m);
    const double amp = std::sqrt(scale);
    std::function<cplx(double)> profile;
    if (s.shell == 0) {
        profile = [alpha, amp, scale](double r) {
            double x = scale * r;
            double t = (x - 4.0) / 1.5;
            return cplx(amp * std::pow(x / 4.0, alpha) * std::exp(-t * t));
        };
    } else {
        double rc = 1.5 * std::ldexp(1.0, s.shell - 1);
        double rh = 0.45 * std::ldexp(1.0, s.shell - 1);
        profile = [amp, scale, rc, rh](double r) {
            return cplx(amp * detail::bump3((scale * r - rc) / rh));
        };
    }
    f.analytic[0] = profile;
    for (std::size_t i = 0; i < g->size(); ++i) f.u[0][i] = profile(g->r[i]);
    return f;
}

} // namespace laplab
