#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "laplab/common.hpp"
#include "laplab/efftime.hpp"
#include "laplab/field.hpp"
#include "laplab/grid.hpp"
#include "laplab/norms.hpp"
#include "laplab/potential.hpp"
#include "laplab/radial.hpp"
#include "laplab/sources.hpp"

namespace laplab {

// ---- plans -----------------------------------------------------------------

// One declarative description shared by all experiment drivers; each driver
// reads the fields it needs. Defaults reproduce the shipped verification runs.
struct SweepPlan {
    PotentialSpec spec;
    std::vector<double> lambdas{0.0, 0.5, 1.0, 2.0};
    std::vector<double> mus{1e-1, 1e-2, 1e-3, 1e-4};
    int sign = +1;
    double rho = 8.0;   // sector radius the (lambda, mu) pairs must respect
    double omega = 3.0; // sector aperture in radians

    std::vector<double> betas; // radiation weight exponents, each < beta_c
    double s = 1.0;            // Hoelder weight exponent
    double gamma = 0.25;       // Hoelder target exponent

    int m_lo = 0, m_hi = 5;  // dyadic range of the scaling sweep
    double aperture = 0.5;   // high-energy region: mu = aperture*sqrt(lambda)/2

    int lmax = 2;            // sectors of the source family
    double rmax = 4096.0;    // domain of the travel-time experiments
    double ratio = 1.01;
    double rtol = 1e-11;
    int jobs = 1;
    std::uint64_t seed = 1;

    double rmax_high_energy = 64.0; // damped regime needs no far field
    double rmax_sommerfeld = 128.0;  // mu ladder starts at 1e-2, so mu*tau(R/2) must stay small
    double rmax_rellich = 256.0;
    double rellich_lo = 0.0, rellich_hi = 4.0;
    int rellich_points = 41;
    int rellich_lmax = 8;

    double beta_c_value() const {
        GridPtr g = share(RadialGrid::table(std::max(rmax, 1000.0), 1.02, spec.dim));
        return beta_c(spec, rho, g).value;
    }

    void validate() const {
        spec.validate();
        if (lambdas.empty() || mus.empty())
            throw std::invalid_argument("SweepPlan: empty lambda or mu list");
        for (double l : lambdas)
            if (l < 0.0) throw std::invalid_argument("SweepPlan: lambda must be >= 0");
        for (double m : mus)
            if (!(m > 0.0)) throw std::invalid_argument("SweepPlan: mu entries must be positive");
        if (sign != 1 && sign != -1) throw std::invalid_argument("SweepPlan: sign must be +-1");
        for (double l : lambdas)
            for (double m : mus) {
                SpectralParam z{l, m, sign};
                if (!z.in_sector(rho, omega)) {
                    std::ostringstream msg;
                    msg << "SweepPlan: (" << l << "," << m << ") outside the declared sector";
                    throw std::invalid_argument(msg.str());
                }
            }
        if (!(rmax > 0.0) || !(ratio > 1.0) || !(rtol > 0.0) || lmax < 0)
            throw std::invalid_argument("SweepPlan: bad grid or tolerance parameters");
        if (!betas.empty()) {
            double bc = beta_c_value();
            for (double b : betas)
                if (!(b >= 0.0 && b < bc)) {
                    std::ostringstream msg;
                    msg << "SweepPlan: beta=" << b << " violates beta < beta_c=" << bc;
                    throw std::invalid_argument(msg.str());
                }
        }
    }
};

// ---- reports ---------------------------------------------------------------

struct Verdict {
    std::string name;
    std::string invariant; // the contract this verdict instantiates
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string relation; // how measured compares against bound
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    std::vector<Verdict> verdicts;

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }

    nlohmann::ordered_json to_json(bool with_timestamp = true) const {
        nlohmann::ordered_json j;
        j["experiment"] = experiment;
        j["meta"] = meta;
        j["records"] = records;
        auto vs = nlohmann::ordered_json::array();
        for (const auto& v : verdicts)
            vs.push_back({{"name", v.name},
                          {"invariant", v.invariant},
                          {"pass", v.pass},
                          {"measured", v.measured},
                          {"bound", v.bound},
                          {"relation", v.relation}});
        j["verdicts"] = vs;
        if (with_timestamp) {
            std::time_t t = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
            j["generated_at"] = buf;
        }
        return j;
    }
};

namespace detail {

// Every experiment consumes resolvent output through this gate, so the
// residual and Wronskian contracts are asserted on every run, not just in the
// test suite.
inline ResolventResult checked_resolvent(const PotentialSpec& spec, const SpectralParam& z,
                                         const PartialWaveField& psi, double rtol) {
    ResolventResult rr = apply_resolvent(spec, z, psi, rtol);
    if (!(rr.residual_rel <= 1e-6)) {
        std::ostringstream msg;
        msg << "resolvent residual contract violated: " << rr.residual_rel << " at z=("
            << z.lambda << "," << z.sign * z.mu << ")";
        throw numerical_error(msg.str());
    }
    if (!(rr.wronskian_variation <= 1e-6))
        throw numerical_error("Wronskian constancy contract violated");
    return rr;
}

struct SweepContext {
    GridPtr grid;
    std::shared_ptr<const EffTimeTable> table;
    DyadicDecomposition dec;
    std::vector<SourceSpec> family;
    std::vector<PartialWaveField> sources;
};

inline SweepContext make_context(const SweepPlan& plan, double lambda, double mu_max) {
    SweepContext c;
    SolverGridOptions gopt;
    gopt.ratio = plan.ratio;
    c.grid = share(solver_grid(plan.spec, lambda, mu_max, plan.rmax, gopt));
    c.table = std::make_shared<EffTimeTable>(build_efftime(plan.spec, lambda, c.grid));
    c.dec = DyadicDecomposition::from_tau(*c.table);
    c.family = source_family(plan.lmax);
    for (const auto& s : c.family) c.sources.push_back(make_source(s, c.table));
    return c;
}

inline nlohmann::ordered_json base_meta(const SweepPlan& plan, const std::string& experiment) {
    nlohmann::ordered_json m;
    m["experiment"] = experiment;
    m["potential"] = plan.spec.name;
    m["sign"] = plan.sign;
    m["rmax"] = plan.rmax;
    m["grid_ratio"] = plan.ratio;
    m["rtol"] = plan.rtol;
    m["lmax"] = plan.lmax;
    m["source_family_version"] = source_family_version;
    m["seed"] = plan.seed;
    return m;
}

// Last three strictly positive entries of a shell profile restricted to
// complete shells; pass iff they decrease. Returns {pass, worst ratio}.
inline std::pair<bool, double> profile_decreases(const DyadicDecomposition& dec,
                                                 const ShellProfile& p, double r_hi) {
    std::vector<double> vals;
    for (std::size_t b = 0; b + 1 < dec.shells(); ++b) {
        // bin b is complete below r_hi iff its upper threshold lies inside
        if (b < dec.bounds.size() && dec.bounds[b] <= r_hi && p.value[b] > 0.0)
            vals.push_back(p.value[b]);
    }
    if (vals.size() < 3) return {false, std::numeric_limits<double>::infinity()};
    double v1 = vals[vals.size() - 3], v2 = vals[vals.size() - 2], v3 = vals.back();
    double worst = std::max(v2 / v1, v3 / v2);
    return {worst < 1.0, worst};
}

} // namespace detail

// ---- limiting absorption sweep ----------------------------------------------

// For each (lambda, mu) and each family source: phi = R(z) psi, then the three
// weighted quantities of the main estimate, each over ||psi||_B, recorded as
// the sup over the family. PASS iff per lambda each weighted ratio grows by at
// most x3 from the largest mu to the smallest, while the unweighted L2 ratio
// at lambda > 0 grows by at least x10 over the same range.
inline ExperimentReport lap_sweep(const SweepPlan& plan) {
    plan.validate();
    ExperimentReport rep;
    rep.experiment = "lap_sweep";
    rep.meta = detail::base_meta(plan, rep.experiment);

    struct Point {
        double lambda = 0, mu = 0;
        double wphi = 0, wpr = 0, wang = 0, l2 = 0;
        double resid = 0, wvar = 0;
        std::string peak_source;
    };
    const std::size_t M = plan.mus.size();
    std::vector<Point> pts(plan.lambdas.size() * M);
    const double mu_max = *std::max_element(plan.mus.begin(), plan.mus.end());

    for (std::size_t li = 0; li < plan.lambdas.size(); ++li) {
        const double lam = plan.lambdas[li];
        auto ctx = detail::make_context(plan, lam, mu_max);
        const double half = 0.5 * ctx.grid->back();
        auto ang_w = [&](double r) {
            double t = ctx.table->tau_at(r);
            return 1.0 / (sq(speed_a(plan.spec, lam, r)) * std::sqrt(1.0 + t * t));
        };
        parallel_for(M, plan.jobs, [&](std::size_t mi) {
            const double mu = plan.mus[mi];
            SpectralParam z{lam, mu, plan.sign};
            Point p;
            p.lambda = lam;
            p.mu = mu;
            for (std::size_t si = 0; si < ctx.sources.size(); ++si) {
                const auto& psi = ctx.sources[si];
                auto rr = detail::checked_resolvent(plan.spec, z, psi, plan.rtol);
                double bpsi = norm_B(ctx.dec, psi);
                double wphi = norm_Bstar(ctx.dec, rr.phi, 0.0, half) / bpsi;
                auto pr = apply_a_inv_p_r(plan.spec, lam, rr.phi);
                double wpr = norm_Bstar(ctx.dec, pr, 0.0, half) / bpsi;
                double wang = std::sqrt(angular_form(rr.phi, ang_w, half)) / bpsi;
                double l2r = l2_norm(rr.phi) / l2_norm(psi);
                if (wphi > p.wphi) {
                    p.wphi = wphi;
                    p.peak_source = ctx.family[si].name;
                }
                p.wpr = std::max(p.wpr, wpr);
                p.wang = std::max(p.wang, wang);
                p.l2 = std::max(p.l2, l2r);
                p.resid = std::max(p.resid, rr.residual_rel);
                p.wvar = std::max(p.wvar, rr.wronskian_variation);
            }
            pts[li * M + mi] = p;
        });
    }

    for (const auto& p : pts)
        rep.records.push_back({{"lambda", p.lambda},
                               {"mu", p.mu},
                               {"bstar_phi_over_b_psi", p.wphi},
                               {"bstar_pr_over_b_psi", p.wpr},
                               {"angular_over_b_psi", p.wang},
                               {"l2_ratio", p.l2},
                               {"residual_rel", p.resid},
                               {"wronskian_variation", p.wvar},
                               {"peak_source", p.peak_source}});

    auto mu_lo = std::min_element(plan.mus.begin(), plan.mus.end()) - plan.mus.begin();
    auto mu_hi = std::max_element(plan.mus.begin(), plan.mus.end()) - plan.mus.begin();
    for (std::size_t li = 0; li < plan.lambdas.size(); ++li) {
        const Point& a = pts[li * M + std::size_t(mu_lo)];
        const Point& b = pts[li * M + std::size_t(mu_hi)];
        std::ostringstream tag;
        tag << "lambda_" << plan.lambdas[li];
        auto bounded = [&](const char* what, double lo, double hi) {
            Verdict v;
            v.name = std::string("lap_bounded_") + what + "_" + tag.str();
            v.invariant = "weighted ratio stays within x3 as mu decreases to its minimum";
            v.measured = lo / hi;
            v.bound = 3.0;
            v.relation = "<=";
            v.pass = v.measured <= v.bound;
            rep.verdicts.push_back(v);
        };
        bounded("phi", a.wphi, b.wphi);
        bounded("pr", a.wpr, b.wpr);
        bounded("angular", a.wang, b.wang);
        if (plan.lambdas[li] > 0.0) {
            Verdict v;
            v.name = "lap_contrast_" + tag.str();
            v.invariant = "unweighted L2 ratio grows by x10 as mu decreases (the weighted "
                          "norms are doing work)";
            v.measured = a.l2 / b.l2;
            v.bound = 10.0;
            v.relation = ">=";
            v.pass = v.measured >= v.bound;
            rep.verdicts.push_back(v);
        }
    }
    return rep;
}

// ---- radiation condition -----------------------------------------------------

// Measures ||tau^beta a^{-1}(p_r -+ b_z) phi||_{B*} and the weighted angular
// form over ||<tau>^beta psi||_B across the mu sweep, then the mu = 0 shell
// profile whose decay expresses B*_0 membership of the radiation defect.
inline ExperimentReport radiation_probe(const SweepPlan& plan) {
    plan.validate();
    if (plan.betas.empty())
        throw std::invalid_argument("radiation_probe: plan must list at least one beta");
    ExperimentReport rep;
    rep.experiment = "radiation_probe";
    rep.meta = detail::base_meta(plan, rep.experiment);
    rep.meta["betas"] = plan.betas;

    const std::size_t M = plan.mus.size();
    struct Point {
        double lambda = 0, mu = 0, beta = 0;
        double rad = 0, ang = 0;
    };
    const double mu_max = *std::max_element(plan.mus.begin(), plan.mus.end());

    for (double lam : plan.lambdas) {
        auto ctx = detail::make_context(plan, lam, mu_max);
        const double half = 0.5 * ctx.grid->back();
        auto ainv = [&](double r) { return 1.0 / speed_a(plan.spec, lam, r); };
        for (double beta : plan.betas) {
            auto w_b = [&](double r) { return std::pow(1.0 + sq(ctx.table->tau_at(r)), beta); };
            auto w_tau = [&](double r) { return std::pow(sq(ctx.table->tau_at(r)), beta); };
            auto w_ang = [&](double r) {
                double t = ctx.table->tau_at(r);
                return std::pow(t * t, beta) /
                       (sq(speed_a(plan.spec, lam, r)) * std::sqrt(1.0 + t * t));
            };
            std::vector<Point> pts(M);
            parallel_for(M, plan.jobs, [&](std::size_t mi) {
                SpectralParam z{lam, plan.mus[mi], plan.sign};
                Point p;
                p.lambda = lam;
                p.mu = plan.mus[mi];
                p.beta = beta;
                for (const auto& psi : ctx.sources) {
                    auto rr = detail::checked_resolvent(plan.spec, z, psi, plan.rtol);
                    auto ad = multiply_radial(apply_radiation_defect(plan.spec, z, rr.phi), ainv);
                    double den = norm_B(ctx.dec, psi, 0.0,
                                        std::numeric_limits<double>::infinity(), w_b);
                    p.rad = std::max(p.rad, norm_Bstar(ctx.dec, ad, 0.0, half, w_tau) / den);
                    p.ang = std::max(p.ang,
                                     std::sqrt(angular_form(rr.phi, w_ang, half)) / den);
                }
                pts[mi] = p;
            });
            for (const auto& p : pts)
                rep.records.push_back({{"lambda", p.lambda},
                                       {"mu", p.mu},
                                       {"beta", p.beta},
                                       {"radiation_ratio", p.rad},
                                       {"angular_ratio", p.ang}});

            auto mu_lo = std::min_element(plan.mus.begin(), plan.mus.end()) - plan.mus.begin();
            auto mu_hi = std::max_element(plan.mus.begin(), plan.mus.end()) - plan.mus.begin();
            std::ostringstream tag;
            tag << "lambda_" << lam << "_beta_" << beta;
            Verdict v;
            v.name = "radiation_bounded_" + tag.str();
            v.invariant = "radiation-defect ratio stays within x3 as mu decreases";
            v.measured = pts[std::size_t(mu_lo)].rad / pts[std::size_t(mu_hi)].rad;
            v.bound = 3.0;
            v.relation = "<=";
            v.pass = v.measured <= v.bound;
            rep.verdicts.push_back(v);

        }

        // boundary case mu = 0: the defect's shell profile must fall off. The
        // weight beta plays no role here, and the last three shells have to
        // sit beyond the source family (inside the support the profile reads
        // the forced response, not the radiated wave), so the domain must
        // span at least three tau octaves past the widest source.
        {
            SpectralParam z0{lam, 0.0, plan.sign};
            bool all_decrease = true;
            double worst = 0.0;
            for (const auto& psi : ctx.sources) {
                auto rr = detail::checked_resolvent(plan.spec, z0, psi, plan.rtol);
                auto ad = multiply_radial(apply_radiation_defect(plan.spec, z0, rr.phi), ainv);
                auto prof = tail_profile(ctx.dec, ad, 0.0, half);
                auto [ok, ratio] = detail::profile_decreases(ctx.dec, prof, half);
                all_decrease = all_decrease && ok;
                worst = std::max(worst, ratio);
            }
            Verdict pv;
            std::ostringstream tag;
            tag << "lambda_" << lam;
            pv.name = "radiation_profile_decay_" + tag.str();
            pv.invariant = "shell profile of a^{-1}(p_r - b) phi decreases over the last three "
                           "complete shells at mu = 0";
            pv.measured = worst;
            pv.bound = 1.0;
            pv.relation = "<";
            pv.pass = all_decrease;
            rep.verdicts.push_back(pv);
        }

        // conjugation control on the first (mu, beta) pair: the lower branch on
        // the same (real) data must reproduce the upper-branch defect norm
        {
            SpectralParam zp{lam, plan.mus.front(), +1};
            SpectralParam zm{lam, plan.mus.front(), -1};
            const auto& psi = ctx.sources.front();
            double beta = plan.betas.front();
            auto w_tau = [&](double r) { return std::pow(sq(ctx.table->tau_at(r)), beta); };
            auto radn = [&](const SpectralParam& z) {
                auto rr = detail::checked_resolvent(plan.spec, z, psi, plan.rtol);
                auto ad = multiply_radial(apply_radiation_defect(plan.spec, z, rr.phi), ainv);
                return norm_Bstar(ctx.dec, ad, 0.0, half, w_tau);
            };
            double rp = radn(zp), rm = radn(zm);
            Verdict v;
            std::ostringstream tag;
            tag << "lambda_" << lam;
            v.name = "radiation_conjugation_" + tag.str();
            v.invariant = "lower-branch defect norm matches the conjugate upper-branch run";
            v.measured = std::abs(rm / rp - 1.0);
            v.bound = 1e-6;
            v.relation = "<=";
            v.pass = v.measured <= v.bound;
            rep.verdicts.push_back(v);
        }
    }
    return rep;
}

// ---- Hoelder continuity --------------------------------------------------------

// D(z, z') in the <tau>-weighted pair of norms over geometric separations
// |z - z'| = 2^-j, fitted for its power law. The probe approaches the spectrum
// vertically on one branch, so the sequence doubles as the monotone-approach
// record.
inline ExperimentReport hoelder_probe(const SweepPlan& plan) {
    plan.validate();
    if (!(plan.s > 0.5))
        throw std::invalid_argument("hoelder_probe: s must exceed 1/2");
    double bc = plan.beta_c_value();
    if (!(plan.gamma < std::min(plan.s - 0.5, bc))) {
        std::ostringstream msg;
        msg << "hoelder_probe: gamma=" << plan.gamma << " must be below min(s-1/2="
            << plan.s - 0.5 << ", beta_c=" << bc << ")";
        throw std::invalid_argument(msg.str());
    }
    ExperimentReport rep;
    rep.experiment = "hoelder_probe";
    rep.meta = detail::base_meta(plan, rep.experiment);
    rep.meta["s"] = plan.s;
    rep.meta["gamma"] = plan.gamma;
    rep.meta["beta_c"] = bc;

    const int jmax = 8;
    const double mu0 = *std::min_element(plan.mus.begin(), plan.mus.end());
    for (double lam : plan.lambdas) {
        auto ctx = detail::make_context(plan, lam, mu0 + 0.5);
        SpectralParam z0{lam, mu0, plan.sign};

        std::vector<PartialWaveField> base;
        base.reserve(ctx.sources.size());
        for (const auto& psi : ctx.sources)
            base.push_back(detail::checked_resolvent(plan.spec, z0, psi, plan.rtol).phi);

        std::vector<double> dvals(jmax, 0.0), dpvals(jmax, 0.0);
        parallel_for(jmax, plan.jobs, [&](std::size_t ji) {
            int j = int(ji) + 1;
            SpectralParam zj{lam, mu0 + std::ldexp(1.0, -j), plan.sign};
            double dj = 0.0, dpj = 0.0;
            for (std::size_t si = 0; si < ctx.sources.size(); ++si) {
                auto rr = detail::checked_resolvent(plan.spec, zj, ctx.sources[si], plan.rtol);
                auto diff = subtract(rr.phi, base[si]);
                double den = weighted_norm(ctx.sources[si], plan.s, *ctx.table);
                dj = std::max(dj, weighted_norm(diff, -plan.s, *ctx.table) / den);
                auto prd = apply_a_inv_p_r(plan.spec, lam, diff);
                dpj = std::max(dpj, weighted_norm(prd, -plan.s, *ctx.table) / den);
            }
            dvals[ji] = dj;
            dpvals[ji] = dpj;
        });

        std::vector<double> xs, ys, yps;
        for (int j = 1; j <= jmax; ++j) {
            rep.records.push_back({{"lambda", lam},
                                   {"dz", std::ldexp(1.0, -j)},
                                   {"d", dvals[j - 1]},
                                   {"d_pr", dpvals[j - 1]}});
            xs.push_back(-j * std::log(2.0));
            ys.push_back(std::log(dvals[j - 1]));
            yps.push_back(std::log(dpvals[j - 1]));
        }

        std::ostringstream tag;
        tag << "lambda_" << lam;
        Verdict v;
        v.name = "hoelder_exponent_" + tag.str();
        v.invariant = "fitted exponent of ||R(z)-R(z')|| in the weighted norms reaches the "
                       "target gamma - 0.05";
        v.measured = fit_line(xs, ys).second;
        v.bound = plan.gamma - 0.05;
        v.relation = ">=";
        v.pass = v.measured >= v.bound;
        rep.verdicts.push_back(v);

        Verdict vp = v;
        vp.name = "hoelder_exponent_pr_" + tag.str();
        vp.invariant = "same exponent bound for the a^{-1} p_r variant";
        vp.measured = fit_line(xs, yps).second;
        vp.pass = vp.measured >= vp.bound;
        rep.verdicts.push_back(vp);

        // z = z' degenerate pair and vertical monotone approach
        auto selfdiff = subtract(base[0], base[0]);
        Verdict vz;
        vz.name = "hoelder_zero_separation_" + tag.str();
        vz.invariant = "z = z' gives D = 0 exactly";
        vz.measured = weighted_norm(selfdiff, -plan.s, *ctx.table);
        vz.bound = 0.0;
        vz.relation = "==";
        vz.pass = vz.measured == 0.0;
        rep.verdicts.push_back(vz);

        bool mono = true;
        for (int j = 1; j < jmax; ++j) mono = mono && dvals[j] <= 1.05 * dvals[j - 1];
        Verdict vm;
        vm.name = "hoelder_vertical_monotone_" + tag.str();
        vm.invariant = "D decreases as z' descends to z within the tested range";
        vm.measured = mono ? 1.0 : 0.0;
        vm.bound = 1.0;
        vm.relation = "==";
        vm.pass = mono;
        rep.verdicts.push_back(vm);
    }
    return rep;
}

// ---- Sommerfeld uniqueness -------------------------------------------------------

// Two constructions of the boundary value: Richardson extrapolation of
// R(lambda + i mu) over a fixed mu ladder with a fitted local exponent, and
// the direct mu = 0 outgoing solve. Uniqueness says they coincide; a branch
// flip must break the agreement. Three measurement choices matter here.
// First, each ladder field is renormalized by exp(+mu tau(r)) before
// extrapolating: the damping of the outgoing wave is the dominant and exactly
// known part of the mu dependence, and dividing it out is what keeps the
// ladder, which starts at mu = 1e-2, extrapolable. This also caps the useful
// domain, hence rmax_sommerfeld. Second, the branch flip is measured beyond
// the source support, where the solutions are purely outgoing/incoming and
// differ at order one; over the full window the shared near-field response
// swamps the radiative difference at higher lambda. Third, the defect-profile
// reading needs the opposite domain tradeoff from the ladder: its last three
// shells must clear the source family, so it runs on the full plan domain.
inline ExperimentReport sommerfeld_check(const SweepPlan& plan) {
    plan.validate();
    ExperimentReport rep;
    rep.experiment = "sommerfeld_check";
    rep.meta = detail::base_meta(plan, rep.experiment);
    SweepPlan local = plan;
    local.rmax = plan.rmax_sommerfeld;
    rep.meta["rmax_ladder"] = local.rmax;
    const std::vector<double> ladder{1e-2, 1e-3, 1e-4};
    rep.meta["mu_ladder"] = ladder;

    for (double lam : plan.lambdas) {
        auto ctx = detail::make_context(local, lam, ladder.front());
        auto wctx = detail::make_context(plan, lam, 0.0);
        const double half = 0.5 * ctx.grid->back();
        const double whalf = 0.5 * wctx.grid->back();
        auto ainv = [&](double r) { return 1.0 / speed_a(plan.spec, lam, r); };

        double agree = 0.0, res_b = 0.0, branch = std::numeric_limits<double>::infinity();
        double gamma_fit_min = std::numeric_limits<double>::infinity();
        double gamma_fit_max = -std::numeric_limits<double>::infinity();
        bool converged = true, profiles = true;
        std::vector<nlohmann::ordered_json> recs(ctx.sources.size());

        parallel_for(ctx.sources.size(), plan.jobs, [&](std::size_t si) {
            const auto& psi = ctx.sources[si];
            std::vector<PartialWaveField> phis;
            for (double mu : ladder) {
                SpectralParam z{lam, mu, plan.sign};
                auto rr = detail::checked_resolvent(plan.spec, z, psi, plan.rtol);
                auto w = [&, mu](double r) { return std::exp(mu * ctx.table->tau_refined(r)); };
                auto dw = [&, mu](double r) {
                    return mu / speed_a(plan.spec, lam, r) * std::exp(mu * ctx.table->tau_refined(r));
                };
                phis.push_back(multiply_radial(rr.phi, w, dw));
            }
            SpectralParam z0{lam, 0.0, plan.sign};
            auto rrb = detail::checked_resolvent(plan.spec, z0, psi, plan.rtol);
            SpectralParam zc{lam, 0.0, -plan.sign};
            auto rrc = detail::checked_resolvent(plan.spec, zc, psi, plan.rtol);

            double d12 = norm_Bstar(ctx.dec, subtract(phis[0], phis[1]), 0.0, half);
            double d23 = norm_Bstar(ctx.dec, subtract(phis[1], phis[2]), 0.0, half);
            bool ok = d23 > 0.0 && d12 > d23;
            PartialWaveField phi_a = phis[2];
            double gfit = 0.0;
            if (ok) {
                gfit = std::log10(d12 / d23);
                double c = 1.0 / (std::pow(10.0, gfit) - 1.0);
                axpy(cplx(c), phis[2], phi_a);
                axpy(cplx(-c), phis[1], phi_a);
            }
            double nb = norm_Bstar(ctx.dec, rrb.phi, 0.0, half);
            double ag = norm_Bstar(ctx.dec, subtract(phi_a, rrb.phi), 0.0, half) / nb;

            // radiation zone of this source: past the last node carrying mass
            const auto& gr = ctx.grid->r;
            double smax = 0.0;
            for (std::size_t k = 0; k < psi.sectors(); ++k) {
                double peak = 0.0;
                for (const cplx& v : psi.u[k]) peak = std::max(peak, std::abs(v));
                for (std::size_t i = 0; i < gr.size(); ++i)
                    if (std::abs(psi.u[k][i]) > 1e-14 * peak) smax = std::max(smax, gr[i]);
            }
            const double rad_lo = smax < 0.9 * half ? smax : 0.25 * ctx.grid->back();
            double na = norm_Bstar(ctx.dec, phi_a, rad_lo, half);
            double br = norm_Bstar(ctx.dec, subtract(rrc.phi, phi_a), rad_lo, half) / na;
            auto rrp = detail::checked_resolvent(plan.spec, z0, wctx.sources[si], plan.rtol);
            auto ad = multiply_radial(apply_radiation_defect(plan.spec, z0, rrp.phi), ainv);
            auto [pok, pworst] = detail::profile_decreases(
                wctx.dec, tail_profile(wctx.dec, ad, 0.0, whalf), whalf);

            recs[si] = {{"lambda", lam},         {"source", ctx.family[si].name},
                        {"gamma_fit", gfit},     {"agreement", ag},
                        {"mu0_residual", rrb.residual_rel}, {"wrong_branch_gap", br},
                        {"radiation_zone_lo", rad_lo},
                        {"profile_worst_step", pworst}, {"extrapolation_converged", ok}};

            // reductions below are single-writer per index; final merge is serial
            recs[si]["_agree"] = ag;
            recs[si]["_res"] = rrb.residual_rel;
            recs[si]["_branch"] = br;
            recs[si]["_gfit"] = gfit;
            recs[si]["_conv"] = ok;
            recs[si]["_profile"] = pok;
        });

        for (auto& r : recs) {
            agree = std::max(agree, r["_agree"].get<double>());
            res_b = std::max(res_b, r["_res"].get<double>());
            branch = std::min(branch, r["_branch"].get<double>());
            gamma_fit_min = std::min(gamma_fit_min, r["_gfit"].get<double>());
            gamma_fit_max = std::max(gamma_fit_max, r["_gfit"].get<double>());
            converged = converged && r["_conv"].get<bool>();
            profiles = profiles && r["_profile"].get<bool>();
            for (auto it = r.begin(); it != r.end();)
                it = it.key().rfind('_', 0) == 0 ? r.erase(it) : ++it;
            rep.records.push_back(r);
        }

        std::ostringstream tag;
        tag << "lambda_" << lam;
        auto push = [&](const std::string& name, const std::string& inv, double measured,
                        double bound, const std::string& rel, bool pass) {
            rep.verdicts.push_back({name + "_" + tag.str(), inv, pass, measured, bound, rel});
        };
        push("sommerfeld_agreement",
             "extrapolated and direct mu=0 solutions coincide in B* on the half domain", agree,
             1e-3, "<=", converged && agree <= 1e-3);
        push("sommerfeld_mu0_residual", "direct mu=0 solve meets the equation residual bound",
             res_b, 1e-5, "<=", res_b <= 1e-5);
        push("sommerfeld_radiation_profile",
             "outgoing defect profile of the mu=0 solve falls off over the last shells",
             profiles ? 0.0 : 1.0, 1.0, "<", profiles);
        push("sommerfeld_wrong_branch",
             "incoming solve departs from the outgoing extrapolation beyond the source support",
             branch, 1e-1, ">=", branch >= 1e-1);
        rep.records.push_back({{"lambda", lam},
                               {"gamma_fit_min", gamma_fit_min},
                               {"gamma_fit_max", gamma_fit_max}});
    }
    return rep;
}

// ---- high-energy scaling -----------------------------------------------------------

namespace detail {

// 4^-m-depth dilation V_m(r) = 4^-m (V + q)(2^-m r), tabulated so the dilated
// problem runs through the same solver as everything else while remaining an
// independent numerical route.
inline PotentialSpec dilated_spec(const PotentialSpec& base, int m, double rmax_dilated) {
    const double h = std::ldexp(1.0, -m);
    PotentialSpec s = base;
    s.name = base.name + "_dilated_m" + std::to_string(m);
    s.family = PotentialFamily::tabulated;
    s.terms.clear();
    s.q_family = QFamily::none;
    s.q_amp = 0.0;
    s.table_interp.reset();
    s.table_r.clear();
    s.table_v.clear();
    const std::size_t np = 12000;
    const double r_lo = 1e-6 * rmax_dilated, r_hi = 1.02 * rmax_dilated;
    s.table_r.push_back(0.0);
    {
        PotentialValues pv = eval_potential(base, 0.0);
        s.table_v.push_back(h * h * (pv.V + pv.q));
    }
    double f = std::pow(r_hi / r_lo, 1.0 / double(np - 1));
    double r = r_lo;
    for (std::size_t i = 0; i < np; ++i, r *= f) {
        PotentialValues pv = eval_potential(base, h * r);
        s.table_r.push_back(r);
        s.table_v.push_back(h * h * (pv.V + pv.q));
    }
    return s;
}

} // namespace detail

// Ratios ||R(z_m) psi_m||_{B*(m)} / ||psi_m||_{B(m)} along lambda_m = 2^(2m+1),
// mu_m = aperture sqrt(lambda_m)/2, with the 2^-m-contracted family; the log2
// slope must track -1 (and stay flat for the p_r variant). A direct dilation
// identity pins the bookkeeping: the resolvent of the dilated potential at the
// scaled energy reproduces the base solution node by node.
inline ExperimentReport high_energy_scaling(const SweepPlan& plan) {
    plan.validate();
    if (plan.m_hi < plan.m_lo)
        throw std::invalid_argument("high_energy_scaling: empty m range");
    ExperimentReport rep;
    rep.experiment = "high_energy_scaling";
    rep.meta = detail::base_meta(plan, rep.experiment);
    rep.meta["aperture"] = plan.aperture;
    rep.meta["m_lo"] = plan.m_lo;
    rep.meta["m_hi"] = plan.m_hi;
    rep.meta["rmax"] = plan.rmax_high_energy;

    const std::size_t nm = std::size_t(plan.m_hi - plan.m_lo + 1);
    struct MPoint {
        int m = 0;
        double lambda = 0, mu = 0, r = 0, rp = 0;
    };
    std::vector<MPoint> pts(nm);
    auto family = source_family(plan.lmax);

    parallel_for(nm, plan.jobs, [&](std::size_t idx) {
        const int m = plan.m_lo + int(idx);
        MPoint p;
        p.m = m;
        p.lambda = std::ldexp(2.0, 2 * m);
        p.mu = plan.aperture * std::sqrt(p.lambda) / 2.0;
        SolverGridOptions gopt;
        gopt.ratio = plan.ratio;
        GridPtr g = share(solver_grid(plan.spec, p.lambda, p.mu, plan.rmax_high_energy, gopt));
        auto dec = DyadicDecomposition::from_abs_x(g, m);
        SpectralParam z{p.lambda, p.mu, plan.sign};
        const double half = 0.5 * g->back();
        for (const auto& sspec : family) {
            auto psi = make_scaled_source(sspec, g, m);
            auto rr = detail::checked_resolvent(plan.spec, z, psi, plan.rtol);
            double den = norm_B(dec, psi);
            p.r = std::max(p.r, norm_Bstar(dec, rr.phi, 0.0, half) / den);
            p.rp = std::max(p.rp, norm_Bstar(dec, apply_p_r(rr.phi), 0.0, half) / den);
        }
        pts[idx] = p;
    });

    std::vector<double> xs, ys, yps;
    for (const auto& p : pts) {
        rep.records.push_back({{"m", p.m},
                               {"lambda", p.lambda},
                               {"mu", p.mu},
                               {"bstar_over_b", p.r},
                               {"bstar_pr_over_b", p.rp}});
        xs.push_back(double(p.m));
        ys.push_back(std::log2(p.r));
        yps.push_back(std::log2(p.rp));
    }

    auto in_range = [&](const std::string& name, const std::string& inv, double measured,
                        double lo, double hi) {
        Verdict v;
        v.name = name;
        v.invariant = inv;
        v.measured = measured;
        v.bound = hi;
        std::ostringstream rel;
        rel << "in [" << lo << ", " << hi << "]";
        v.relation = rel.str();
        v.pass = measured >= lo && measured <= hi;
        rep.verdicts.push_back(v);
    };
    in_range("scaling_slope", "log2 of the B(m)->B*(m) ratio falls like -m", fit_line(xs, ys).second,
             -1.15, -0.85);
    in_range("scaling_slope_pr", "the p_r variant stays flat in m", fit_line(xs, yps).second,
             -0.15, 0.15);
    for (std::size_t i = 0; i < nm; ++i)
        if (pts[i].m == 0)
            for (std::size_t k = 0; k < nm; ++k)
                if (pts[k].m == 3)
                    in_range("scaling_octave_ratio", "ratio at m=0 over m=3 tracks 2^3 within x1.5",
                             pts[i].r / pts[k].r / 8.0, 1.0 / 1.5, 1.5);

    // dilation identity: base solve at lambda = 2 against the tabulated
    // 4^-m-dilated potential at 4^-m z on the 2^m-dilated grid
    {
        const int m = std::min(3, plan.m_hi);
        const double h = std::ldexp(1.0, -m);
        const double mu_b = plan.aperture * std::sqrt(2.0) / 2.0;
        SolverGridOptions gopt;
        gopt.ratio = plan.ratio;
        GridPtr ga = share(solver_grid(plan.spec, 2.0, mu_b, plan.rmax_high_energy, gopt));
        PotentialSpec dil = detail::dilated_spec(plan.spec, m, ga->back() / h);
        eval_potential(dil, 0.0); // build the interpolant before any sharing

        auto gb_raw = *ga;
        for (double& r : gb_raw.r) r /= h;
        GridPtr gb = share(std::move(gb_raw));

        double dev = 0.0, ndev = 0.0;
        for (const auto& sspec : {family[0], family[4 % family.size()]}) {
            auto psi_a = make_scaled_source(sspec, ga, 0);
            SpectralParam za{2.0, mu_b, plan.sign};
            auto rra = detail::checked_resolvent(plan.spec, za, psi_a, plan.rtol);

            PartialWaveField psi_b = PartialWaveField::zeros(gb, {sspec.ell});
            psi_b.analytic.resize(1);
            auto prof = psi_a.analytic[0];
            psi_b.analytic[0] = [prof, h](double r) { return h * h * prof(h * r); };
            for (std::size_t i = 0; i < gb->size(); ++i)
                psi_b.u[0][i] = psi_b.analytic[0](gb->r[i]);
            SpectralParam zb{2.0 * h * h, mu_b * h * h, plan.sign};
            auto rrb = detail::checked_resolvent(dil, zb, psi_b, plan.rtol);

            double peak = 0.0;
            for (std::size_t i = 0; i < ga->size(); ++i)
                peak = std::max(peak, std::abs(rra.phi.u[0][i]));
            for (std::size_t i = 0; i < ga->size(); ++i)
                dev = std::max(dev, std::abs(rrb.phi.u[0][i] - rra.phi.u[0][i]) / peak);

            // norm bookkeeping: the dilated copy of phi_a measured in B*(0)
            // must equal phi_a measured in B*(m), identically
            PartialWaveField lift = PartialWaveField::zeros(gb, {sspec.ell}, true);
            for (std::size_t i = 0; i < gb->size(); ++i) {
                lift.u[0][i] = rra.phi.u[0][i];
                lift.du[0][i] = h * rra.phi.du[0][i];
            }
            auto dec_b0 = DyadicDecomposition::from_abs_x(gb, 0);
            auto dec_am = DyadicDecomposition::from_abs_x(ga, m);
            double nb0 = norm_Bstar(dec_b0, lift);
            double nam = norm_Bstar(dec_am, rra.phi);
            ndev = std::max(ndev, std::abs(nb0 / nam - 1.0));
        }
        Verdict v;
        v.name = "scaling_identity";
        v.invariant = "resolvent of the dilated potential at the scaled energy matches the "
                       "base solution node by node";
        v.measured = dev;
        v.bound = 1e-5;
        v.relation = "<=";
        v.pass = dev <= 1e-5;
        rep.verdicts.push_back(v);
        Verdict vn;
        vn.name = "scaling_norm_exactness";
        vn.invariant = "B*(m) of the base field equals B*(0) of its dilated copy";
        vn.measured = ndev;
        vn.bound = 1e-12;
        vn.relation = "<=";
        vn.pass = ndev <= 1e-12;
        rep.verdicts.push_back(vn);
        rep.records.push_back({{"identity_m", m},
                               {"identity_deviation", dev},
                               {"norm_exactness_deviation", ndev}});
    }
    return rep;
}

// ---- eigenvalue-free scan ------------------------------------------------------------

// Aggregated jost tail scan over sectors and energies, with and without the
// short-range perturbation, plus a designed control well whose bound state
// must both trip the detector and sit where an independent shooting solve
// puts it.
inline ExperimentReport rellich_scan(const SweepPlan& plan) {
    plan.spec.validate();
    ExperimentReport rep;
    rep.experiment = "rellich_scan";
    rep.meta = detail::base_meta(plan, rep.experiment);
    rep.meta["lambda_lo"] = plan.rellich_lo;
    rep.meta["lambda_hi"] = plan.rellich_hi;
    rep.meta["points"] = plan.rellich_points;
    rep.meta["lmax"] = plan.rellich_lmax;

    std::vector<double> lams(std::size_t(plan.rellich_points));
    for (std::size_t i = 0; i < lams.size(); ++i)
        lams[i] = plan.rellich_lo +
                  (plan.rellich_hi - plan.rellich_lo) * double(i) / double(lams.size() - 1);

    PotentialSpec with_q = plan.spec;
    if (with_q.q_family == QFamily::none) {
        with_q.q_family = QFamily::soft_power_sr;
        with_q.q_amp = 0.1;
        with_q.C_q = 0.1;
    }
    PotentialSpec without_q = plan.spec;
    without_q.q_family = QFamily::none;
    without_q.q_amp = 0.0;

    SolverGridOptions gopt;
    gopt.ratio = plan.ratio;
    GridPtr g = share(solver_grid(plan.spec, plan.rellich_hi, 0.0, plan.rmax_rellich, gopt));

    struct Variant {
        const char* name;
        const PotentialSpec* spec;
    };
    for (Variant var : {Variant{"with_q", &with_q}, Variant{"without_q", &without_q}}) {
        const int nl = plan.rellich_lmax + 1;
        std::vector<JostReport> reports(static_cast<std::size_t>(nl));
        eval_potential(*var.spec, 0.0);
        parallel_for(std::size_t(nl), plan.jobs, [&](std::size_t ell) {
            reports[ell] = jost_scan(*var.spec, int(ell), lams, g, plan.rtol);
        });
        double min_ratio = std::numeric_limits<double>::infinity();
        bool zero_free = true;
        for (const auto& jr : reports) {
            min_ratio = std::min(min_ratio, jr.min_ratio);
            zero_free = zero_free && jr.zero_free;
            for (const auto& pt : jr.points)
                rep.records.push_back({{"variant", var.name},
                                       {"ell", jr.ell},
                                       {"lambda", pt.lambda},
                                       {"tail_ratio", pt.tail_ratio}});
        }
        Verdict v;
        v.name = std::string("rellich_zero_free_") + var.name;
        v.invariant = "no square-integrable tail at any lambda >= 0 in any sector";
        v.measured = min_ratio;
        v.bound = 1e-3;
        v.relation = ">=";
        v.pass = zero_free;
        rep.verdicts.push_back(v);
    }

    // control well: a deep attractive tail guarantees genuine bound states
    {
        PotentialSpec well;
        well.name = "control_well";
        well.family = PotentialFamily::soft_power;
        well.terms = {SoftPowerTerm{6.0, 1.0}};
        well.nu = 1.0;
        well.eps = 1.0;
        well.c_low = 6.0;
        well.C_up = 12.0;
        well.dim = plan.spec.dim;
        GridPtr gw = share(solver_grid(well, 1.0, 0.0, 16.0, gopt));

        auto zero = [](double) { return cplx{}; };
        auto endpoint = [&](double lam) {
            return detail::integrate_pass(well, 0, cplx(lam, 0.0), +1, *gw, true, zero, plan.rtol)
                .u.back()
                .real();
        };
        double lo = -5.8, hi = -0.02, prev = endpoint(lo), a = lo, b = 0.0;
        bool found = false;
        for (int i = 1; i <= 120 && !found; ++i) {
            double x = lo + (hi - lo) * double(i) / 120.0;
            double fx = endpoint(x);
            if ((fx > 0.0) != (prev > 0.0)) {
                b = x;
                found = true;
            } else {
                a = x;
                prev = fx;
            }
        }
        if (!found) throw numerical_error("rellich_scan: control well shows no bound state");
        double lam_shoot = shooting_eigenvalue(well, 0, a, b, gw, plan.rtol);
        auto [lam_jost, ratio_min] =
            jost_minimum(well, 0, lam_shoot - 0.02, lam_shoot + 0.02, gw, 60, plan.rtol);
        auto fire = jost_scan(well, 0, {lam_shoot}, gw, plan.rtol).points[0];

        rep.records.push_back({{"variant", "control_well"},
                               {"lambda_shooting", lam_shoot},
                               {"lambda_jost_minimum", lam_jost},
                               {"tail_ratio_at_eigenvalue", fire.tail_ratio},
                               {"tail_ratio_minimum", ratio_min}});
        Verdict v1;
        v1.name = "rellich_control_fires";
        v1.invariant = "the tail detector fires at the control well's bound state";
        v1.measured = fire.tail_ratio;
        v1.bound = 1e-3;
        v1.relation = "<";
        v1.pass = fire.decays;
        rep.verdicts.push_back(v1);
        Verdict v2;
        v2.name = "rellich_control_localization";
        v2.invariant = "detector minimum sits at the shooting eigenvalue";
        v2.measured = std::abs(lam_jost - lam_shoot);
        v2.bound = 1e-3;
        v2.relation = "<=";
        v2.pass = v2.measured <= v2.bound;
        rep.verdicts.push_back(v2);
    }
    return rep;
}

} // namespace laplab
