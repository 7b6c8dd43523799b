// Acceptance gate: ten self-reporting checks, one per shipped guarantee, run
// at full scale (the unit suites cover the same machinery at smoke scale).
// Each criterion prints a single PASS/FAIL line with its measured numbers and
// wall time; the exit code is the number of failed criteria.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "laplab/laplab.hpp"

using namespace laplab;

namespace {

std::string fmt(const char* f, ...) {
    char buf[768];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

struct Gate {
    std::string presets_dir;
    int jobs = 1;
    int failures = 0;

    PotentialSpec load(const std::string& file) const {
        std::string path = presets_dir + "/" + file;
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open preset " + path);
        nlohmann::json j;
        in >> j;
        return spec_from_json(j);
    }

    void criterion(int n, double limit_s,
                   const std::function<std::pair<bool, std::string>()>& body) {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string detail;
        try {
            auto [o, d] = body();
            ok = o;
            detail = d;
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (limit_s > 0.0 && el >= limit_s) {
            ok = false;
            detail += fmt("; over the %.0f s budget", limit_s);
        }
        std::printf("%s criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", n, detail.c_str(), el);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

const Verdict& vd(const ExperimentReport& rep, const std::string& name) {
    for (const auto& v : rep.verdicts)
        if (v.name == name) return v;
    throw std::runtime_error(rep.experiment + ": missing verdict " + name);
}

// Source with sectors 0..lmax, each carrying a travel-time shell bump; the
// shell cycles with the sector so the radial content varies across sectors.
PartialWaveField matrix_source(std::shared_ptr<const EffTimeTable> table, int lmax) {
    GridPtr g = table->grid;
    std::vector<int> ells(std::size_t(lmax) + 1);
    std::iota(ells.begin(), ells.end(), 0);
    PartialWaveField f = PartialWaveField::zeros(g, ells);
    f.analytic.resize(ells.size());
    for (int ell = 0; ell <= lmax; ++ell) {
        int shell = 2 + ell % 3;
        double tc = 1.5 * std::ldexp(1.0, shell - 1);
        double th = 0.45 * std::ldexp(1.0, shell - 1);
        f.analytic[std::size_t(ell)] = [table, tc, th](double r) {
            return cplx(detail::bump3((table->tau_refined(r) - tc) / th));
        };
        for (std::size_t i = 0; i < g->size(); ++i)
            f.u[std::size_t(ell)][i] = f.analytic[std::size_t(ell)](g->r[i]);
    }
    return f;
}

} // namespace

int main(int argc, char** argv) {
    Gate gate;
    gate.presets_dir = argc > 1 ? argv[1] : "presets";
    unsigned hw = std::thread::hardware_concurrency();
    gate.jobs = int(std::min(4u, hw ? hw : 1u));
    const double inf = std::numeric_limits<double>::infinity();
    std::printf("acceptance gate: presets from %s, %d worker threads\n", gate.presets_dir.c_str(),
                gate.jobs);

    // 1: the assumption verifier separates shipped presets from the two
    // designed-to-fail controls, each failing its intended inequality.
    gate.criterion(1, 1.0, [&]() -> std::pair<bool, std::string> {
        auto sp = verify_assumptions(gate.load("soft_power.json"));
        auto nu05 = verify_assumptions(gate.load("soft_power_nu05.json"));
        auto well = verify_assumptions(gate.load("control_well.json"));
        auto rep_r = verify_assumptions(gate.load("fail_repulsive.json"));
        auto rep_q = verify_assumptions(gate.load("fail_slow_q.json"));
        bool shipped = sp.pass && nu05.pass && well.pass;
        bool rfail = !rep_r.pass && !rep_r.record("attractive-lower-bound").pass;
        bool qfail = !rep_q.pass && !rep_q.record("short-range-q").pass &&
                     rep_q.record("attractive-lower-bound").pass &&
                     rep_q.record("derivative-decay").pass && rep_q.record("virial").pass;
        return {shipped && rfail && qfail,
                fmt("assumption verifier: 3 shipped presets %s; repulsive control margin %.2e, "
                    "slow-q control margin %.2e",
                    shipped ? "pass" : "FAIL",
                    rep_r.record("attractive-lower-bound").worst_margin,
                    rep_q.record("short-range-q").worst_margin)};
    });

    // 2: the four travel-time/eikonal ratio families stay within [1e-3, 1e3]
    // out to r = 1e4 across the energy set.
    gate.criterion(2, 10.0, [&]() -> std::pair<bool, std::string> {
        PotentialSpec spec = gate.load("soft_power.json");
        std::vector<EffTimeTable> tables;
        for (double lam : {0.0, 0.1, 1.0, 4.0})
            tables.push_back(build_efftime(spec, lam, share(RadialGrid::table(1e4, 1.02, spec.dim))));
        auto rep = check_tau_S_bounds(tables);
        double lo = inf, hi = 0.0;
        std::size_t nfam = 0;
        for (const auto& e : rep.entries)
            for (const auto& f : e.families) {
                lo = std::min(lo, f.lo);
                hi = std::max(hi, f.hi);
                ++nfam;
            }
        return {rep.all_within(1e-3, 1e3),
                fmt("tau and S ratio families stay in [1e-3, 1e3]: observed [%.3g, %.3g] over "
                    "%zu families, r up to 1e4",
                    lo, hi, nfam)};
    });

    // 3: outward-started random orbits obey the escape inequality, and the
    // closed-form second derivative of tau along each orbit stays nonnegative.
    gate.criterion(3, 60.0, [&]() -> std::pair<bool, std::string> {
        PotentialSpec spec = gate.load("soft_power.json");
        double worst_m = inf, worst_d2 = inf, drift = 0.0;
        int count = 0;
        std::uint64_t seed = 101;
        for (double lam : {0.0, 0.5, 2.0}) {
            GridPtr g = share(RadialGrid::table(512.0, 1.02, spec.dim));
            EffTimeTable table = build_efftime(spec, lam, g);
            for (const auto& s0 : sample_orbits(spec, lam, 100, seed++)) {
                auto tr = integrate_orbit(spec, s0.x, s0.p, 40.0, 1e-3);
                for (double m : check_escape_inequality(tr, table))
                    worst_m = std::min(worst_m, m);
                for (const auto& st : tr.states)
                    worst_d2 = std::min(worst_d2, d2tau_exact(spec, lam, st));
                drift = std::max(drift, tr.energy_drift);
                ++count;
            }
        }
        return {worst_m >= -1e-6 && worst_d2 >= -1e-6,
                fmt("classical escape: %d orbits, min margin %.2e >= -1e-6, min d2tau/dt2 %.2e "
                    ">= -1e-6, max energy drift %.1e",
                    count, worst_m, worst_d2, drift)};
    });

    // 4: resolvent oracles on the full matrix: equation residual, Wronskian
    // constancy, energy-flux balance, and the first-resolvent identity.
    gate.criterion(4, 300.0, [&]() -> std::pair<bool, std::string> {
        PotentialSpec spec = gate.load("soft_power.json");
        SolverGridOptions gopt;
        gopt.points_per_wavelength = 64; // flux identity needs the extra margin
        const std::vector<double> mus{1e-1, 1e-2, 1e-3, 1e-4};
        const double rtol = 1e-11;
        double worst_res = 0.0, worst_wvar = 0.0, worst_flux = 0.0, worst_first = 0.0;
        for (double lam : {0.0, 0.5, 1.0, 2.0}) {
            GridPtr g = share(solver_grid(spec, lam, mus.front(), 512.0, gopt));
            auto table = std::make_shared<const EffTimeTable>(build_efftime(spec, lam, g));
            PartialWaveField psi = matrix_source(table, 8);
            std::vector<ResolventResult> rr(mus.size());
            parallel_for(mus.size(), gate.jobs, [&](std::size_t i) {
                rr[i] = apply_resolvent(spec, SpectralParam{lam, mus[i], +1}, psi, rtol);
            });
            for (std::size_t i = 0; i < mus.size(); ++i) {
                worst_res = std::max(worst_res, rr[i].residual_rel);
                worst_wvar = std::max(worst_wvar, rr[i].wronskian_variation);
                auto fb = flux_balance(SpectralParam{lam, mus[i], +1}, psi, rr[i].phi);
                worst_flux = std::max(worst_flux, fb.rel_gap);
            }
            // first-resolvent identity between the sweep endpoints; the inner
            // solve sits at the largest mu so its output is localized and the
            // domain truncation cancels exponentially
            const double half = 0.5 * g->back();
            PartialWaveField lhs = subtract(rr.back().phi, rr.front().phi);
            auto cross = apply_resolvent(spec, SpectralParam{lam, mus.back(), +1}, rr.front().phi,
                                         rtol);
            PartialWaveField gap = lhs;
            axpy(-cplx(0.0, mus.back() - mus.front()), cross.phi, gap);
            worst_first =
                std::max(worst_first, l2_norm(gap, 0.0, half) / l2_norm(lhs, 0.0, half));
        }
        bool ok = worst_res <= 1e-6 && worst_wvar <= 1e-6 && worst_flux <= 1e-6 &&
                  worst_first <= 1e-5;
        return {ok, fmt("resolvent oracles over 4 energies x 4 dampings x sectors 0..8: residual "
                        "%.1e <= 1e-6, Wronskian variation %.1e <= 1e-6, flux gap %.1e <= 1e-6, "
                        "first-resolvent %.1e <= 1e-5",
                        worst_res, worst_wvar, worst_flux, worst_first)};
    });

    // 5: weighted resolvent ratios stay bounded down the damping sweep while
    // the unweighted L2 ratio at lambda = 1 blows up.
    gate.criterion(5, 300.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power.json");
        plan.jobs = gate.jobs;
        auto rep = lap_sweep(plan);
        bool bounded = true;
        double worst = 0.0;
        for (const auto& v : rep.verdicts)
            if (v.name.rfind("lap_bounded_", 0) == 0) {
                bounded = bounded && v.pass;
                worst = std::max(worst, v.measured);
            }
        const Verdict& contrast = vd(rep, "lap_contrast_lambda_1");
        return {bounded && contrast.pass,
                fmt("limiting absorption: weighted ratios within x3 (worst growth x%.2f) at "
                    "every energy; L2 contrast at lambda=1 x%.1f >= x10",
                    worst, contrast.measured)};
    });

    // 6: at beta = beta_c/2 the radiation-defect ratio stays bounded, its
    // mu = 0 shell profile decays, and branch conjugation is exact.
    gate.criterion(6, 0.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power.json");
        plan.jobs = gate.jobs;
        double bc = plan.beta_c_value();
        plan.betas = {0.5 * bc};
        auto rep = radiation_probe(plan);
        double worst_b = 0.0, worst_c = 0.0;
        for (const auto& v : rep.verdicts) {
            if (v.name.rfind("radiation_bounded_", 0) == 0) worst_b = std::max(worst_b, v.measured);
            if (v.name.rfind("radiation_conjugation_", 0) == 0)
                worst_c = std::max(worst_c, v.measured);
        }
        return {rep.all_pass(),
                fmt("radiation condition at beta = beta_c/2 = %.4f: defect ratios within x3 "
                    "(worst x%.2f), mu=0 profiles decay, conjugation gap %.1e",
                    0.5 * bc, worst_b, worst_c)};
    });

    // 7: Hoelder continuity in z at the spectrum: fitted exponents for the
    // resolvent and its scaled radial momentum reach the target.
    gate.criterion(7, 0.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power_nu05.json");
        plan.lambdas = {1.0};
        plan.s = 1.0;
        plan.gamma = 0.25;
        plan.jobs = gate.jobs;
        auto rep = hoelder_probe(plan);
        const Verdict& e = vd(rep, "hoelder_exponent_lambda_1");
        const Verdict& ep = vd(rep, "hoelder_exponent_pr_lambda_1");
        return {e.pass && ep.pass,
                fmt("Hoelder exponents at lambda=1, s=1, target gamma=0.25: resolvent %.3f >= "
                    "0.20, momentum variant %.3f >= 0.20",
                    e.measured, ep.measured)};
    });

    // 8: the vertical-limit extrapolation and the direct mu = 0 outgoing solve
    // agree, and the incoming branch is far away.
    gate.criterion(8, 0.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power.json");
        plan.lambdas = {0.5, 1.0, 2.0};
        plan.jobs = gate.jobs;
        auto rep = sommerfeld_check(plan);
        bool ok = true;
        double agree = 0.0, branch = inf;
        for (const auto& v : rep.verdicts) {
            if (v.name.rfind("sommerfeld_agreement_", 0) == 0) {
                ok = ok && v.pass;
                agree = std::max(agree, v.measured);
            }
            if (v.name.rfind("sommerfeld_wrong_branch_", 0) == 0) {
                ok = ok && v.pass;
                branch = std::min(branch, v.measured);
            }
        }
        return {ok, fmt("outgoing uniqueness: extrapolated vs direct boundary values agree to "
                        "%.1e <= 1e-3; wrong branch differs by %.2f >= 0.1",
                        agree, branch)};
    });

    // 9: no square-integrable tails anywhere on the positive-energy grid, with
    // and without the short-range term; the control well fires the detector at
    // its independently computed eigenvalue.
    gate.criterion(9, 0.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power.json");
        plan.jobs = gate.jobs;
        auto rep = rellich_scan(plan);
        const Verdict& with_q = vd(rep, "rellich_zero_free_with_q");
        const Verdict& wo_q = vd(rep, "rellich_zero_free_without_q");
        const Verdict& fires = vd(rep, "rellich_control_fires");
        const Verdict& local = vd(rep, "rellich_control_localization");
        return {rep.all_pass(),
                fmt("no positive eigenvalues over 41 energies x sectors 0..8 (min tail ratio "
                    "%.2g with q, %.2g without); control well fires (ratio %.1e) within %.1e "
                    "of the shooting eigenvalue",
                    with_q.measured, wo_q.measured, fires.measured, local.measured)};
    });

    // 10: dyadic high-energy scaling: the operator-norm proxy falls like 2^-m,
    // the momentum variant stays flat, and the dilation identity is exact.
    gate.criterion(10, 0.0, [&]() -> std::pair<bool, std::string> {
        SweepPlan plan;
        plan.spec = gate.load("soft_power.json");
        plan.jobs = gate.jobs;
        auto rep = high_energy_scaling(plan);
        const Verdict& s = vd(rep, "scaling_slope");
        const Verdict& sp = vd(rep, "scaling_slope_pr");
        const Verdict& id = vd(rep, "scaling_identity");
        return {s.pass && sp.pass && id.pass,
                fmt("high-energy scaling over m=0..5: slope %.3f in [-1.15,-0.85], momentum "
                    "slope %.3f in [-0.15,0.15], dilation identity deviation %.1e <= 1e-5",
                    s.measured, sp.measured, id.measured)};
    });

    std::printf("acceptance gate: %d/10 criteria pass\n", 10 - gate.failures);
    return gate.failures;
}
