#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "laplab/assumptions.hpp"
#include "laplab/classical.hpp"
#include "laplab/experiments.hpp"
#include "laplab/io.hpp"

namespace laplab::cli {

// Resolved invocation. Sentinels (0 or -1) mean "keep the command default",
// so a preset's sweep block is only overridden by flags the user actually set.
struct RunConfig {
    std::string command;
    std::string preset_path;
    std::string out_dir = ".";
    std::string presets_dir = "presets";
    double grid_rmax = 0.0;
    double grid_ratio = 0.0;
    int lmax = -1;
    double tol = 0.0;
    int jobs = 0;
    std::uint64_t seed = 1;
    double lambda = 1.0;
    double mu = 1e-2;
    int orbits = 25;
    double horizon = 40.0;
};

// ---- preset loading ---------------------------------------------------------

// Parse with a line/column diagnostic instead of nlohmann's byte offset.
inline nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open preset file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t byte = e.byte > 0 ? std::min<std::size_t>(e.byte - 1, text.size()) : 0;
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << path << ": parse error at line " << line << ", column " << col;
        throw std::invalid_argument(msg.str());
    }
}

namespace detail {

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

} // namespace detail

// Preset sweep block first, then explicitly set flags on top. The potential
// itself is read by the library's preset loader; the optional "sweep" object
// carries experiment parameters.
inline SweepPlan plan_from_preset(const nlohmann::json& j, const RunConfig& cfg) {
    SweepPlan plan;
    plan.spec = spec_from_json(j);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::maybe(s, "lambdas", plan.lambdas);
        detail::maybe(s, "mus", plan.mus);
        detail::maybe(s, "betas", plan.betas);
        detail::maybe(s, "sign", plan.sign);
        detail::maybe(s, "rho", plan.rho);
        detail::maybe(s, "omega", plan.omega);
        detail::maybe(s, "s", plan.s);
        detail::maybe(s, "gamma", plan.gamma);
        detail::maybe(s, "m_lo", plan.m_lo);
        detail::maybe(s, "m_hi", plan.m_hi);
        detail::maybe(s, "aperture", plan.aperture);
        detail::maybe(s, "lmax", plan.lmax);
        detail::maybe(s, "rmax", plan.rmax);
        detail::maybe(s, "ratio", plan.ratio);
        detail::maybe(s, "rtol", plan.rtol);
        detail::maybe(s, "rmax_high_energy", plan.rmax_high_energy);
        detail::maybe(s, "rmax_rellich", plan.rmax_rellich);
        detail::maybe(s, "rellich_lo", plan.rellich_lo);
        detail::maybe(s, "rellich_hi", plan.rellich_hi);
        detail::maybe(s, "rellich_points", plan.rellich_points);
        detail::maybe(s, "rellich_lmax", plan.rellich_lmax);
    }
    if (cfg.grid_ratio > 0.0) plan.ratio = cfg.grid_ratio;
    if (cfg.lmax >= 0) plan.lmax = cfg.lmax;
    if (cfg.tol > 0.0) plan.rtol = cfg.tol;
    if (cfg.jobs > 0) plan.jobs = cfg.jobs;
    plan.seed = cfg.seed;
    return plan;
}

// ---- output helpers ---------------------------------------------------------

inline void save_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot write " + path);
    os << j.dump(2) << "\n";
}

inline void print_verdicts(std::ostream& out, const ExperimentReport& rep) {
    std::size_t passed = 0;
    for (const Verdict& v : rep.verdicts) {
        out << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << format_g17(v.measured) << " "
            << v.relation << " " << format_g17(v.bound) << "\n";
        if (v.pass) ++passed;
    }
    out << "SUMMARY " << rep.experiment << ": " << passed << "/" << rep.verdicts.size()
        << " verdicts pass\n";
}

inline int finish_experiment(const ExperimentReport& rep, const RunConfig& cfg,
                             std::ostream& out) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem =
        cfg.out_dir + "/" + rep.experiment + "_" + rep.meta.value("potential", std::string("run"));
    write_report_json(stem + ".json", rep);
    write_report_csv(stem + ".csv", rep);
    print_verdicts(out, rep);
    return rep.all_pass() ? 0 : 1;
}

// ---- command bodies ---------------------------------------------------------

inline int run_verify_assumptions(const RunConfig& cfg, std::ostream& out) {
    PotentialSpec spec = spec_from_json(parse_json_file(cfg.preset_path));
    const double rmax = cfg.grid_rmax > 0.0 ? cfg.grid_rmax : 1e4;
    AssumptionReport rep = verify_assumptions(spec, rmax);
    for (const auto& rec : rep.records)
        out << (rec.pass ? "PASS " : "FAIL ") << rec.id << ": worst margin "
            << format_g17(rec.worst_margin) << " at r = " << format_g17(rec.worst_radius) << "\n";
    out << "SUMMARY verify-assumptions: " << (rep.pass ? "pass" : "fail") << "\n";
    std::filesystem::create_directories(cfg.out_dir);
    save_json(cfg.out_dir + "/verify_assumptions_" + spec.name + ".json", to_json(rep));
    return rep.pass ? 0 : 1;
}

inline int run_efftime(const RunConfig& cfg, std::ostream& out) {
    PotentialSpec spec = spec_from_json(parse_json_file(cfg.preset_path));
    const double rmax = cfg.grid_rmax > 0.0 ? cfg.grid_rmax : 1e4;
    const double ratio = cfg.grid_ratio > 0.0 ? cfg.grid_ratio : 1.02;
    auto grid = share(RadialGrid::table(rmax, ratio, spec.dim));
    const std::vector<double> lambdas = {0.0, 0.1, 1.0, 4.0};
    std::vector<EffTimeTable> tables;
    tables.reserve(lambdas.size());
    for (double lam : lambdas) tables.push_back(build_efftime(spec, lam, grid));
    TauBoundsReport rep = check_tau_S_bounds(tables);

    nlohmann::ordered_json j;
    j["experiment"] = "efftime";
    j["potential"] = spec.name;
    j["rmax"] = rmax;
    j["families"] = nlohmann::ordered_json::array();
    const bool ok = rep.all_within(1e-3, 1e3);
    for (const auto& entry : rep.entries)
        for (const auto& fam : entry.families) {
            out << (fam.within(1e-3, 1e3) ? "PASS " : "FAIL ") << fam.id
                << " at lambda = " << entry.lambda << ": range [" << format_g17(fam.lo) << ", "
                << format_g17(fam.hi) << "]\n";
            j["families"].push_back({{"id", fam.id},
                                     {"lambda", entry.lambda},
                                     {"lo", fam.lo},
                                     {"hi", fam.hi},
                                     {"at_lo", fam.at_lo},
                                     {"at_hi", fam.at_hi}});
        }
    j["pass"] = ok;
    out << "SUMMARY efftime: " << (ok ? "pass" : "fail") << "\n";
    std::filesystem::create_directories(cfg.out_dir);
    save_json(cfg.out_dir + "/efftime_" + spec.name + ".json", j);
    return ok ? 0 : 1;
}

inline int run_orbit(const RunConfig& cfg, std::ostream& out) {
    PotentialSpec spec = spec_from_json(parse_json_file(cfg.preset_path));
    const double rmax = cfg.grid_rmax > 0.0 ? cfg.grid_rmax : 512.0;
    const double ratio = cfg.grid_ratio > 0.0 ? cfg.grid_ratio : 1.02;
    EffTimeTable table = build_efftime(spec, cfg.lambda, share(RadialGrid::table(rmax, ratio, spec.dim)));

    auto starts = sample_orbits(spec, cfg.lambda, std::size_t(cfg.orbits), cfg.seed);
    double worst = std::numeric_limits<double>::infinity();
    double drift = 0.0;
    std::filesystem::create_directories(cfg.out_dir);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        OrbitTrace tr = integrate_orbit(spec, starts[i].x, starts[i].p, cfg.horizon, 1e-3);
        auto margins = check_escape_inequality(tr, table);
        for (double m : margins) worst = std::min(worst, m);
        drift = std::max(drift, tr.energy_drift);
        if (i == 0) {
            std::ofstream csv(cfg.out_dir + "/orbit_" + spec.name + ".csv");
            write_orbit_csv(csv, tr, table, margins);
        }
    }
    const bool ok = worst >= -1e-6;
    out << (ok ? "PASS" : "FAIL") << " escape inequality: worst margin " << format_g17(worst)
        << " over " << starts.size() << " orbits (energy drift " << format_g17(drift) << ")\n";
    nlohmann::ordered_json j{{"experiment", "orbit"},       {"potential", spec.name},
                             {"lambda", cfg.lambda},        {"orbits", cfg.orbits},
                             {"horizon", cfg.horizon},      {"worst_margin", worst},
                             {"max_energy_drift", drift},   {"pass", ok}};
    save_json(cfg.out_dir + "/orbit_" + spec.name + ".json", j);
    return ok ? 0 : 1;
}

inline int run_resolvent(const RunConfig& cfg, std::ostream& out) {
    auto j = parse_json_file(cfg.preset_path);
    SweepPlan plan = plan_from_preset(j, cfg);
    const double rmax = cfg.grid_rmax > 0.0 ? cfg.grid_rmax : 256.0;
    SpectralParam z{cfg.lambda, cfg.mu, plan.sign};
    z.validate();

    SolverGridOptions go;
    go.ratio = plan.ratio;
    auto grid = share(solver_grid(plan.spec, cfg.lambda, cfg.mu, rmax, go));
    auto table = std::make_shared<const EffTimeTable>(build_efftime(plan.spec, cfg.lambda, grid));
    auto family = source_family(plan.lmax);
    PartialWaveField psi = make_source(family.front(), table);
    ResolventResult rr = apply_resolvent(plan.spec, z, psi, plan.rtol);

    const bool ok = rr.residual_rel <= 1e-6 && rr.wronskian_variation <= 1e-6;
    out << (ok ? "PASS" : "FAIL") << " resolvent contract: residual "
        << format_g17(rr.residual_rel) << ", Wronskian variation "
        << format_g17(rr.wronskian_variation) << "\n";

    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem = cfg.out_dir + "/resolvent_" + plan.spec.name;
    std::ofstream csv(stem + ".csv");
    if (!csv) throw std::runtime_error("run_resolvent: cannot open " + stem + ".csv");
    write_field_csv(csv, rr.phi);
    // one sidecar carries the field schema and the run report together
    nlohmann::ordered_json rj = field_header(rr.phi);
    rj["experiment"] = "resolvent";
    rj["potential"] = plan.spec.name;
    rj["lambda"] = cfg.lambda;
    rj["mu"] = cfg.mu;
    rj["sign"] = plan.sign;
    rj["source"] = family.front().name;
    rj["residual_rel"] = rr.residual_rel;
    rj["wronskian_variation"] = rr.wronskian_variation;
    rj["truncation_warning"] = rr.truncation_warning;
    rj["pass"] = ok;
    save_json(stem + ".json", rj);
    return ok ? 0 : 1;
}

inline int run_list_presets(const RunConfig& cfg, std::ostream& out) {
    namespace fs = std::filesystem;
    if (!fs::exists(cfg.presets_dir)) {
        out << "no presets found in " << cfg.presets_dir << "\n";
        return 0;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.presets_dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        try {
            auto j = parse_json_file(p.string());
            PotentialSpec spec = spec_from_json(j);
            out << spec.name << ": family " << j.at("family").get<std::string>() << ", nu "
                << spec.nu << ", dim " << spec.dim << "\n";
        } catch (const std::exception& e) {
            out << p.filename().string() << ": invalid (" << e.what() << ")\n";
        }
    }
    if (files.empty()) out << "no presets found in " << cfg.presets_dir << "\n";
    return 0;
}

inline int run_validate(const RunConfig& cfg, std::ostream& out) {
    auto j = parse_json_file(cfg.preset_path);
    SweepPlan plan = plan_from_preset(j, cfg);
    plan.validate();
    const double bc = plan.beta_c_value();
    out << "plan OK: potential " << plan.spec.name << ", beta_c = " << format_g17(bc) << "\n";
    const double cap = std::min(plan.s - 0.5, bc);
    if (plan.s > 0.5 && plan.gamma < cap)
        out << "hoelder feasible: gamma " << plan.gamma << " < min(s - 1/2, beta_c) = "
            << format_g17(cap) << "\n";
    else
        out << "hoelder infeasible with gamma " << plan.gamma << " and s " << plan.s
            << "; set sweep.gamma below " << format_g17(cap) << " before a hoelder run\n";
    return 0;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
    const std::string& c = cfg.command;
    if (c == "verify-assumptions") return run_verify_assumptions(cfg, out);
    if (c == "efftime") return run_efftime(cfg, out);
    if (c == "orbit") return run_orbit(cfg, out);
    if (c == "resolvent") return run_resolvent(cfg, out);
    if (c == "list-presets") return run_list_presets(cfg, out);
    if (c == "validate") return run_validate(cfg, out);

    auto j = parse_json_file(cfg.preset_path);
    SweepPlan plan = plan_from_preset(j, cfg);
    if (c == "lap-sweep") {
        if (cfg.grid_rmax > 0.0) plan.rmax = cfg.grid_rmax;
        return finish_experiment(lap_sweep(plan), cfg, out);
    }
    if (c == "radiation") {
        if (cfg.grid_rmax > 0.0) plan.rmax = cfg.grid_rmax;
        if (plan.betas.empty()) plan.betas = {0.5 * plan.beta_c_value()};
        return finish_experiment(radiation_probe(plan), cfg, out);
    }
    if (c == "hoelder") {
        if (cfg.grid_rmax > 0.0) plan.rmax = cfg.grid_rmax;
        return finish_experiment(hoelder_probe(plan), cfg, out);
    }
    if (c == "sommerfeld") {
        if (cfg.grid_rmax > 0.0) plan.rmax = cfg.grid_rmax;
        return finish_experiment(sommerfeld_check(plan), cfg, out);
    }
    if (c == "rellich") {
        if (cfg.grid_rmax > 0.0) plan.rmax_rellich = cfg.grid_rmax;
        return finish_experiment(rellich_scan(plan), cfg, out);
    }
    if (c == "high-energy") {
        if (cfg.grid_rmax > 0.0) plan.rmax_high_energy = cfg.grid_rmax;
        return finish_experiment(high_energy_scaling(plan), cfg, out);
    }
    throw std::invalid_argument("unknown command: " + c);
}

// Exit codes: 0 all checks pass, 1 a verdict failed, 2 configuration or parse
// trouble, 3 the numerics refused (resonance guard, budget exhaustion, ...).
inline int guarded(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(cfg, out);
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

inline int main_entry(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"numerical laboratory for low-energy resolvents of -1/2 lap + V + q"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub, bool needs_preset) {
        if (needs_preset)
            sub->add_option("--preset", cfg.preset_path, "preset JSON file")->required();
        sub->add_option("--out", cfg.out_dir, "output directory (env LAPLAB_OUT overrides)");
        sub->add_option("--grid-rmax", cfg.grid_rmax, "outer radius override");
        sub->add_option("--grid-ratio", cfg.grid_ratio, "geometric grid ratio override");
        sub->add_option("--lmax", cfg.lmax, "largest source sector");
        sub->add_option("--tol", cfg.tol, "integrator relative tolerance");
        sub->add_option("--jobs", cfg.jobs, "worker threads");
        sub->add_option("--seed", cfg.seed, "RNG seed");
    };

    struct Cmd {
        const char* name;
        const char* help;
        bool preset;
    };
    const Cmd cmds[] = {
        {"verify-assumptions", "check the decay inequalities of a preset", true},
        {"efftime", "travel-time and eikonal two-sided bounds", true},
        {"orbit", "classical escape-inequality margins", true},
        {"resolvent", "one resolvent solve with contract checks", true},
        {"lap-sweep", "weighted resolvent bounds over the mu ladder", true},
        {"radiation", "radiation-defect bounds and decay profiles", true},
        {"hoelder", "Hoelder continuity of the boundary values", true},
        {"sommerfeld", "uniqueness of the outgoing boundary value", true},
        {"rellich", "zero-free positive axis plus control well", true},
        {"high-energy", "dyadic high-energy scaling and dilation identity", true},
        {"validate", "check a preset and plan without solving", true},
        {"list-presets", "catalog the preset directory", false},
    };
    for (const Cmd& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, c.preset);
        if (std::string(c.name) == "resolvent") {
            sub->add_option("--lambda", cfg.lambda, "spectral point, real part");
            sub->add_option("--mu", cfg.mu, "spectral point, imaginary part");
        }
        if (std::string(c.name) == "orbit") {
            sub->add_option("--lambda", cfg.lambda, "orbit energy");
            sub->add_option("--orbits", cfg.orbits, "number of sampled orbits");
            sub->add_option("--horizon", cfg.horizon, "integration time");
        }
        if (std::string(c.name) == "list-presets")
            sub->add_option("--presets-dir", cfg.presets_dir, "directory to scan");
        sub->callback([&cfg, name = std::string(c.name)] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (const char* env = std::getenv("LAPLAB_OUT")) cfg.out_dir = env;
    return guarded(cfg, std::cout, std::cerr);
}

} // namespace laplab::cli
