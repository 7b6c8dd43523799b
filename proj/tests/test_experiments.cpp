#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "laplab/experiments.hpp"

using namespace laplab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

PotentialSpec soft_power(double c0 = 1.0, double nu = 1.0, double q_amp = 0.0) {
    PotentialSpec s;
    s.name = "soft_power_test";
    s.family = PotentialFamily::soft_power;
    s.terms = {{c0, nu}};
    s.nu = nu;
    s.c_low = c0;
    s.C_up = std::abs(c0) * 4.0;
    if (q_amp != 0.0) {
        s.q_family = QFamily::soft_power_sr;
        s.q_amp = q_amp;
        s.C_q = std::abs(q_amp);
    }
    return s;
}

SweepPlan smoke_plan() {
    SweepPlan plan;
    plan.spec = soft_power(1.0, 1.0, 0.1);
    plan.lambdas = {0.0, 1.0};
    plan.mus = {1e-1, 1e-2};
    plan.lmax = 1;
    plan.rmax = 128.0;
    plan.jobs = 2;
    return plan;
}

const Verdict& find_verdict(const ExperimentReport& rep, const std::string& name) {
    for (const Verdict& v : rep.verdicts)
        if (v.name == name) return v;
    FAIL("verdict not found: " << name);
    throw std::logic_error("unreachable");
}

bool has_verdict(const ExperimentReport& rep, const std::string& name) {
    return std::any_of(rep.verdicts.begin(), rep.verdicts.end(),
                       [&](const Verdict& v) { return v.name == name; });
}

} // namespace

TEST_CASE("the source family is fixed and versioned") {
    CHECK(source_family_version == 1);
    auto fam7 = source_family(1);
    auto fam10 = source_family(2);
    CHECK(fam7.size() == 7);
    CHECK(fam10.size() == 10);
    std::set<std::string> names;
    for (const auto& s : fam10) names.insert(s.name);
    CHECK(names.size() == fam10.size());
}

TEST_CASE("sweep plans are validated up front") {
    SweepPlan plan = smoke_plan();
    CHECK_NOTHROW(plan.validate());

    SECTION("beta at or above beta_c is rejected") {
        plan.betas = {0.2}; // beta_c for nu = 1 is 1/6
        CHECK_THROWS_WITH(plan.validate(), ContainsSubstring("beta"));
    }

    SECTION("spectral points outside the declared sector are rejected") {
        plan.lambdas = {10.0}; // rho = 8
        CHECK_THROWS_WITH(plan.validate(), ContainsSubstring("sector"));
    }

    SECTION("empty mu list is rejected") {
        plan.mus.clear();
        CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    }

    SECTION("beta_c matches the closed-form value for nu = 1") {
        CHECK(plan.beta_c_value() == Approx(1.0 / 6.0).epsilon(0.02));
    }
}

TEST_CASE("limiting absorption sweep: bounded weighted ratios, honest records") {
    SweepPlan plan = smoke_plan();
    ExperimentReport rep = lap_sweep(plan);

    CHECK(rep.experiment == "lap_sweep");
    CHECK(rep.meta["potential"] == "soft_power_test");
    REQUIRE(rep.records.size() == plan.lambdas.size() * plan.mus.size());
    for (const auto& r : rep.records) {
        CHECK(r["residual_rel"].get<double>() < 1e-6);
        CHECK(r["wronskian_variation"].get<double>() < 1e-6);
        CHECK(r["bstar_phi_over_b_psi"].get<double>() > 0.0);
        CHECK(r["l2_ratio"].get<double>() > 0.0);
        CHECK(r["peak_source"].is_string());
    }

    for (double lam : {0.0, 1.0}) {
        std::string tag = lam > 0.0 ? "lambda_1" : "lambda_0";
        for (const char* what : {"phi", "pr", "angular"}) {
            const Verdict& v = find_verdict(rep, std::string("lap_bounded_") + what + "_" + tag);
            INFO(v.name << " measured " << v.measured);
            CHECK(v.pass);
        }
    }
    // The x10 contrast needs the full mu ladder on a large domain; here only
    // its presence and orientation are checked.
    CHECK_FALSE(has_verdict(rep, "lap_contrast_lambda_0"));
    const Verdict& c = find_verdict(rep, "lap_contrast_lambda_1");
    CHECK(c.relation == ">=");
    CHECK(c.measured > 1.0);
}

TEST_CASE("experiment reports are deterministic across worker counts") {
    SweepPlan plan = smoke_plan();
    plan.lambdas = {1.0};
    plan.jobs = 1;
    std::string once = lap_sweep(plan).to_json(false).dump(2);
    plan.jobs = 3;
    std::string again = lap_sweep(plan).to_json(false).dump(2);
    CHECK(once == again);
}

TEST_CASE("radiation probe: defect bounded, decaying, conjugation symmetric") {
    SweepPlan plan = smoke_plan();
    plan.lambdas = {1.0};
    plan.betas = {0.08}; // about beta_c / 2
    // profile decay reads the last three shells, which must clear the widest
    // source (tau up to 15.6, r about 22 here) by three tau octaves
    plan.rmax = 384.0;
    ExperimentReport rep = radiation_probe(plan);

    CHECK(rep.experiment == "radiation_probe");
    REQUIRE_FALSE(rep.verdicts.empty());
    for (const Verdict& v : rep.verdicts) {
        INFO(v.name << " measured " << v.measured << " vs " << v.relation << " " << v.bound);
        CHECK(v.pass);
    }
    CHECK(rep.all_pass());
}

TEST_CASE("hoelder probe: vertical differences shrink with a positive exponent") {
    SweepPlan plan;
    plan.spec = soft_power(1.0, 0.5); // beta_c = 0.3 leaves room for gamma = 1/4
    plan.lambdas = {1.0};
    plan.mus = {1e-2};
    plan.lmax = 1;
    plan.rmax = 256.0;
    plan.jobs = 2;
    ExperimentReport rep = hoelder_probe(plan);

    CHECK(rep.experiment == "hoelder_probe");
    for (const Verdict& v : rep.verdicts) {
        INFO(v.name << " measured " << v.measured << " vs " << v.relation << " " << v.bound);
        CHECK(v.pass);
    }

    SECTION("preconditions are enforced") {
        SweepPlan bad = plan;
        bad.s = 0.4;
        CHECK_THROWS_AS(hoelder_probe(bad), std::invalid_argument);
        bad = plan;
        bad.gamma = 0.45; // above beta_c = 0.3
        CHECK_THROWS_WITH(hoelder_probe(bad), ContainsSubstring("gamma"));
    }
}

TEST_CASE("sommerfeld check: the mu ladder lands on the outgoing solution") {
    SweepPlan plan = smoke_plan();
    plan.lambdas = {1.0};
    plan.rmax = 384.0; // defect-profile domain; the mu ladder runs at rmax_sommerfeld
    ExperimentReport rep = sommerfeld_check(plan);

    CHECK(rep.experiment == "sommerfeld_check");
    for (const Verdict& v : rep.verdicts) {
        INFO(v.name << " measured " << v.measured << " vs " << v.relation << " " << v.bound);
        CHECK(v.pass);
    }
    CHECK(rep.all_pass());
}

TEST_CASE("high-energy scaling: the dilation identity is exact on the grid") {
    SweepPlan plan = smoke_plan();
    plan.m_lo = 0;
    plan.m_hi = 2;
    ExperimentReport rep = high_energy_scaling(plan);

    CHECK(rep.experiment == "high_energy_scaling");
    const Verdict& id = find_verdict(rep, "scaling_identity");
    INFO("identity deviation " << id.measured);
    CHECK(id.pass);
    const Verdict& nx = find_verdict(rep, "scaling_norm_exactness");
    INFO("norm deviation " << nx.measured);
    CHECK(nx.pass);
    // Slopes over a short m range are recorded but only asserted on the full
    // range, where the fit has room to settle.
    CHECK(has_verdict(rep, "scaling_slope"));
    CHECK(has_verdict(rep, "scaling_slope_pr"));
}

TEST_CASE("rellich scan: zero free on the positive axis, control well fires") {
    SweepPlan plan = smoke_plan();
    plan.rellich_points = 5;
    plan.rellich_lmax = 2;
    plan.rmax_rellich = 64.0;
    ExperimentReport rep = rellich_scan(plan);

    CHECK(rep.experiment == "rellich_scan");
    for (const Verdict& v : rep.verdicts) {
        INFO(v.name << " measured " << v.measured << " vs " << v.relation << " " << v.bound);
        CHECK(v.pass);
    }
    CHECK(find_verdict(rep, "rellich_zero_free_with_q").pass);
    CHECK(find_verdict(rep, "rellich_zero_free_without_q").pass);
    CHECK(find_verdict(rep, "rellich_control_fires").pass);
    CHECK(find_verdict(rep, "rellich_control_localization").pass);
}
