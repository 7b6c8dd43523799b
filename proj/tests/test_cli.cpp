#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "laplab/cli.hpp"

using namespace laplab;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        auto ns = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() /
               ("laplab_cli_" + std::to_string(ns) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name, const std::string& text) const {
        fs::path p = path / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

const char* kGoodPreset = R"({
  "name": "cli_soft_power",
  "family": "soft_power",
  "c0": 1.0, "nu": 1.0, "eps": 1.0, "nu_prime": 2.0, "dim": 3,
  "c_low": 1.0, "C_up": 4.0,
  "q": { "family": "soft_power_sr", "amp": 0.1, "C": 0.1 },
  "sweep": { "lambdas": [1.0], "mus": [0.1, 0.01], "lmax": 1, "rmax": 96.0 }
})";

int run(cli::RunConfig cfg, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int code = cli::guarded(cfg, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

} // namespace

TEST_CASE("preset files resolve to validated specs") {
    TempDir tmp;
    auto path = tmp.file("good.json", kGoodPreset);
    auto j = cli::parse_json_file(path);
    PotentialSpec spec = spec_from_json(j);
    CHECK(spec.name == "cli_soft_power");
    CHECK(spec.family == PotentialFamily::soft_power);
    CHECK(spec.nu == 1.0);
    CHECK(spec.q_family == QFamily::soft_power_sr);
    CHECK(spec.C_q == 0.1);

    auto bad = tmp.file("family.json", R"({"family": "cubic_spline"})");
    CHECK_THROWS_AS(spec_from_json(cli::parse_json_file(bad)), std::invalid_argument);
}

TEST_CASE("parse errors carry line and column") {
    TempDir tmp;
    auto path = tmp.file("broken.json", "{\n  \"name\": \"x\",,\n}\n");
    CHECK_THROWS_WITH(cli::parse_json_file(path),
                      ContainsSubstring("line 2") && ContainsSubstring("column"));
    CHECK_THROWS_WITH(cli::parse_json_file((tmp.path / "missing.json").string()),
                      ContainsSubstring("cannot open"));
}

TEST_CASE("plan assembly: preset sweep first, explicit flags on top") {
    TempDir tmp;
    auto j = cli::parse_json_file(tmp.file("good.json", kGoodPreset));

    cli::RunConfig cfg;
    SweepPlan plan = cli::plan_from_preset(j, cfg);
    CHECK(plan.lambdas == std::vector<double>{1.0});
    CHECK(plan.mus == std::vector<double>{0.1, 0.01});
    CHECK(plan.lmax == 1);
    CHECK(plan.rmax == 96.0);
    CHECK(plan.jobs == 1);

    cfg.lmax = 2;
    cfg.tol = 1e-9;
    cfg.jobs = 4;
    cfg.grid_ratio = 1.02;
    cfg.grid_rmax = 500.0; // applied per command, not here
    SweepPlan over = cli::plan_from_preset(j, cfg);
    CHECK(over.lmax == 2);
    CHECK(over.rtol == 1e-9);
    CHECK(over.jobs == 4);
    CHECK(over.ratio == 1.02);
    CHECK(over.rmax == 96.0);
}

TEST_CASE("validate agrees with the runners about bad plans") {
    TempDir tmp;

    cli::RunConfig cfg;
    cfg.command = "validate";
    cfg.out_dir = (tmp.path / "out").string();

    SECTION("a good preset validates cleanly") {
        cfg.preset_path = tmp.file("good.json", kGoodPreset);
        std::string out;
        CHECK(run(cfg, &out) == 0);
        CHECK_THAT(out, ContainsSubstring("plan OK"));
        CHECK_THAT(out, ContainsSubstring("beta_c"));
    }

    SECTION("beta at or above beta_c is refused") {
        cfg.preset_path = tmp.file("beta.json", R"({
          "name": "beta_too_big", "family": "soft_power",
          "c0": 1.0, "nu": 1.0, "c_low": 1.0, "C_up": 4.0,
          "sweep": { "betas": [0.5] }
        })");
        std::string err;
        CHECK(run(cfg, nullptr, &err) == 2);
        CHECK_THAT(err, ContainsSubstring("beta"));
    }

    SECTION("spectral points outside the sector are refused") {
        cfg.preset_path = tmp.file("sector.json", R"({
          "name": "sector", "family": "soft_power",
          "c0": 1.0, "nu": 1.0, "c_low": 1.0, "C_up": 4.0,
          "sweep": { "lambdas": [10.0] }
        })");
        std::string err;
        CHECK(run(cfg, nullptr, &err) == 2);
        CHECK_THAT(err, ContainsSubstring("sector"));
    }
}

TEST_CASE("exit codes map the failure classes") {
    TempDir tmp;
    auto good = tmp.file("good.json", kGoodPreset);

    SECTION("missing or malformed config exits 2") {
        cli::RunConfig cfg;
        cfg.command = "resolvent";
        cfg.preset_path = (tmp.path / "nope.json").string();
        CHECK(run(cfg) == 2);

        cfg.preset_path = tmp.file("broken.json", "{ not json");
        CHECK(run(cfg) == 2);

        cli::RunConfig unk;
        unk.command = "frobnicate";
        unk.preset_path = good;
        CHECK(run(unk) == 2);
    }

    SECTION("a refused numerical run exits 3") {
        cli::RunConfig cfg;
        cfg.command = "resolvent";
        cfg.preset_path = good;
        cfg.out_dir = (tmp.path / "out").string();
        cfg.grid_rmax = 1e9; // exhausts the node budget
        std::string err;
        CHECK(run(cfg, nullptr, &err) == 3);
        CHECK_THAT(err, ContainsSubstring("numerical"));
    }

    SECTION("a passing resolvent run exits 0 and writes its artifacts") {
        cli::RunConfig cfg;
        cfg.command = "resolvent";
        cfg.preset_path = good;
        cfg.out_dir = (tmp.path / "out").string();
        cfg.grid_rmax = 64.0;
        std::string out;
        CHECK(run(cfg, &out) == 0);
        CHECK_THAT(out, ContainsSubstring("PASS"));

        std::string stem = cfg.out_dir + "/resolvent_cli_soft_power";
        REQUIRE(fs::exists(stem + ".csv"));
        REQUIRE(fs::exists(stem + ".json"));
        PartialWaveField back = read_field(stem);
        CHECK(back.grid->dim == 3);
        CHECK(back.grid->size() > 100);
    }

    SECTION("failed verdicts exit 1") {
        // rmax = 96 is far too small for the x10 contrast, so the sweep runs
        // to completion but one verdict fails.
        cli::RunConfig cfg;
        cfg.command = "lap-sweep";
        cfg.preset_path = good;
        cfg.out_dir = (tmp.path / "out").string();
        cfg.jobs = 2;
        std::string out;
        CHECK(run(cfg, &out) == 1);
        CHECK_THAT(out, ContainsSubstring("FAIL lap_contrast_lambda_1"));
        CHECK_THAT(out, ContainsSubstring("PASS lap_bounded_phi_lambda_1"));
        CHECK(fs::exists(cfg.out_dir + "/lap_sweep_cli_soft_power.json"));
        CHECK(fs::exists(cfg.out_dir + "/lap_sweep_cli_soft_power.csv"));
    }
}

TEST_CASE("list-presets catalogs a directory") {
    TempDir tmp;
    cli::RunConfig cfg;
    cfg.command = "list-presets";
    cfg.presets_dir = (tmp.path / "presets").string();

    std::string out;
    CHECK(run(cfg, &out) == 0);
    CHECK_THAT(out, ContainsSubstring("no presets"));

    fs::create_directories(cfg.presets_dir);
    std::ofstream(fs::path(cfg.presets_dir) / "a_good.json") << kGoodPreset;
    std::ofstream(fs::path(cfg.presets_dir) / "b_bad.json") << "{ nope";
    CHECK(run(cfg, &out) == 0);
    CHECK_THAT(out, ContainsSubstring("cli_soft_power"));
    CHECK_THAT(out, ContainsSubstring("invalid"));
}

TEST_CASE("LAPLAB_OUT overrides the output directory") {
    TempDir tmp;
    auto good = tmp.file("good.json", kGoodPreset);
    std::string env_out = (tmp.path / "env_out").string();
    ::setenv("LAPLAB_OUT", env_out.c_str(), 1);

    std::vector<std::string> args = {"lap-lab", "validate", "--preset", good};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    int code = cli::main_entry(int(argv.size()), argv.data());
    ::unsetenv("LAPLAB_OUT");
    CHECK(code == 0);

    // A command that writes artifacts must land them in the override.
    ::setenv("LAPLAB_OUT", env_out.c_str(), 1);
    args = {"lap-lab", "resolvent", "--preset", good, "--grid-rmax", "64"};
    argv.clear();
    for (auto& a : args) argv.push_back(a.data());
    code = cli::main_entry(int(argv.size()), argv.data());
    ::unsetenv("LAPLAB_OUT");
    CHECK(code == 0);
    CHECK(fs::exists(env_out + "/resolvent_cli_soft_power.json"));
}
