#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "socdyn/experiments.hpp"
#include "socdyn/io.hpp"

using namespace socdyn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static std::mt19937_64 gen(std::random_device{}());
        path = fs::temp_directory_path() / ("socdyn_ut_" + std::to_string(gen()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("config parser round trip") {
    const std::string text = R"(# experiment definition
experiment = arrow_a3   # trailing comment
n = 64, 256,1024
sigma_sq = 1.5
dt = 0.01
horizon = 25
replicas = 500
seed = 42
workers = 1
out_dir = /tmp/somewhere
k_box = 2.5
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.experiment == "arrow_a3");
    CHECK(cfg.n_values == std::vector<int>{64, 256, 1024});
    CHECK(cfg.sigma_sq == 1.5);
    CHECK(cfg.dt == 0.01);
    CHECK(cfg.horizon == 25.0);
    CHECK(cfg.replicas == 500);
    CHECK(cfg.seed == 42);
    CHECK(cfg.workers == 1);
    CHECK(cfg.out_dir == "/tmp/somewhere");
    CHECK(cfg.k_box == 2.5);
}

TEST_CASE("config parser names the offending key") {
    try {
        parse_config_text("experiment = arrow_a3\nwibble = 7\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.key == "wibble");
        CHECK(std::string(e.what()).find("wibble") != std::string::npos);
    }

    try {
        parse_config_text("n = 4\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.key == "experiment");
    }

    CHECK_THROWS_AS(parse_config_text("experiment = x\ndt = fast\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("experiment = x\ndt = -0.1\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("experiment = x\nn = 4,,8\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("experiment = x\nn =\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("experiment = x\nno equals sign here\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("experiment = x\nworkers = 0\n"), config_error);
}

TEST_CASE("missing keys surface when an experiment needs them") {
    ExperimentConfig cfg = parse_config_text("experiment = arrow_a1\nsigma_sq = 1\n");
    try {
        (void)cfg.dt_required();
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.key == "dt");
    }
    try {
        ExperimentConfig no_sigma = parse_config_text("experiment = arrow_a3\n");
        no_sigma.out_dir = "/tmp";
        run_experiment(no_sigma);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.key == "sigma_sq");
    }
    try {
        ExperimentConfig bad = parse_config_text("experiment = warp_drive\nsigma_sq = 1\n");
        bad.out_dir = "/tmp";
        run_experiment(bad);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.key == "experiment");
        CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
    }
}

TEST_CASE("float formatting round trips") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, 123456789.123456789}) {
        CHECK(std::stod(format_g17(v)) == v);
    }
}

TEST_CASE("csv writers produce the documented schemas") {
    RescaledPath path;
    path.times = {0.0, 0.5};
    path.s_tilde = {0.25, -1.0};
    path.t_tilde = {0.125, 2.0};
    std::ostringstream out;
    write_path_csv(out, path);
    CHECK(out.str() == "t,s_tilde,t_tilde\n0,0.25,0.125\n0.5,-1,2\n");

    std::ostringstream samples;
    write_samples_csv(samples, "u_T", {1.5, -0.5});
    CHECK(samples.str() == "u_T\n1.5\n-0.5\n");

    std::ostringstream overlay;
    write_cdf_overlay_csv(overlay, {0.3, -0.2, 0.1}, [](double x) { return 0.5 * (x + 1.0); },
                          "ref_cdf");
    const std::string text = overlay.str();
    CHECK(text.substr(0, text.find('\n')) == "value,empirical_cdf,ref_cdf");
    // Empirical column climbs 1/3, 2/3, 1 over the sorted values.
    CHECK(text.find("-0.20000000000000001,0.33333333333333331,0.40000000000000002") !=
          std::string::npos);
    CHECK(text.find("0.29999999999999999,1,") != std::string::npos);
}

TEST_CASE("report json embeds the resolved config without workers or out_dir") {
    ExperimentConfig cfg = parse_config_text(
        "experiment = arrow_a3\nsigma_sq = 1\nreplicas = 10\nworkers = 4\nout_dir = /x\n");
    const auto j = report_to_json(cfg, {check_below("alpha", 0.01, 0.02),
                                        check_below("beta", 5.0, 2.0)});
    CHECK(j["config"]["experiment"] == "arrow_a3");
    CHECK(j["config"]["sigma_sq"] == 1.0);
    CHECK(j["config"]["replicas"] == 10);
    CHECK(j["config"].contains("seed"));
    CHECK_FALSE(j["config"].contains("workers"));
    CHECK_FALSE(j["config"].contains("out_dir"));
    CHECK_FALSE(j["config"].contains("dt")); // not provided, not resolved by a runner
    REQUIRE(j["checks"].size() == 2);
    CHECK(j["checks"][0]["name"] == "alpha");
    CHECK(j["checks"][0]["pass"] == true);
    CHECK(j["checks"][1]["pass"] == false);
    CHECK(j["all_pass"] == false);
}

TEST_CASE("generator suite experiment passes end to end") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.experiment = "generator_suite";
    cfg.n_values = {2, 5};
    cfg.seed = 9;
    cfg.out_dir = dir.str();
    const ExperimentOutcome outcome = run_experiment(cfg);
    CHECK(outcome.all_pass());
    CHECK(fs::exists(dir.path / "report.json"));
    CHECK(fs::exists(dir.path / "remainder_sups.csv"));

    const auto j = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(j["all_pass"] == true);
    bool found_identity = false;
    for (const auto& c : j["checks"])
        if (c["name"] == "particle_vs_plane_identity_gap") {
            found_identity = true;
            CHECK(c["value"].get<double>() < 1e-8);
        }
    CHECK(found_identity);
}

TEST_CASE("limit-law experiment writes its artifacts") {
    TempDir dir;
    ExperimentConfig cfg = parse_config_text(
        "experiment = arrow_a3\nsigma_sq = 1\ndt = 0.02\nhorizon = 5\nreplicas = 400\nseed = 3\n");
    cfg.out_dir = dir.str();
    cfg.workers = 1;
    const ExperimentOutcome outcome = run_experiment(cfg);
    REQUIRE(outcome.checks.size() == 2);
    CHECK(fs::exists(dir.path / "limit_terminal.csv"));
    CHECK(fs::exists(dir.path / "cdf_overlay.csv"));

    const std::string csv = slurp(dir.path / "limit_terminal.csv");
    CHECK(csv.rfind("u_T\n", 0) == 0);
    // One header plus one row per replica.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 401);
}

TEST_CASE("equilibrium experiment emits diagnostics with exactly three keys") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.experiment = "arrow_a2";
    cfg.sigma_sq = 1.0;
    cfg.n_values = {16};
    cfg.replicas = 300;
    cfg.seed = 11;
    cfg.out_dir = dir.str();
    run_experiment(cfg);

    const auto diag = nlohmann::json::parse(slurp(dir.path / "mala_diagnostics.json"));
    CHECK(diag.size() == 3);
    CHECK(diag.contains("acceptance_rate"));
    CHECK(diag.contains("ess"));
    CHECK(diag.contains("sweeps"));
    CHECK(diag["acceptance_rate"].get<double>() > 0.0);
    CHECK(fs::exists(dir.path / "equilibrium_samples.csv"));
    const std::string csv = slurp(dir.path / "equilibrium_samples.csv");
    CHECK(csv.rfind("s_star_rescaled\n", 0) == 0);
}

TEST_CASE("reports are byte-identical across worker counts") {
    auto run_with_workers = [](int workers, const std::string& out_dir) {
        ExperimentConfig cfg;
        cfg.experiment = "arrow_a4";
        cfg.sigma_sq = 1.0;
        cfg.n_values = {16};
        cfg.dt = 0.05;
        cfg.horizon = 1.0;
        cfg.replicas = 50;
        cfg.seed = 77;
        cfg.workers = workers;
        cfg.out_dir = out_dir;
        run_experiment(cfg);
    };
    TempDir a, b;
    run_with_workers(1, a.str());
    run_with_workers(4, b.str());
    for (const char* name : {"report.json", "system_terminal.csv", "limit_terminal.csv",
                             "cdf_overlay.csv"}) {
        INFO(name);
        CHECK(slurp(a.path / name) == slurp(b.path / name));
    }
}

TEST_CASE("collapsing suite walks sizes and writes medians") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.experiment = "collapsing_suite";
    cfg.sigma_sq = 1.0;
    cfg.n_values = {16, 64, 256};
    cfg.dt = 0.05;
    cfg.horizon = 0.5;
    cfg.replicas = 30;
    cfg.seed = 5;
    cfg.workers = 1;
    cfg.k_box = 1.5; // the default box would touch the n = 16 domain edge
    cfg.out_dir = dir.str();
    const ExperimentOutcome outcome = run_experiment(cfg);
    REQUIRE(outcome.checks.size() == 4);

    const std::string csv = slurp(dir.path / "collapsing_medians.csv");
    CHECK(csv.rfind("n,median_sup_t\n", 0) == 0);
    CHECK(csv.find("\n16,") != std::string::npos);
    CHECK(csv.find("\n256,") != std::string::npos);

    // The pathwise inequality checks must hold even at toy sizes.
    const auto j = nlohmann::json::parse(slurp(dir.path / "report.json"));
    for (const auto& c : j["checks"]) {
        const std::string name = c["name"];
        if (name == "drift_condition_violations" || name == "noise_condition_violations")
            CHECK(c["value"].get<double>() == 0.0);
    }
}

TEST_CASE("system vs equilibrium experiment produces both sample files") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.experiment = "arrow_a1";
    cfg.sigma_sq = 1.0;
    cfg.n_values = {16};
    cfg.dt = 0.02;
    cfg.horizon = 3.0;
    cfg.replicas = 100;
    cfg.seed = 21;
    cfg.workers = 4;
    cfg.out_dir = dir.str();
    run_experiment(cfg);
    const std::string sys = slurp(dir.path / "system_terminal.csv");
    CHECK(sys.rfind("s_tilde_T\n", 0) == 0);
    CHECK(std::count(sys.begin(), sys.end(), '\n') == 101);
    CHECK(fs::exists(dir.path / "equilibrium_samples.csv"));
    CHECK(fs::exists(dir.path / "cdf_overlay.csv"));
}

TEST_CASE("unwritable output directory fails before compute") {
    ExperimentConfig cfg;
    cfg.experiment = "arrow_a3";
    cfg.sigma_sq = 1.0;
    cfg.out_dir = "/proc/definitely/not/writable";
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
}
