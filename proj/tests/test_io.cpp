#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkr/io.hpp"
#include "test_helpers.hpp"

using namespace qkr;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory under the test runner's CWD.
fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("io_test_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("format_double round-trips exactly") {
    const double values[] = {0.0,   -0.0,        1.0 / 3.0,   3.141592653589793,
                             0.1,   1e-300,      -2.5e222,    5e-324,
                             123.0, 1.7976931348623157e308, -6.02e23};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("series CSV layout") {
    ObservableSeries series;
    series.records.push_back({0, 1.0, 0.0, 0.0, {}});
    series.records.push_back({5, 2.5, 1.0 / 3.0, 0.125, {}});
    const std::string csv = series_csv(series);
    CHECK(csv.substr(0, csv.find('\n')) == "t,xi,n2,w");
    CHECK(count_lines(csv) == 3);
    CHECK(csv.find("\n0,1,0,0\n") != std::string::npos);
    CHECK(csv.find("5,2.5,0.33333333333333331,0.125") != std::string::npos);
}

TEST_CASE("scan CSV layout") {
    ScanResult scan;
    scan.points.push_back({1.2, 10.0, 0.5, 0.01, 0.001});
    const std::string csv = scan_csv(scan);
    CHECK(csv.substr(0, csv.find('\n')) == "k,xi_mean,xi_stderr,w_mean,w_stderr");
    CHECK(csv.find("1.2,10,0.5,0.01,0.001\n") != std::string::npos);
}

TEST_CASE("text files round-trip") {
    const fs::path dir = fresh_dir("text");
    const std::string path = (dir / "blob.txt").string();
    const std::string content = "line one\nline two\n\x01\x02 binary-ish\n";
    write_text_file(path, content);
    CHECK(read_text_file(path) == content);
    CHECK_THROWS_AS((void)read_text_file((dir / "missing").string()), Error);
    CHECK_THROWS_AS(write_text_file((dir / "nodir" / "x").string(), "y"), Error);
}

TEST_CASE("profile dumps round-trip and reject partial records") {
    const fs::path dir = fresh_dir("dump");
    std::vector<double> profile(64);
    for (std::size_t i = 0; i < profile.size(); ++i) profile[i] = 1.0 / (1.0 + double(i));
    const std::string path = (dir / "p.bin").string();
    write_profile_dump(path, profile);
    CHECK(fs::file_size(path) == 64 * sizeof(double));
    CHECK(read_profile_dump(path) == profile);

    write_text_file((dir / "torn.bin").string(), std::string(12, 'x'));
    CHECK_THROWS_AS((void)read_profile_dump((dir / "torn.bin").string()), Error);
    CHECK_THROWS_AS((void)read_profile_dump((dir / "missing.bin").string()), Error);
}

TEST_CASE("config parsing fills defaults and applies overrides") {
    const ExperimentConfig def = parse_config("{}");
    CHECK(def.mode == "evolve");
    CHECK(def.n_q == 6);
    CHECK(def.k == doctest::Approx(1.8));
    CHECK(def.engine == "oracle");
    CHECK(def.record_every == 1);
    CHECK(def.realizations == 4);
    CHECK(def.tail_fraction == doctest::Approx(0.1));
    CHECK(def.k_points == 17);
    CHECK_FALSE(def.keep_profile);

    const ExperimentConfig c = parse_config(R"({
        "mode": "scan", "n_q": 8, "k": 2.2, "engine": "circuit",
        "epsilon": 1e-4, "mu": 2e-5, "seed": 42, "t_max": 500,
        "k_grid": [1.0, 1.5, 2.0], "keep_profile": true,
        "points": [[0.1, 0.2], [0.3, 0.4]]
    })");
    CHECK(c.mode == "scan");
    CHECK(c.n_q == 8);
    CHECK(c.engine == "circuit");
    CHECK(c.epsilon == doctest::Approx(1e-4));
    CHECK(c.seed == 42);
    CHECK(c.k_grid == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(c.keep_profile);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[1].eps_tilde == doctest::Approx(0.3));
    CHECK(c.points[1].delta_k_c == doctest::Approx(0.4));
}

TEST_CASE("config parsing rejects junk") {
    CHECK_THROWS_AS((void)parse_config("not json"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[1,2]"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"n_qubits": 6})"), ConfigError); // unknown field
    CHECK_THROWS_AS((void)parse_config(R"({"n_q": "six"})"), ConfigError);  // wrong type
    CHECK_THROWS_AS((void)parse_config(R"({"seed": "later"})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"points": [[0.1]]})"), ConfigError);
}

TEST_CASE("config validation") {
    ExperimentConfig ok = parse_config("{}");
    CHECK_NOTHROW(ok.validate());

    auto reject = [](const std::string& json_text) {
        ExperimentConfig c = parse_config(json_text);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    reject(R"({"mode": "explore"})");
    reject(R"({"engine": "gpu"})");
    reject(R"({"phases_source": "psychic"})");
    reject(R"({"critical_method": "wavelet"})");
    reject(R"({"epsilon": -1e-4})");
    reject(R"({"engine": "oracle", "epsilon": 1e-4})"); // imperfect evolve needs circuit
    reject(R"({"t_max": -1})");
    reject(R"({"record_every": 0})");
    reject(R"({"realizations": 0})");
    reject(R"({"tail_fraction": 0.0})");
    reject(R"({"tail_fraction": 1.5})");
    reject(R"({"mode": "scan", "k_points": 1})");
    reject(R"({"mode": "scan", "k_min": 2.0, "k_max": 1.0})");
    reject(R"({"n0": 64})");      // n_q = 6 -> dim 64
    reject(R"({"gamma_target": 0.6})");
    reject(R"({"out_dir": ""})");

    ExperimentConfig imperfect = parse_config(R"({"engine": "circuit", "epsilon": 1e-4})");
    CHECK_NOTHROW(imperfect.validate());
    // Scaling mode touches no model parameters, so engine junk is irrelevant.
    ExperimentConfig scaling = parse_config(R"({"mode": "scaling", "engine": "gpu"})");
    CHECK_NOTHROW(scaling.validate());
}

TEST_CASE("grid resolution") {
    ExperimentConfig c = parse_config("{}");
    const std::vector<double> grid = c.resolved_k_grid();
    REQUIRE(grid.size() == 17);
    CHECK(grid.front() == doctest::Approx(1.0));
    CHECK(grid.back() == doctest::Approx(2.6));
    CHECK(c.resolved_k_gate_count() == doctest::Approx(1.8));

    c.k_grid = {0.5, 0.7};
    CHECK(c.resolved_k_grid() == std::vector<double>{0.5, 0.7});
    CHECK(c.resolved_k_gate_count() == doctest::Approx(0.6));
    c.k_gate_count = 2.0;
    CHECK(c.resolved_k_gate_count() == doctest::Approx(2.0));
}

TEST_CASE("evolve experiment writes a complete artifact set") {
    const fs::path dir = fresh_dir("evolve");
    ExperimentConfig c = parse_config("{}");
    c.out_dir = (dir / "run").string();
    c.t_max = 10;

    const ExperimentArtifacts artifacts = run_experiment(c);
    CHECK(artifacts.files == std::vector<std::string>{"metadata.json", "series.csv"});

    const std::string series = read_text_file((dir / "run" / "series.csv").string());
    CHECK(count_lines(series) == 12); // header + t = 0..10
    CHECK(series.rfind("t,xi,n2,w\n0,1,0,0\n", 0) == 0);

    const auto manifest = nlohmann::json::parse(read_text_file((dir / "run" / "MANIFEST").string()));
    CHECK(manifest.at("status") == "complete");
    CHECK(manifest.at("mode") == "evolve");
    CHECK(manifest.at("files").size() == 2);
    CHECK_FALSE(manifest.contains("error"));

    const auto meta = nlohmann::json::parse(read_text_file((dir / "run" / "metadata.json").string()));
    CHECK(meta.contains("version"));
    CHECK(meta.at("config").at("t_max") == 10);
    CHECK(meta.at("phase_generator").at("n_q") == 6);
}

TEST_CASE("circuit evolve records the imperfection profile") {
    const fs::path dir = fresh_dir("evolve_circuit");
    ExperimentConfig c = parse_config(
        R"({"engine": "circuit", "n_q": 4, "k": 1.2, "epsilon": 1e-4, "mu": 2e-5, "t_max": 5})");
    c.out_dir = (dir / "run").string();
    run_experiment(c);

    const auto meta = nlohmann::json::parse(read_text_file((dir / "run" / "metadata.json").string()));
    CHECK(meta.at("profile").at("eta").size() == 4);
    CHECK(meta.at("profile").at("epsilon") == doctest::Approx(1e-4));
    const std::string series = read_text_file((dir / "run" / "series.csv").string());
    CHECK(count_lines(series) == 7);
}

TEST_CASE("profile dumps appear when asked for") {
    const fs::path dir = fresh_dir("evolve_dump");
    ExperimentConfig c = parse_config(R"({"keep_profile": true, "t_max": 4, "record_every": 2})");
    c.out_dir = (dir / "run").string();
    const ExperimentArtifacts artifacts = run_experiment(c);

    const std::vector<std::string> expected = {"metadata.json", "series.csv", "profile_000000.bin",
                                               "profile_000002.bin", "profile_000004.bin"};
    CHECK(artifacts.files == expected);
    for (int t : {0, 2, 4}) {
        char name[32];
        std::snprintf(name, sizeof(name), "profile_%06d.bin", t);
        const std::vector<double> p = read_profile_dump((dir / "run" / name).string());
        REQUIRE(p.size() == 64);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("experiments are byte-reproducible") {
    ExperimentConfig c = parse_config(R"({"mode": "scan", "n_q": 5, "t_max": 30,
                                          "k_grid": [1.0, 1.8, 2.6], "realizations": 2})");
    const fs::path a = fresh_dir("repro_a") / "run";
    const fs::path b = fresh_dir("repro_b") / "run";

    c.out_dir = a.string();
    run_experiment(c);
    c.out_dir = b.string();
    run_experiment(c);

    // metadata.json echoes out_dir; every other artifact must match exactly.
    CHECK(read_text_file((a / "scan.csv").string()) == read_text_file((b / "scan.csv").string()));
    CHECK(read_text_file((a / "MANIFEST").string()) == read_text_file((b / "MANIFEST").string()));

    // Rerunning in place reproduces every file, metadata included.
    const std::string meta_a = read_text_file((a / "metadata.json").string());
    const std::string scan_a = read_text_file((a / "scan.csv").string());
    c.out_dir = a.string();
    run_experiment(c);
    CHECK(read_text_file((a / "metadata.json").string()) == meta_a);
    CHECK(read_text_file((a / "scan.csv").string()) == scan_a);
}

TEST_CASE("failed runs leave an incomplete manifest") {
    const fs::path dir = fresh_dir("failure");
    ExperimentConfig c = parse_config(R"({"mode": "scaling", "points": [[0.1, 0.2], [0.2, 0.3]]})");
    c.out_dir = (dir / "run").string();
    CHECK_THROWS_AS((void)run_experiment(c), InsufficientPoints);

    const auto manifest = nlohmann::json::parse(read_text_file((dir / "run" / "MANIFEST").string()));
    CHECK(manifest.at("status") == "incomplete");
    CHECK(manifest.at("error").get<std::string>().size() > 0);
}

TEST_CASE("critical experiment emits per-epsilon scans and the summary table") {
    const fs::path dir = fresh_dir("critical");
    ExperimentConfig c = parse_config(R"({
        "mode": "critical", "engine": "circuit", "n_q": 5, "t_max": 40,
        "k_grid": [1.0, 1.8, 2.6], "realizations": 2,
        "epsilon_list": [0.0, 2e-4]
    })");
    c.out_dir = (dir / "run").string();
    const ExperimentArtifacts artifacts = run_experiment(c);

    const std::vector<std::string> expected = {"metadata.json", "scan_eps_00.csv",
                                               "scan_eps_01.csv", "critical.csv"};
    CHECK(artifacts.files == expected);

    const std::string table = read_text_file((dir / "run" / "critical.csv").string());
    CHECK(table.substr(0, table.find('\n')) ==
          "epsilon,eps_tilde,kc_ipr,kc_ipr_stderr,kc_w,kc_w_stderr,delta_kc");
    CHECK(count_lines(table) == 3);
    CHECK(table.find("\n0,0,") != std::string::npos); // eps = 0 -> eps_tilde = 0

    const std::string scan0 = read_text_file((dir / "run" / "scan_eps_00.csv").string());
    CHECK(count_lines(scan0) == 4);
}

TEST_CASE("scaling experiment reads points from CSV and skips failed rows") {
    const fs::path dir = fresh_dir("scaling");
    std::string pts = "epsilon,eps_tilde,delta_kc\n";
    for (double e : {0.02, 0.05, 0.12, 0.3}) {
        pts += "0," + format_double(e) + "," + format_double(3.0 * std::pow(e, 0.64)) + "\n";
    }
    pts += "0,nan,nan\n"; // a run whose estimate never converged
    const std::string pts_path = (dir / "points.csv").string();
    write_text_file(pts_path, pts);

    ExperimentConfig c = parse_config("{}");
    c.mode = "scaling";
    c.points_csv = pts_path;
    c.out_dir = (dir / "run").string();
    const ExperimentArtifacts artifacts = run_experiment(c);
    CHECK(artifacts.files ==
          std::vector<std::string>{"metadata.json", "scaling.csv", "scaling_points.csv"});

    const std::string fit = read_text_file((dir / "run" / "scaling.csv").string());
    CHECK(fit.substr(0, fit.find('\n')) == "A,A_stderr,alpha,alpha_stderr,n_used,n_excluded");
    // One data line: A ~ 3, alpha ~ 0.64, 4 used, 0 excluded (NaN rows are dropped upstream).
    const std::string row = fit.substr(fit.find('\n') + 1);
    CHECK(std::strtod(row.c_str(), nullptr) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(row.find(",4,0\n") != std::string::npos);
    CHECK(count_lines(read_text_file((dir / "run" / "scaling_points.csv").string())) == 5);

    write_text_file(pts_path, "a,b\n1,2\n");
    CHECK_THROWS_AS((void)run_experiment(c), ConfigError);
}
