#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkr/transition_lab.hpp"
#include "test_helpers.hpp"

using namespace qkr;
using namespace qkr::testing;

namespace {

// Sets QKR_WORKERS for one scope and restores the previous state.
struct WorkersEnv {
    explicit WorkersEnv(const char* value) {
        const char* old = std::getenv("QKR_WORKERS");
        if (old) saved_ = old;
        had_ = old != nullptr;
        if (value)
            setenv("QKR_WORKERS", value, 1);
        else
            unsetenv("QKR_WORKERS");
    }
    ~WorkersEnv() {
        if (had_)
            setenv("QKR_WORKERS", saved_.c_str(), 1);
        else
            unsetenv("QKR_WORKERS");
    }
    std::string saved_;
    bool had_ = false;
};

ScanResult synthetic_scan(const std::vector<double>& ks, const std::vector<double>& xis,
                          const std::vector<double>& ws) {
    ScanResult scan;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        ScanPoint p;
        p.k = ks[i];
        p.xi_mean = xis[i];
        p.xi_stderr = 0.5;
        p.w_mean = ws.empty() ? 0.0 : ws[i];
        p.w_stderr = 0.01;
        scan.points.push_back(p);
    }
    return scan;
}

} // namespace

TEST_CASE("worker pool width comes from the environment") {
    {
        WorkersEnv env("3");
        CHECK(worker_pool_width() == 3);
    }
    {
        WorkersEnv env("1");
        CHECK(worker_pool_width() == 1);
    }
    {
        WorkersEnv env(nullptr);
        CHECK(worker_pool_width() >= 1);
    }
    for (const char* bad : {"0", "-2", "abc", "2x", ""}) {
        WorkersEnv env(bad);
        CHECK_THROWS_AS((void)worker_pool_width(), InvalidWidth);
    }
}

TEST_CASE("parallel loop covers every item exactly once") {
    WorkersEnv env("4");
    std::vector<std::atomic<int>> hits(37);
    parallel_for_items(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);

    parallel_for_items(0, [&](std::size_t) { FAIL("no items expected"); });
}

TEST_CASE("parallel loop propagates exceptions") {
    WorkersEnv env("2");
    CHECK_THROWS_WITH_AS(
        parallel_for_items(8,
                           [&](std::size_t i) {
                               if (i == 3) throw std::runtime_error("boom");
                           }),
        "boom", std::runtime_error);
}

TEST_CASE("circuit evolve matches a hand-driven perfect run") {
    ModelParams p{6, 1.4, 0.2, -1, 7};
    const PhaseGeneratorSpec spec = build_phase_generator(p);
    const ImperfectionProfile zero = make_imperfection_profile(6, 0.0, 0.0, 7, 0);

    StateVector managed = StateVector::basis_state(6, 0);
    const ObservableSeries series = circuit_evolve(managed, p, spec, zero, 25, 5);

    StateVector manual = StateVector::basis_state(6, 0);
    for (int t = 0; t < 25; ++t) apply_stream(manual, map_iteration_stream(p, spec, t));

    CHECK(max_amplitude_diff(managed, manual) == 0.0);
    std::vector<int> ts;
    for (const auto& r : series.records) ts.push_back(r.t);
    CHECK(ts == std::vector<int>{0, 5, 10, 15, 20, 25});
    CHECK(series.records.back().xi == doctest::Approx(ipr(manual)).epsilon(1e-12));
}

TEST_CASE("scan config validation") {
    ScanConfig cfg;
    cfg.k_grid = {1.0, 1.5};
    CHECK_NOTHROW(cfg.validate());

    ScanConfig empty = cfg;
    empty.k_grid.clear();
    CHECK_THROWS_AS(empty.validate(), ConfigError);

    ScanConfig unsorted = cfg;
    unsorted.k_grid = {1.5, 1.0};
    CHECK_THROWS_AS(unsorted.validate(), ConfigError);

    ScanConfig no_runs = cfg;
    no_runs.n_realizations = 0;
    CHECK_THROWS_AS(no_runs.validate(), ConfigError);

    ScanConfig bad_tail = cfg;
    bad_tail.tail_fraction = 0.0;
    CHECK_THROWS_AS(bad_tail.validate(), ConfigError);

    // Imperfections are a per-gate notion; the exact-map engine has none.
    ScanConfig imperfect_oracle = cfg;
    imperfect_oracle.engine = Engine::Oracle;
    imperfect_oracle.epsilon = 1e-4;
    CHECK_THROWS_AS(imperfect_oracle.validate(), ConfigError);
}

TEST_CASE("default grid brackets the transition") {
    const std::vector<double> grid = default_k_grid();
    REQUIRE(grid.size() == 17);
    CHECK(grid.front() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(grid.back() == doctest::Approx(2.6).epsilon(1e-14));
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("zero-length scan reports the initial state") {
    ScanConfig cfg;
    cfg.n_q = 5;
    cfg.k_grid = {1.0, 2.0};
    cfg.t_max = 0;
    cfg.n_realizations = 2;
    const ScanResult scan = scan_k(cfg);
    REQUIRE(scan.points.size() == 2);
    for (const auto& p : scan.points) {
        CHECK(p.xi_mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.w_mean == 0.0);
        CHECK(p.xi_stderr == 0.0);
    }
}

TEST_CASE("scans are deterministic") {
    ScanConfig cfg;
    cfg.n_q = 6;
    cfg.k_grid = {1.2, 1.8, 2.4};
    cfg.t_max = 60;
    cfg.n_realizations = 2;
    cfg.seed = 5;
    const ScanResult a = scan_k(cfg);
    const ScanResult b = scan_k(cfg);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].xi_mean == b.points[i].xi_mean);
        CHECK(a.points[i].w_mean == b.points[i].w_mean);
        CHECK(a.points[i].xi_stderr == b.points[i].xi_stderr);
    }
}

TEST_CASE("localized and delocalized scans differ sharply") {
    ScanConfig cfg;
    cfg.n_q = 8;
    cfg.k_grid = {1.2, 2.4};
    cfg.t_max = 2000;
    cfg.n_realizations = 4;
    cfg.engine = Engine::Oracle;
    cfg.seed = 1;
    const ScanResult scan = scan_k(cfg);
    REQUIRE(scan.points.size() == 2);
    CHECK(scan.points[0].xi_mean * 2.0 < scan.points[1].xi_mean);
}

TEST_CASE("critical point from a synthetic step") {
    std::vector<double> ks, xis, ws;
    for (int i = 0; i <= 8; ++i) {
        const double k = 1.0 + 0.25 * i;
        ks.push_back(k);
        xis.push_back(k < 2.0 ? 1.0 : 256.0);
        ws.push_back(k < 2.0 ? 0.0 : 0.5);
    }
    const ScanResult scan = synthetic_scan(ks, xis, ws);

    const CriticalPoint by_xi = find_critical_point(scan, CriticalMethod::IprMidpoint);
    CHECK(std::abs(by_xi.k_c - 2.0) <= 0.25);
    CHECK(by_xi.method == CriticalMethod::IprMidpoint);
    CHECK(by_xi.stderr > 0.0);

    const CriticalPoint by_w = find_critical_point(scan, CriticalMethod::WThreshold);
    CHECK(std::abs(by_w.k_c - 2.0) <= 0.25);
    CHECK(std::abs(by_xi.k_c - by_w.k_c) <= 2 * 0.25);
}

TEST_CASE("critical point interpolates a smooth crossing") {
    // xi rises linearly from 10 to 90: midpoint 50 is met exactly halfway.
    const ScanResult scan =
        synthetic_scan({1.0, 2.0, 3.0}, {10.0, 50.0, 90.0}, {0.0, 0.25, 0.5});
    const CriticalPoint by_xi = find_critical_point(scan, CriticalMethod::IprMidpoint);
    CHECK(by_xi.k_c == doctest::Approx(2.0).epsilon(1e-12));
    const CriticalPoint by_w = find_critical_point(scan, CriticalMethod::WThreshold);
    CHECK(by_w.k_c == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scans without a transition are rejected") {
    CHECK_THROWS_AS((void)find_critical_point(
                        synthetic_scan({1.0, 2.0, 3.0}, {5.0, 6.0, 7.0}, {}),
                        CriticalMethod::IprMidpoint),
                    NoTransitionInRange);

    ScanResult single = synthetic_scan({1.0}, {1.0}, {});
    CHECK_THROWS_AS((void)find_critical_point(single, CriticalMethod::IprMidpoint),
                    NoTransitionInRange);

    // Spanning xi regimes is not enough for the W method if W never crosses.
    CHECK_THROWS_AS((void)find_critical_point(
                        synthetic_scan({1.0, 2.0, 3.0}, {1.0, 5.0, 100.0}, {0.0, 0.01, 0.02}),
                        CriticalMethod::WThreshold),
                    NoTransitionInRange);
}

TEST_CASE("engines locate the same critical point") {
    ScanConfig cfg;
    cfg.n_q = 8;
    cfg.k_grid = default_k_grid();
    cfg.t_max = 2000;
    cfg.n_realizations = 4;
    cfg.seed = 1;

    cfg.engine = Engine::Oracle;
    const CriticalPoint oracle = find_critical_point(scan_k(cfg), CriticalMethod::IprMidpoint);
    cfg.engine = Engine::Circuit;
    const CriticalPoint circuit = find_critical_point(scan_k(cfg), CriticalMethod::IprMidpoint);
    CHECK(std::abs(oracle.k_c - circuit.k_c) <= 0.1);
}

TEST_CASE("IPR is robust where the second moment is fragile") {
    // Static imperfections of eps = mu = 2e-5 leave xi within 30% of the
    // ideal run but blow up <n^2> by an order of magnitude through the
    // far-tail plateau (n_q = 10, k = 1.2, 10^3 kicks, 4 disorder draws,
    // observables time-averaged over the trailing 10%).
    const int n_q = 10, t_max = 1000, tail = 100;
    double xi_ratio_sum = 0.0, n2_ratio_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        double xi_avg[2], n2_avg[2];
        int idx = 0;
        for (double eps : {0.0, 2e-5}) {
            ModelParams p{n_q, 1.2, 0.2, -1, seed};
            RngStream disorder = make_stream(seed, StreamPurpose::Disorder, 0);
            const PhaseGeneratorSpec spec = build_phase_generator(n_q, p.pairs(), disorder);
            const ImperfectionProfile profile = make_imperfection_profile(n_q, eps, eps, seed, 0);
            StateVector psi = StateVector::basis_state(n_q, 0);
            double xs = 0.0, ns = 0.0;
            for (int t = 0; t < t_max; ++t) {
                run_with_imperfections(psi, map_iteration_stream(p, spec, t), profile);
                if (t >= t_max - tail) {
                    xs += ipr(psi);
                    ns += second_moment(psi, 0);
                }
            }
            xi_avg[idx] = xs / tail;
            n2_avg[idx] = ns / tail;
            ++idx;
        }
        xi_ratio_sum += xi_avg[1] / xi_avg[0];
        n2_ratio_sum += n2_avg[1] / n2_avg[0];
    }
    CHECK(std::abs(xi_ratio_sum / 4.0 - 1.0) <= 0.30);
    CHECK(n2_ratio_sum / 4.0 >= 10.0);
}

TEST_CASE("power-law fit recovers exact data") {
    std::vector<ScalingPoint> pts;
    for (double e : {0.02, 0.04, 0.08, 0.16, 0.32})
        pts.push_back({e, 3.0 * std::pow(e, 0.64)});
    const ScalingFit fit = fit_scaling(pts);
    CHECK(std::abs(fit.a - 3.0) <= 1e-10);
    CHECK(std::abs(fit.alpha - 0.64) <= 1e-10);
    CHECK(fit.a_stderr <= 1e-8);
    CHECK(fit.alpha_stderr <= 1e-8);
    CHECK(fit.n_excluded == 0);
    CHECK(fit.used.size() == 5);
    CHECK(fit.predict(0.1) == doctest::Approx(3.0 * std::pow(0.1, 0.64)).epsilon(1e-12));

    // Refitting the fit's own predictions is a fixed point.
    std::vector<ScalingPoint> again;
    for (double e : {0.01, 0.05, 0.2}) again.push_back({e, fit.predict(e)});
    const ScalingFit refit = fit_scaling(again);
    CHECK(std::abs(refit.a - fit.a) <= 1e-10);
    CHECK(std::abs(refit.alpha - fit.alpha) <= 1e-10);
}

TEST_CASE("fit input validation") {
    CHECK_THROWS_AS((void)fit_scaling({}), InsufficientPoints);
    CHECK_THROWS_AS((void)fit_scaling({{0.1, 0.2}, {0.2, 0.3}}), InsufficientPoints);

    // Nonpositive shifts and nonpositive eps_tilde are excluded, not fitted.
    std::vector<ScalingPoint> mixed = {
        {0.02, 3.0 * std::pow(0.02, 0.64)}, {0.04, 3.0 * std::pow(0.04, 0.64)},
        {0.08, 3.0 * std::pow(0.08, 0.64)}, {0.16, -0.1}, {0.0, 0.5},
    };
    const ScalingFit fit = fit_scaling(mixed);
    CHECK(fit.n_excluded == 2);
    CHECK(fit.used.size() == 3);
    CHECK(std::abs(fit.a - 3.0) <= 1e-9);

    std::vector<ScalingPoint> hopeless = {{0.1, -0.1}, {0.2, 0.0}, {0.3, -0.2}, {0.4, -0.3}};
    CHECK_THROWS_AS((void)fit_scaling(hopeless), NonPositiveShift);

    std::vector<ScalingPoint> degenerate = {{0.1, 0.2}, {0.1, 0.25}, {0.1, 0.3}};
    CHECK_THROWS_AS((void)fit_scaling(degenerate), InsufficientPoints);
}

TEST_CASE("fit tolerates multiplicative noise") {
    RngStream rng(77);
    int a_ok = 0, alpha_ok = 0;
    const int repeats = 50;
    for (int rep = 0; rep < repeats; ++rep) {
        std::vector<ScalingPoint> pts;
        for (int i = 0; i < 9; ++i) {
            const double e = 0.02 * std::pow(10.0, i / 8.0);
            pts.push_back({e, 3.0 * std::pow(e, 0.64) * (1.0 + 0.05 * rng.normal())});
        }
        const ScalingFit fit = fit_scaling(pts);
        if (std::abs(fit.a / 3.0 - 1.0) <= 0.15) ++a_ok;
        if (std::abs(fit.alpha - 0.64) <= 0.05) ++alpha_ok;
    }
    CHECK(a_ok >= repeats * 9 / 10);
    CHECK(alpha_ok >= repeats * 9 / 10);
}
