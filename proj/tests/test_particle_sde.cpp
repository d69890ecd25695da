#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "socdyn/particle_sde.hpp"

using namespace socdyn;

// ---------- initial condition ----------

TEST_CASE("iid init is reproducible and has the right scale") {
    const ParticleState a = init_iid_gaussian(1000, 1.0, 5, 0);
    const ParticleState b = init_iid_gaussian(1000, 1.0, 5, 0);
    REQUIRE(a.x == b.x);
    REQUIRE(init_iid_gaussian(1000, 1.0, 5, 1).x != a.x);
    REQUIRE(init_iid_gaussian(1000, 1.0, 6, 0).x != a.x);

    const int n = 100000;
    const double sigma_sq = 1.0;
    const ParticleState big = init_iid_gaussian(n, sigma_sq, 11, 0);
    // Law of large numbers for T/n and a generous CLT envelope for S/n^{3/4}.
    REQUIRE(std::abs(big.t_sum() / n - sigma_sq) < 0.02);
    const double n34 = std::pow(static_cast<double>(n), 0.75);
    REQUIRE(std::abs(big.s_sum()) / n34 <
            15.0 * std::pow(static_cast<double>(n), -0.25));

    REQUIRE_THROWS_AS(init_iid_gaussian(0, 1.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(init_iid_gaussian(4, 0.0, 1), std::invalid_argument);
}

// ---------- single step ----------

TEST_CASE("zero-noise Euler step at the hand-checked point") {
    const StarDensity density{1, PhiModel::gaussian(1.0)};
    ParticleState st = ParticleState::of({1.0});
    em_step_system(st, density, 0.1, {0.0});
    // drift(-3/8): 1 - 0.0375 = 0.9625.
    REQUIRE(st.x[0] == Catch::Approx(0.9625).epsilon(1e-15));
    REQUIRE(st.natural_time == Catch::Approx(0.1));
}

TEST_CASE("em step with dt=0 and zero noise is the identity") {
    const StarDensity density{3, PhiModel::gaussian(1.3)};
    ParticleState st = ParticleState::of({0.4, -1.1, 0.2});
    const std::vector<double> before = st.x;
    em_step_system(st, density, 0.0, {0.0, 0.0, 0.0});
    REQUIRE(st.x == before);
}

TEST_CASE("em step rejects malformed input") {
    const StarDensity density{2, PhiModel::gaussian(1.0)};
    ParticleState st = ParticleState::of({0.1, 0.2});
    REQUIRE_THROWS_AS(em_step_system(st, density, 0.01, {0.0}), std::invalid_argument);
    ParticleState bad = ParticleState::of({std::nan(""), 0.0});
    REQUIRE_THROWS_AS(em_step_system(bad, density, 0.01, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("incremental sums survive a long em-step chain exactly") {
    const StarDensity density{20, PhiModel::gaussian(1.0)};
    ParticleState st = init_iid_gaussian(20, 1.0, 3, 0);
    const uint64_t key = stream_key(3, StreamPurpose::oracle);
    std::vector<double> noise(20);
    for (int k = 0; k < 500; ++k) {
        for (int j = 0; j < 20; ++j)
            noise[j] = 0.1 * gaussian_at(key, 7, j, static_cast<uint64_t>(k));
        em_step_system(st, density, 0.01, noise);
        if (k % 50 == 0) REQUIRE(st.sums == PairSums::of(st.x));
    }
    REQUIRE(st.sums == PairSums::of(st.x));
    REQUIRE(st.natural_time == Catch::Approx(5.0).epsilon(1e-12));
}

// ---------- config validation ----------

TEST_CASE("sde config validation") {
    SdeRunConfig cfg = SdeRunConfig::gaussian(16, 1.0);
    REQUIRE_NOTHROW(cfg.validate());

    SdeRunConfig bad = cfg;
    bad.dt_natural = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.n = 0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.record_stride = 0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    // stride * dt beyond the natural-time horizon
    bad.horizon_rescaled = 1.0;
    bad.record_stride = 100000;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.noise_substeps = 5;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

// ---------- full simulation ----------

TEST_CASE("simulation is reproducible and worker independent") {
    SdeRunConfig cfg = SdeRunConfig::gaussian(16, 1.0);
    cfg.dt_natural = 0.02;
    cfg.horizon_rescaled = 1.0;
    cfg.record_stride = 10;
    cfg.seed = 404;

    const std::vector<RescaledPath> one = run_replicas(cfg, 6, 1);
    const std::vector<RescaledPath> four = run_replicas(cfg, 6, 4);
    REQUIRE(one.size() == four.size());
    for (size_t r = 0; r < one.size(); ++r) {
        REQUIRE(one[r].times == four[r].times);
        REQUIRE(one[r].s_tilde == four[r].s_tilde);
        REQUIRE(one[r].t_tilde == four[r].t_tilde);
    }
}

TEST_CASE("recorded times start at zero, increase, and end at the horizon") {
    SdeRunConfig cfg = SdeRunConfig::gaussian(64, 1.0);
    cfg.dt_natural = 0.01;
    cfg.horizon_rescaled = 2.0;
    cfg.record_stride = 37; // deliberately not a divisor of the step count
    const RescaledPath path = simulate_system(cfg, 0);
    REQUIRE(path.times.front() == 0.0);
    REQUIRE(path.times.back() == Catch::Approx(2.0).margin(1e-9));
    for (size_t i = 1; i < path.times.size(); ++i)
        REQUIRE(path.times[i] > path.times[i - 1]);
    for (double v : path.s_tilde) REQUIRE(std::isfinite(v));
    for (double v : path.t_tilde) REQUIRE(std::isfinite(v));
}

TEST_CASE("initial rescaled observables sit in the CLT envelope") {
    const int n = 256;
    SdeRunConfig cfg = SdeRunConfig::gaussian(n, 1.0);
    cfg.dt_natural = 0.05;
    cfg.horizon_rescaled = 0.05;
    for (uint64_t r = 0; r < 20; ++r) {
        const RescaledPath path = simulate_system(cfg, r);
        // S~(0) ~ N(0, sigma^2/sqrt(n)), T~(0) ~ n^{1/4} * O(n^{-1/2}).
        const double envelope = 6.0 * std::pow(static_cast<double>(n), -0.25);
        REQUIRE(std::abs(path.s_tilde.front()) < envelope);
        REQUIRE(std::abs(path.t_tilde.front()) < 6.0 * std::numbers::sqrt2 *
                                                     std::pow(static_cast<double>(n), -0.25));
    }
}

TEST_CASE("particle relabeling leaves the recorded path bit-identical") {
    const int n = 12;
    SdeRunConfig cfg = SdeRunConfig::gaussian(n, 1.0);
    cfg.dt_natural = 0.02;
    cfg.horizon_rescaled = 1.0;
    cfg.record_stride = 5;

    const uint64_t key = stream_key(8, StreamPurpose::path_noise);
    const ParticleState st0 = init_iid_gaussian(n, 1.0, 8, 0);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::rotate(perm.begin(), perm.begin() + 5, perm.end());
    std::swap(perm[0], perm[7]);

    auto run = [&](const std::vector<double>& coords, auto&& noise_fn) {
        ParticleState st = ParticleState::of(coords);
        std::vector<double> s, t;
        integrate_particle_path(st, cfg, noise_fn, [&](int64_t k, const ParticleState& s2) {
            if (k % cfg.record_stride == 0) {
                s.push_back(s2.s_sum());
                t.push_back(s2.t_sum());
            }
        });
        return std::pair{s, t};
    };

    const auto base = run(st0.x, [&](int64_t k, int j) {
        return 0.1 * gaussian_at(key, 0, static_cast<uint64_t>(j), static_cast<uint64_t>(k));
    });
    std::vector<double> permuted(n);
    for (int j = 0; j < n; ++j) permuted[j] = st0.x[perm[j]];
    const auto relabeled = run(permuted, [&](int64_t k, int j) {
        return 0.1 * gaussian_at(key, 0, static_cast<uint64_t>(perm[j]),
                                 static_cast<uint64_t>(k));
    });

    REQUIRE(base.first == relabeled.first);   // bit-identical S series
    REQUIRE(base.second == relabeled.second); // bit-identical T series
}

TEST_CASE("global sign flip negates S~ exactly and fixes T~") {
    const int n = 10;
    SdeRunConfig cfg = SdeRunConfig::gaussian(n, 1.0);
    cfg.dt_natural = 0.02;
    cfg.horizon_rescaled = 0.6;
    cfg.record_stride = 3;

    const uint64_t key = stream_key(21, StreamPurpose::path_noise);
    const ParticleState st0 = init_iid_gaussian(n, 1.0, 21, 0);

    auto run = [&](double flip) {
        std::vector<double> coords = st0.x;
        for (double& v : coords) v *= flip;
        ParticleState st = ParticleState::of(coords);
        std::vector<double> s, t;
        integrate_particle_path(st, cfg,
                                [&](int64_t k, int j) {
                                    return flip * 0.15 *
                                           gaussian_at(key, 0, static_cast<uint64_t>(j),
                                                       static_cast<uint64_t>(k));
                                },
                                [&](int64_t, const ParticleState& s2) {
                                    s.push_back(s2.s_sum());
                                    t.push_back(s2.t_sum());
                                });
        return std::pair{s, t};
    };

    const auto plus = run(1.0);
    const auto minus = run(-1.0);
    REQUIRE(plus.first.size() == minus.first.size());
    for (size_t i = 0; i < plus.first.size(); ++i) {
        REQUIRE(plus.first[i] == -minus.first[i]);
        REQUIRE(plus.second[i] == minus.second[i]);
    }
}

TEST_CASE("diagnostic mode decouples the coordinates into Brownian motions") {
    const int n = 4;
    SdeRunConfig cfg;
    cfg.n = n;
    cfg.sigma_sq = 1.0;
    cfg.phi = PhiModel::custom([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0);
    cfg.interaction_enabled = false;
    cfg.dt_natural = 0.05;
    cfg.horizon_rescaled = 1.0;
    cfg.record_stride = 1;

    ParticleState st = ParticleState::of({0.1, -0.4, 0.7, 0.0});
    const std::vector<double> x0 = st.x;
    const uint64_t key = stream_key(14, StreamPurpose::path_noise);
    std::vector<std::vector<double>> increments(n);
    integrate_particle_path(st, cfg,
                            [&](int64_t k, int j) {
                                const double z = 0.2 * gaussian_at(key, 0, j, k);
                                increments[j].push_back(z);
                                return z;
                            },
                            [](int64_t, const ParticleState&) {});
    for (int j = 0; j < n; ++j) {
        double expect = x0[j];
        for (double z : increments[j]) expect += z;
        REQUIRE(st.x[j] == expect); // drift is exactly zero, addition chains match
    }
}

TEST_CASE("blow-up carries the last finite prefix") {
    SdeRunConfig cfg;
    cfg.n = 2;
    cfg.sigma_sq = 1.0;
    // A steep custom well integrated far too coarsely oscillates to infinity.
    cfg.phi = PhiModel::custom([](double x) { return -x * x * x * x / 4.0; },
                               [](double x) { return -x * x * x; }, 1.0);
    cfg.dt_natural = 10.0;
    cfg.horizon_rescaled = 1000.0;
    cfg.record_stride = 1;
    cfg.seed = 2;

    bool caught = false;
    try {
        simulate_system(cfg, 0);
    } catch (const blow_up_error& e) {
        caught = true;
        REQUIRE(e.step > 0);
        REQUIRE_FALSE(e.prefix.times.empty());
        REQUIRE(std::string(e.what()).find("blew up") != std::string::npos);
        for (double v : e.prefix.s_tilde) REQUIRE(std::isfinite(v));
    }
    REQUIRE(caught);
}

TEST_CASE("substep refinement couples system runs across dt") {
    SdeRunConfig coarse = SdeRunConfig::gaussian(32, 1.0);
    coarse.dt_natural = 0.02;
    coarse.horizon_rescaled = 1.0;
    coarse.record_stride = coarse.steps(); // terminal only
    coarse.noise_substeps = 2;
    coarse.seed = 55;

    SdeRunConfig fine = coarse;
    fine.dt_natural = 0.01;
    fine.noise_substeps = 1;
    fine.record_stride = fine.steps();

    double rms = 0.0;
    const int reps = 40;
    for (uint64_t r = 0; r < reps; ++r) {
        const double a = simulate_system(coarse, r).s_tilde.back();
        const double b = simulate_system(fine, r).s_tilde.back();
        rms += (a - b) * (a - b);
    }
    rms = std::sqrt(rms / reps);
    REQUIRE(rms < 0.05);
}

TEST_CASE("snapshots are recorded when requested") {
    SdeRunConfig cfg = SdeRunConfig::gaussian(5, 1.0);
    cfg.dt_natural = 0.1;
    cfg.horizon_rescaled = 0.5;
    cfg.record_stride = 4;
    cfg.snapshot_full_state = true;
    const RescaledPath path = simulate_system(cfg, 0);
    REQUIRE(path.snapshots.size() == path.times.size());
    for (const auto& snap : path.snapshots) REQUIRE(snap.size() == 5);
    // Recorded observables are consistent with their snapshots.
    for (size_t i = 0; i < path.snapshots.size(); ++i) {
        const PairSums sums = PairSums::of(path.snapshots[i]);
        REQUIRE(path.s_tilde[i] ==
                Catch::Approx(sums.s() / std::pow(5.0, 0.75)).margin(1e-12));
    }
}
