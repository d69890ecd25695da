#pragma once
// Experiment runners: each one turns a parsed config into sample artifacts,
// an overlay CSV for plotting, and a named check list, writing everything
// into the output directory.  The same verification functions back both the
// `generator_suite` experiment and the acceptance harness, so there is one
// implementation of each check.
//
// Every runner resolves unset config keys to the documented desk-scale
// defaults, then records the resolved values in the report.  Sample artifacts
// are merged in replica order and written single-threaded at the end, which
// together with the counter-based streams makes every file independent of the
// worker count.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "socdyn/collapsing.hpp"
#include "socdyn/function2d.hpp"
#include "socdyn/generator.hpp"
#include "socdyn/gof.hpp"
#include "socdyn/io.hpp"
#include "socdyn/limit_sde.hpp"
#include "socdyn/martingale.hpp"
#include "socdyn/particle_sde.hpp"
#include "socdyn/rng.hpp"
#include "socdyn/sampler.hpp"
#include "socdyn/star_density.hpp"
#include "socdyn/test_function.hpp"

namespace socdyn {

// ---------- shared verification functions ----------

// Max gap between the particle-side computation sqrt(n) L_n Psi_f and the
// plane-side operator over random i.i.d. N(0, sigma^2) configurations, for
// the seven canonical observables: profiles x, x^2, x^3, sin x and the plane
// functions y, xy, y^2.
inline double generator_identity_max_gap(const std::vector<int>& ns,
                                         const std::vector<double>& sigmas,
                                         int configs_per_cell, std::uint64_t seed) {
    std::vector<Function2D> plane = {Function2D::coord_y(), Function2D::product_xy(),
                                     Function2D::y_squared()};
    std::vector<TestFunction> profiles = {
        TestFunction::identity(), TestFunction::square(),
        TestFunction::polynomial({0.0, 0.0, 0.0, 1.0}, "x^3"), TestFunction::sine(1.0)};
    const std::uint64_t key = stream_key(seed, StreamPurpose::oracle);

    double worst = 0.0;
    std::uint64_t config_counter = 0;
    for (int n : ns) {
        for (double sigma_sq : sigmas) {
            const double sigma = std::sqrt(sigma_sq);
            for (int c = 0; c < configs_per_cell; ++c) {
                std::vector<double> xs(static_cast<size_t>(n));
                for (int j = 0; j < n; ++j)
                    xs[static_cast<size_t>(j)] =
                        sigma * gaussian_at(key, config_counter, static_cast<std::uint64_t>(j), 0);
                ++config_counter;

                double s = 0.0, t = 0.0;
                for (double v : xs) {
                    s += v;
                    t += v * v;
                }
                const double n34 = std::pow(static_cast<double>(n), 0.75);
                const GeneratorPoint pt{s / n34, quarter_power(n) * (t / n - sigma_sq), n,
                                        sigma_sq};

                auto gap = [&](const Function2D& f) {
                    return std::abs(sqrtn_ln_psi(xs, f, sigma_sq) - apply_g_tilde_n(f, pt));
                };
                for (const auto& f : plane) worst = std::max(worst, gap(f));
                for (const auto& p : profiles) worst = std::max(worst, gap(Function2D::profile(p)));
            }
        }
    }
    return worst;
}

// Max relative finite-difference deviation over every closed-form derivative
// the harness relies on: the one-variable tables, the corrector partials, the
// chain-rule partials of Psi_f in particle coordinates, and the equilibrium
// log-density gradient.
inline double derivative_tables_max_gap(std::uint64_t seed = 20260822) {
    const std::vector<double> probes = {-2.0, -1.3, -0.5, 0.0, 0.4, 1.7, 2.0};
    double worst = 0.0;

    for (const auto& f : TestFunction::canonical())
        worst = std::max(worst, fd_validate(f, probes).max_deviation);

    const std::vector<std::pair<double, double>> pts2d = {
        {0.0, 0.0}, {1.0, 1.0}, {-0.7, 0.3}, {1.8, -1.2}, {-1.5, 1.9}, {0.2, -0.6}};
    for (double s2 : {0.5, 1.0, 2.0}) {
        const auto f = TestFunction::sine(1.1);
        worst = std::max(worst, fd_validate_2d(corrector_h(f, s2), pts2d).max_deviation);
        worst = std::max(worst, fd_validate_2d(corrector_k(f, s2), pts2d).max_deviation);
        worst = std::max(worst, fd_validate_2d(perturbed_observable(f, 16, s2), pts2d).max_deviation);
    }

    // Psi_f(x_1..x_n) = F(S/n^{3/4}, n^{1/4}(T/n - sigma^2)): the analytic
    // partial n^{-3/4} (F_x + 2 x_j F_y) against a central difference in x_j.
    const std::uint64_t key = stream_key(seed, StreamPurpose::oracle);
    for (int n : {3, 7}) {
        for (double sigma_sq : {0.5, 1.0}) {
            const Function2D f = perturbed_observable(TestFunction::sine(1.1), n, sigma_sq);
            const double n34 = std::pow(static_cast<double>(n), 0.75);
            auto psi = [&](const std::vector<double>& xs) {
                double s = 0.0, t = 0.0;
                for (double v : xs) {
                    s += v;
                    t += v * v;
                }
                return f.f(s / n34, quarter_power(n) * (t / n - sigma_sq));
            };
            std::vector<double> xs(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j)
                xs[static_cast<size_t>(j)] = std::sqrt(sigma_sq) *
                                             gaussian_at(key, 900 + static_cast<std::uint64_t>(n),
                                                         static_cast<std::uint64_t>(j), 0);
            double s = 0.0, t = 0.0;
            for (double v : xs) {
                s += v;
                t += v * v;
            }
            const double xt = s / n34;
            const double yt = quarter_power(n) * (t / n - sigma_sq);
            for (int j = 0; j < n; ++j) {
                const double analytic =
                    (f.fx(xt, yt) + 2.0 * xs[static_cast<size_t>(j)] * f.fy(xt, yt)) / n34;
                const double h = 1e-5;
                auto shifted = xs;
                shifted[static_cast<size_t>(j)] += h;
                const double up = psi(shifted);
                shifted[static_cast<size_t>(j)] -= 2.0 * h;
                const double dn = psi(shifted);
                const double fd = (up - dn) / (2.0 * h);
                worst = std::max(worst,
                                 std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
            }
        }
    }

    // Equilibrium log-density gradient against central differences.
    for (double sigma_sq : {0.5, 1.0}) {
        const int n = 7;
        StarDensity density{n, PhiModel::gaussian(sigma_sq), true};
        std::vector<double> xs(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            xs[static_cast<size_t>(j)] =
                std::sqrt(sigma_sq) * gaussian_at(key, 700, static_cast<std::uint64_t>(j), 0);
        const std::vector<double> grad = grad_log_density_star(density, xs);
        for (int j = 0; j < n; ++j) {
            const double h = 1e-5;
            auto shifted = xs;
            shifted[static_cast<size_t>(j)] += h;
            const double up = log_density_star(density, shifted);
            shifted[static_cast<size_t>(j)] -= 2.0 * h;
            const double dn = log_density_star(density, shifted);
            const double fd = (up - dn) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - grad[static_cast<size_t>(j)]) /
                                        std::max(1.0, std::abs(grad[static_cast<size_t>(j)])));
        }
    }
    return worst;
}

struct RemainderDecay {
    std::vector<int> ns;
    std::vector<double> sups;
    double slope = 0.0;
    double last_over_first = 0.0;
};

inline RemainderDecay remainder_decay_summary(const TestFunction& f, double sigma_sq,
                                              const std::vector<int>& ns, double k = 1.0,
                                              int grid_per_axis = 121) {
    RemainderDecay out;
    out.ns = ns;
    std::vector<double> logn, logsup;
    for (int n : ns) {
        const double sup = remainder_sup(f, n, k, sigma_sq, grid_per_axis).sup;
        out.sups.push_back(sup);
        logn.push_back(static_cast<double>(n));
        logsup.push_back(sup);
    }
    out.slope = collapsing_scaling(logn, logsup).slope;
    out.last_over_first = out.sups.back() / out.sups.front();
    return out;
}

// ---------- experiment orchestration ----------

struct ExperimentOutcome {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
};

namespace detail {

inline void ensure_outdir_writable(const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path probe = fs::path(out_dir) / ".write_probe";
    std::ofstream test(probe);
    if (!test) throw io_error("output directory '" + out_dir + "' is not writable");
    test.close();
    fs::remove(probe, ec);
}

inline void write_file(const std::string& out_dir, const std::string& name,
                       const std::function<void(std::ostream&)>& body) {
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    body(out);
}

inline void write_report(const ExperimentConfig& cfg, const std::vector<CheckResult>& checks) {
    write_file(cfg.out_dir, "report.json", [&](std::ostream& out) {
        out << report_to_json(cfg, checks).dump(2) << '\n';
    });
}

inline std::function<double(double)> ecdf_of(std::vector<double> sorted_samples) {
    std::sort(sorted_samples.begin(), sorted_samples.end());
    return [s = std::move(sorted_samples)](double x) {
        const auto it = std::upper_bound(s.begin(), s.end(), x);
        return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
    };
}

inline std::vector<double> system_terminals(const SdeRunConfig& base, int replicas, int workers) {
    auto cfg = base;
    cfg.record_stride = cfg.steps(); // terminal values only
    const auto paths = run_replicas(cfg, replicas, workers);
    std::vector<double> terminal;
    terminal.reserve(paths.size());
    for (const auto& p : paths) terminal.push_back(p.s_tilde.back());
    return terminal;
}

} // namespace detail

// System ergodicity: the terminal law of a long-horizon path run against the
// equilibrium sampler's output for the same size.
inline ExperimentOutcome run_arrow_a1(const ExperimentConfig& cfg) {
    const int n = cfg.n_values.empty() ? 64 : cfg.single_n();
    const double sigma_sq = *cfg.sigma_sq;
    const auto replicas = static_cast<int>(cfg.replicas.value_or(2000));

    auto sde = SdeRunConfig::gaussian(n, sigma_sq);
    sde.dt_natural = cfg.dt.value_or(0.01);
    sde.horizon_rescaled = cfg.horizon.value_or(10.0);
    sde.seed = cfg.seed;
    const std::vector<double> system = detail::system_terminals(sde, replicas, cfg.workers);

    auto mala = MalaConfig::defaults(n, sigma_sq, replicas, cfg.seed);
    const EquilibriumSample eq = sample_equilibrium(mala);

    const KsResult ks = ks_two_sample(system, eq.s_star_rescaled);
    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("system_vs_equilibrium_ks", ks.d, 0.08));

    detail::write_file(cfg.out_dir, "system_terminal.csv", [&](std::ostream& out) {
        write_samples_csv(out, "s_tilde_T", system);
    });
    detail::write_file(cfg.out_dir, "equilibrium_samples.csv", [&](std::ostream& out) {
        write_samples_csv(out, "s_star_rescaled", eq.s_star_rescaled);
    });
    detail::write_file(cfg.out_dir, "cdf_overlay.csv", [&](std::ostream& out) {
        write_cdf_overlay_csv(out, system, detail::ecdf_of(eq.s_star_rescaled),
                              "equilibrium_cdf");
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

// Equilibrium fluctuations: MALA samples of S*/n^{3/4} against the quartic law.
inline ExperimentOutcome run_arrow_a2(const ExperimentConfig& cfg) {
    const int n = cfg.n_values.empty() ? 512 : cfg.single_n();
    const double sigma_sq = *cfg.sigma_sq;
    const auto kept = cfg.replicas.value_or(10000);

    auto mala = MalaConfig::defaults(n, sigma_sq, kept, cfg.seed);
    const EquilibriumSample eq = sample_equilibrium(mala);

    const QuarticLaw law(sigma_sq);
    const KsResult ks =
        ks_one_sample(eq.s_star_rescaled, [&](double x) { return law.cdf(x); });
    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("equilibrium_vs_quartic_ks", ks.d, 0.05));

    detail::write_file(cfg.out_dir, "equilibrium_samples.csv", [&](std::ostream& out) {
        write_samples_csv(out, "s_star_rescaled", eq.s_star_rescaled);
    });
    detail::write_file(cfg.out_dir, "mala_diagnostics.json", [&](std::ostream& out) {
        nlohmann::ordered_json j;
        j["acceptance_rate"] = eq.diag.acceptance_rate;
        j["ess"] = eq.diag.ess;
        j["sweeps"] = eq.diag.sweeps;
        out << j.dump(2) << '\n';
    });
    detail::write_file(cfg.out_dir, "cdf_overlay.csv", [&](std::ostream& out) {
        write_cdf_overlay_csv(out, eq.s_star_rescaled, [&](double x) { return law.cdf(x); },
                              "quartic_cdf");
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

// Invariant law of the limit equation: long-horizon terminal values against
// the quartic law, plus the closed-form second moment.
inline ExperimentOutcome run_arrow_a3(const ExperimentConfig& cfg) {
    LimitRunConfig lim;
    lim.sigma_sq = *cfg.sigma_sq;
    lim.dt = cfg.dt.value_or(0.005);
    lim.horizon = cfg.horizon.value_or(50.0);
    lim.replicas = static_cast<int>(cfg.replicas.value_or(10000));
    lim.seed = cfg.seed;
    const LimitResult res = simulate_limit(lim, cfg.workers);

    const QuarticLaw law(lim.sigma_sq);
    const KsResult ks = ks_one_sample(res.terminal, [&](double x) { return law.cdf(x); });
    const auto m2 = empirical_moments(res.terminal, {2}).front();
    const double target = law.moment(2);
    const double z_score = std::abs(m2.value - target) / m2.std_error;

    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("limit_terminal_vs_quartic_ks", ks.d, 0.02));
    outcome.checks.push_back(check_below("limit_second_moment_z_score", z_score, 3.0));

    detail::write_file(cfg.out_dir, "limit_terminal.csv", [&](std::ostream& out) {
        write_samples_csv(out, "u_T", res.terminal);
    });
    detail::write_file(cfg.out_dir, "cdf_overlay.csv", [&](std::ostream& out) {
        write_cdf_overlay_csv(out, res.terminal, [&](double x) { return law.cdf(x); },
                              "quartic_cdf");
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

// Finite-n marginal at a fixed rescaled time against the limit equation's
// marginal at the same time.
inline ExperimentOutcome run_arrow_a4(const ExperimentConfig& cfg) {
    const int n = cfg.n_values.empty() ? 256 : cfg.single_n();
    const double sigma_sq = *cfg.sigma_sq;
    const double t_compare = cfg.horizon.value_or(5.0);
    const auto replicas = static_cast<int>(cfg.replicas.value_or(500));

    auto sde = SdeRunConfig::gaussian(n, sigma_sq);
    sde.dt_natural = cfg.dt.value_or(0.01);
    sde.horizon_rescaled = t_compare;
    sde.seed = cfg.seed;
    const std::vector<double> system = detail::system_terminals(sde, replicas, cfg.workers);

    LimitRunConfig lim;
    lim.sigma_sq = sigma_sq;
    lim.dt = 0.005;
    lim.horizon = t_compare;
    lim.replicas = 10000;
    lim.seed = cfg.seed;
    const LimitResult res = simulate_limit(lim, cfg.workers);

    const KsResult ks = ks_two_sample(system, res.terminal);
    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("system_vs_limit_marginal_ks", ks.d, 0.08));

    detail::write_file(cfg.out_dir, "system_terminal.csv", [&](std::ostream& out) {
        write_samples_csv(out, "s_tilde_T", system);
    });
    detail::write_file(cfg.out_dir, "limit_terminal.csv", [&](std::ostream& out) {
        write_samples_csv(out, "u_T", res.terminal);
    });
    detail::write_file(cfg.out_dir, "cdf_overlay.csv", [&](std::ostream& out) {
        write_cdf_overlay_csv(out, system, detail::ecdf_of(res.terminal), "limit_cdf");
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

// All closed-form identity and decay checks at verification scale.
inline ExperimentOutcome run_generator_suite(const ExperimentConfig& cfg) {
    const std::vector<int> ns = cfg.n_values.empty() ? std::vector<int>{2, 10, 100} : cfg.n_values;

    const double identity_gap =
        generator_identity_max_gap(ns, {0.5, 1.0, 2.0}, 100, cfg.seed);
    const double fd_gap = derivative_tables_max_gap();

    const std::vector<int> decay_ns = {16, 64, 256, 1024, 4096};
    const RemainderDecay dx =
        remainder_decay_summary(TestFunction::identity(), cfg.sigma_sq_or_default(), decay_ns);
    const RemainderDecay dx2 =
        remainder_decay_summary(TestFunction::square(), cfg.sigma_sq_or_default(), decay_ns);

    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("particle_vs_plane_identity_gap", identity_gap, 1e-8));
    outcome.checks.push_back(check_below("derivative_fd_max_rel_gap", fd_gap, 1e-5));
    outcome.checks.push_back(check_at_most("remainder_decay_slope_x", dx.slope, -0.2));
    outcome.checks.push_back(check_at_most("remainder_decay_slope_x_sq", dx2.slope, -0.2));
    outcome.checks.push_back(
        check_below("remainder_shrinks_x", dx.last_over_first, 1.0));
    outcome.checks.push_back(
        check_below("remainder_shrinks_x_sq", dx2.last_over_first, 1.0));

    detail::write_file(cfg.out_dir, "remainder_sups.csv", [&](std::ostream& out) {
        out << "n,sup_x,sup_x_sq\n";
        for (size_t i = 0; i < decay_ns.size(); ++i)
            out << decay_ns[i] << ',' << format_g17(dx.sups[i]) << ','
                << format_g17(dx2.sups[i]) << '\n';
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

// Tightening of the second coordinate: per-size medians of the running sup,
// the fitted decay rate, and the pathwise drift/noise bounds.
inline ExperimentOutcome run_collapsing_suite(const ExperimentConfig& cfg) {
    const std::vector<int> ns =
        cfg.n_values.empty() ? std::vector<int>{64, 256, 1024} : cfg.n_values;
    const double sigma_sq = *cfg.sigma_sq;
    const auto replicas = static_cast<int>(cfg.replicas.value_or(200));

    std::vector<double> medians;
    std::int64_t drift_violations = 0, noise_violations = 0;
    std::vector<std::string> csv_rows;
    for (int n : ns) {
        auto sde = SdeRunConfig::gaussian(n, sigma_sq);
        sde.dt_natural = cfg.dt.value_or(0.02);
        sde.horizon_rescaled = cfg.horizon.value_or(2.0);
        sde.record_stride = 1;
        sde.seed = cfg.seed;
        const auto paths = run_replicas(sde, replicas, cfg.workers);

        CollapsingConstants cc;
        cc.n = n;
        cc.sigma_sq = sigma_sq;
        cc.k = cfg.k_box;
        cc.d = 3;
        cc.validate();

        std::vector<double> sups;
        sups.reserve(paths.size());
        for (const auto& p : paths) {
            sups.push_back(path_extrema(p, cfg.k_box).sup_abs_t);
            const CollapsingCheckReport rep = collapsing_inequality_check(p, cc);
            drift_violations += rep.drift_violations;
            noise_violations += rep.noise_violations;
        }
        medians.push_back(median_of(sups));
        csv_rows.push_back(std::to_string(n) + ',' + format_g17(medians.back()));
    }

    double worst_ratio = 0.0;
    for (size_t i = 1; i < medians.size(); ++i)
        worst_ratio = std::max(worst_ratio, medians[i] / medians[i - 1]);
    std::vector<double> ns_d(ns.begin(), ns.end());
    const ScalingFit fit = collapsing_scaling(ns_d, medians);

    ExperimentOutcome outcome;
    outcome.checks.push_back(check_below("median_sup_t_ratio_max", worst_ratio, 1.0));
    outcome.checks.push_back(check_below("median_sup_t_scaling_slope", fit.slope, -0.05));
    outcome.checks.push_back(check_below("drift_condition_violations",
                                         static_cast<double>(drift_violations), 0.5));
    outcome.checks.push_back(check_below("noise_condition_violations",
                                         static_cast<double>(noise_violations), 0.5));

    detail::write_file(cfg.out_dir, "collapsing_medians.csv", [&](std::ostream& out) {
        out << "n,median_sup_t\n";
        for (const auto& row : csv_rows) out << row << '\n';
    });
    detail::write_report(cfg, outcome.checks);
    return outcome;
}

inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment != "generator_suite" && !cfg.sigma_sq)
        throw config_error("sigma_sq",
                           "experiment '" + cfg.experiment + "' needs sigma_sq");
    detail::ensure_outdir_writable(cfg.out_dir);

    if (cfg.experiment == "arrow_a1") return run_arrow_a1(cfg);
    if (cfg.experiment == "arrow_a2") return run_arrow_a2(cfg);
    if (cfg.experiment == "arrow_a3") return run_arrow_a3(cfg);
    if (cfg.experiment == "arrow_a4") return run_arrow_a4(cfg);
    if (cfg.experiment == "generator_suite") return run_generator_suite(cfg);
    if (cfg.experiment == "collapsing_suite") return run_collapsing_suite(cfg);
    throw config_error("experiment", "unknown experiment '" + cfg.experiment + "'");
}

} // namespace socdyn
