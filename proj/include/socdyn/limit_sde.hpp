#pragma once
// The scalar limit diffusion dz = -z^3/(2 sigma^4) dt + dB started at 0, and
// its invariant quartic law with density
//
//   q(s) = sqrt(2) / (sigma * Gamma(1/4)) * exp(-s^4 / (4 sigma^4)).
//
// Gamma(1/4) and Gamma(3/4) are frozen numeric constants; a Lanczos
// evaluation cross-checks them once at first use so a typo in either literal
// aborts loudly instead of skewing every statistic downstream.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "socdyn/fixed_sums.hpp"
#include "socdyn/parallel.hpp"
#include "socdyn/rng.hpp"

namespace socdyn {

// ---------- gamma constants ----------

inline constexpr double kGammaOneQuarter = 3.62560990822190831193;
inline constexpr double kGammaThreeQuarter = 1.2254167024651776451;

inline double lanczos_gamma(double z) {
    // Godfrey's g=7, 9-term coefficient set; ~15 significant digits on the
    // arguments used here.
    static const double coef[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    const double pi = std::numbers::pi;
    if (z < 0.5) return pi / (std::sin(pi * z) * lanczos_gamma(1.0 - z));
    z -= 1.0;
    double a = coef[0];
    for (int i = 1; i < 9; ++i) a += coef[i] / (z + i);
    const double t = z + 7.5;
    return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

inline void ensure_gamma_constants() {
    static const bool checked = [] {
        const double g14 = lanczos_gamma(0.25);
        const double g34 = lanczos_gamma(0.75);
        const bool ok =
            std::abs(g14 - kGammaOneQuarter) <= 1e-12 * kGammaOneQuarter &&
            std::abs(g34 - kGammaThreeQuarter) <= 1e-12 * kGammaThreeQuarter &&
            std::abs(kGammaOneQuarter * kGammaThreeQuarter -
                     std::numbers::pi * std::numbers::sqrt2) <= 1e-13;
        if (!ok) throw std::logic_error("gamma constants fail the Lanczos self-check");
        return true;
    }();
    (void)checked;
}

// ---------- adaptive quadrature ----------

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson with absolute tolerance.
template <class F>
double integrate(const F& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// ---------- quartic law ----------

struct QuarticLaw {
    double sigma_sq = 1.0;
    double sigma = 1.0;
    double normalizer = 0.0;

    explicit QuarticLaw(double s2) : sigma_sq(s2) {
        if (!(s2 > 0.0) || !std::isfinite(s2))
            throw std::invalid_argument("QuarticLaw: sigma_sq must be positive");
        ensure_gamma_constants();
        sigma = std::sqrt(s2);
        normalizer = std::numbers::sqrt2 / (sigma * kGammaOneQuarter);
    }

    double pdf(double s) const {
        const double u = s * s / sigma_sq;
        return normalizer * std::exp(-0.25 * u * u);
    }

    // Beyond 8 sigma the density is below exp(-1024); the truncated tail is
    // immaterial at any tolerance representable in double.
    double support_cut() const { return 8.0 * sigma; }

    double cdf(double s) const {
        const double a = std::abs(s);
        const double upper = std::min(a, support_cut());
        const double half = integrate([this](double u) { return pdf(u); }, 0.0, upper, 1e-12);
        const double c = s >= 0.0 ? 0.5 + half : 0.5 - half;
        return std::min(1.0, std::max(0.0, c)); // quadrature noise must not leave [0,1]
    }

    // Moments by quadrature; odd orders vanish by symmetry and short-circuit.
    double moment(int p) const {
        if (p < 0) throw std::invalid_argument("QuarticLaw::moment: order must be >= 0");
        if (p == 0) return 1.0;
        if (p % 2 == 1) return 0.0;
        const double tol = 1e-12 * std::max(1.0, std::pow(sigma, p + 1));
        const double half =
            integrate([this, p](double u) { return std::pow(u, p) * pdf(u); }, 0.0,
                      support_cut(), tol);
        return 2.0 * half;
    }
};

// ---------- limit diffusion ----------

inline double limit_drift(double z, double sigma_sq) {
    return -z * z * z / (2.0 * sigma_sq * sigma_sq);
}

inline double limit_em_step(double z, double dt, double sigma_sq, double noise) {
    return z + limit_drift(z, sigma_sq) * dt + noise;
}

struct LimitRunConfig {
    double sigma_sq = 1.0;
    double dt = 0.005;
    double horizon = 50.0;
    int replicas = 1;
    uint64_t seed = 1;
    // Brownian increments are drawn on a grid of dt/noise_substeps; a run at
    // dt with substeps 2 shares its Brownian path with a run at dt/2 with
    // substeps 1, which isolates discretization error in scheme comparisons.
    int noise_substeps = 1;
    int record_stride = 0; // 0: terminal values only

    void validate() const {
        if (!(sigma_sq > 0.0)) throw std::invalid_argument("limit run: sigma_sq must be positive");
        if (!(dt > 0.0) || !(horizon > 0.0) || dt >= horizon)
            throw std::invalid_argument("limit run: need 0 < dt < horizon");
        if (replicas < 1) throw std::invalid_argument("limit run: replicas must be >= 1");
        if (noise_substeps != 1 && noise_substeps != 2)
            throw std::invalid_argument("limit run: noise_substeps must be 1 or 2");
        if (record_stride < 0) throw std::invalid_argument("limit run: record_stride must be >= 0");
    }
};

struct LimitPath {
    std::vector<double> times;
    std::vector<double> z;
};

struct LimitResult {
    std::vector<double> terminal;
    std::vector<LimitPath> paths; // populated only when record_stride > 0
};

// Single path driven by an arbitrary per-step noise source; the public
// simulator wires in the counter streams, tests may inject their own.
template <class NoiseFn, class RecordFn>
double integrate_limit_path(double z0, int64_t steps, double dt, double sigma_sq,
                            NoiseFn&& noise, RecordFn&& record) {
    double z = z0;
    record(int64_t{0}, z);
    for (int64_t k = 0; k < steps; ++k) {
        z = limit_em_step(z, dt, sigma_sq, noise(k));
        if (!std::isfinite(z) || std::abs(z) >= kFixedCoordLimit)
            throw std::runtime_error("limit path blew up at step " + std::to_string(k));
        record(k + 1, z);
    }
    return z;
}

inline LimitResult simulate_limit(const LimitRunConfig& cfg, int workers = 1) {
    cfg.validate();
    const int64_t steps = static_cast<int64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-12));
    const uint64_t key = stream_key(cfg.seed, StreamPurpose::limit_noise);
    const double root = std::sqrt(cfg.dt / cfg.noise_substeps);

    LimitResult out;
    out.terminal.assign(cfg.replicas, 0.0);
    if (cfg.record_stride > 0) out.paths.assign(cfg.replicas, LimitPath{});

    parallel_for(cfg.replicas, workers, [&](int r) {
        double pending = 0.0; // cached odd Box-Muller lane (substeps == 1)
        auto noise = [&](int64_t k) {
            if (cfg.noise_substeps == 2) {
                const GaussPair g = gauss_pair(key, r, 0, static_cast<uint64_t>(k));
                return root * (g.z0 + g.z1);
            }
            if ((k & 1) == 0) {
                const GaussPair g = gauss_pair(key, r, 0, static_cast<uint64_t>(k >> 1));
                pending = g.z1;
                return root * g.z0;
            }
            return root * pending;
        };
        LimitPath* path = cfg.record_stride > 0 ? &out.paths[r] : nullptr;
        auto record = [&](int64_t k, double z) {
            if (path && (k % cfg.record_stride == 0 || k == steps)) {
                path->times.push_back(static_cast<double>(k) * cfg.dt);
                path->z.push_back(z);
            }
        };
        out.terminal[r] = integrate_limit_path(0.0, steps, cfg.dt, cfg.sigma_sq, noise, record);
    });
    return out;
}

} // namespace socdyn
