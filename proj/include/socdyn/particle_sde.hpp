#pragma once
// Euler-Maruyama integration of the n-particle system
//
//   dX_j = [ phi'(X_j) + (r - X_j r^2)/2 ] dt + dB_j,   r = S/(T+1),
//
// recorded through the rescaled pair
//
//   S~(t) = S(sqrt(n) t) / n^{3/4},
//   T~(t) = n^{1/4} ( T(sqrt(n) t)/n - sigma^2 ),
//
// so one unit of path time corresponds to sqrt(n) units of natural time.
// S and T ride on the order-independent fixed-point accumulators, which makes
// recorded paths bit-identical under particle relabeling and worker count.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "socdyn/parallel.hpp"
#include "socdyn/rng.hpp"
#include "socdyn/star_density.hpp"

namespace socdyn {

struct SdeRunConfig {
    int n = 2;
    PhiModel phi = PhiModel::gaussian(1.0);
    double sigma_sq = 1.0; // initial-law variance and the centering in T~
    double dt_natural = 0.01;
    double horizon_rescaled = 1.0;
    int64_t record_stride = 1;
    uint64_t seed = 1;
    bool snapshot_full_state = false;
    int noise_substeps = 1;     // see LimitRunConfig: coarse runs can share paths
    bool interaction_enabled = true;
    int64_t resync_every = 1000; // exactness assertion period for the cached sums

    static SdeRunConfig gaussian(int n, double sigma_sq) {
        SdeRunConfig c;
        c.n = n;
        c.sigma_sq = sigma_sq;
        c.phi = PhiModel::gaussian(sigma_sq);
        return c;
    }

    int64_t steps() const {
        return static_cast<int64_t>(
            std::ceil(horizon_rescaled * std::sqrt(static_cast<double>(n)) / dt_natural -
                      1e-12));
    }

    void validate() const {
        if (n < 1) throw std::invalid_argument("sde run: n must be >= 1");
        if (!(sigma_sq > 0.0)) throw std::invalid_argument("sde run: sigma_sq must be positive");
        if (!(dt_natural > 0.0)) throw std::invalid_argument("sde run: dt_natural must be positive");
        if (!(horizon_rescaled > 0.0))
            throw std::invalid_argument("sde run: horizon_rescaled must be positive");
        if (record_stride < 1) throw std::invalid_argument("sde run: record_stride must be >= 1");
        // At least one stride boundary must fall inside the run.
        if (record_stride > steps())
            throw std::invalid_argument("sde run: record_stride exceeds the horizon");
        if (noise_substeps != 1 && noise_substeps != 2)
            throw std::invalid_argument("sde run: noise_substeps must be 1 or 2");
        if (resync_every < 1) throw std::invalid_argument("sde run: resync_every must be >= 1");
    }
};

struct RescaledPath {
    int n = 0;
    double sigma_sq = 1.0;
    uint64_t seed = 0;
    uint64_t replica = 0;
    std::vector<double> times; // rescaled, starting at 0, strictly increasing
    std::vector<double> s_tilde;
    std::vector<double> t_tilde;
    std::vector<std::vector<double>> snapshots; // full states, when requested
};

// Carries the last finite prefix so a caller can inspect how the run died.
struct blow_up_error : std::runtime_error {
    int64_t step = 0;
    RescaledPath prefix;
    blow_up_error(int64_t at, RescaledPath p)
        : std::runtime_error("particle path blew up at natural step " + std::to_string(at)),
          step(at), prefix(std::move(p)) {}
};

// ---------- initial condition ----------

// i.i.d. N(0, sigma_sq) coordinates from the replica's init stream.
inline ParticleState init_iid_gaussian(int n, double sigma_sq, uint64_t seed,
                                       uint64_t replica = 0) {
    if (n < 1) throw std::invalid_argument("init_iid_gaussian: n must be >= 1");
    if (!(sigma_sq > 0.0))
        throw std::invalid_argument("init_iid_gaussian: sigma_sq must be positive");
    const uint64_t key = stream_key(seed, StreamPurpose::init_state);
    const double sigma = std::sqrt(sigma_sq);
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = sigma * gaussian_at(key, replica, j, 0);
    return ParticleState::of(std::move(x));
}

// ---------- stepping ----------

// One in-place Euler step against externally supplied noise increments
// (already scaled by sqrt(dt)).  Throws on non-finite input or output.
inline void em_step_system(ParticleState& state, const StarDensity& density,
                           double dt, const std::vector<double>& noise) {
    check_dimension(density, state.x.size());
    if (noise.size() != state.x.size())
        throw std::invalid_argument("em_step_system: noise size mismatch");
    const double s = state.s_sum();
    const double t = state.t_sum();
    if (!std::isfinite(s) || !std::isfinite(t))
        throw std::invalid_argument("em_step_system: non-finite state");
    const double r = density.interaction_enabled ? s / (t + 1.0) : 0.0;
    const double half_r = 0.5 * r;
    const double half_r2 = 0.5 * r * r;
    for (size_t j = 0; j < state.x.size(); ++j) {
        const double xj = state.x[j];
        const double nx =
            xj + (density.model.phi_prime(xj) + half_r - xj * half_r2) * dt + noise[j];
        if (!std::isfinite(nx) || std::abs(nx) >= kFixedCoordLimit)
            throw std::invalid_argument("em_step_system: step left the finite range");
        state.sums.replace(xj, nx);
        state.x[j] = nx;
    }
    state.natural_time += dt;
}

// Full integration loop against an arbitrary noise source, recording through
// a callback.  noise(step, j) must return the increment for coordinate j at
// that step, already scaled by sqrt(dt); record(step, state) fires at stride
// boundaries, at step 0, and at the final step.
template <class NoiseFn, class RecordFn>
void integrate_particle_path(ParticleState& state, const SdeRunConfig& cfg,
                             NoiseFn&& noise, RecordFn&& record) {
    cfg.validate();
    const int64_t steps = cfg.steps();
    const double dt = cfg.dt_natural;
    const bool gaussian_phi = cfg.phi.is_gaussian;
    const double neg_inv_2s2 = gaussian_phi ? -0.5 / cfg.phi.sigma_sq : 0.0;

    record(int64_t{0}, state);
    for (int64_t k = 0; k < steps; ++k) {
        const double s = state.s_sum();
        const double t = state.t_sum();
        const double r = cfg.interaction_enabled ? s / (t + 1.0) : 0.0;
        const double half_r = 0.5 * r;
        const double half_r2 = 0.5 * r * r;
        for (int j = 0; j < cfg.n; ++j) {
            const double xj = state.x[j];
            const double dphi =
                gaussian_phi ? neg_inv_2s2 * xj : cfg.phi.phi_prime(xj);
            const double nx = xj + (dphi + half_r - xj * half_r2) * dt + noise(k, j);
            if (!std::isfinite(nx) || std::abs(nx) >= kFixedCoordLimit) {
                RescaledPath dummy; // caller assembles the real prefix
                throw blow_up_error(k + 1, std::move(dummy));
            }
            state.sums.replace(xj, nx);
            state.x[j] = nx;
        }
        state.natural_time = static_cast<double>(k + 1) * dt;
        if ((k + 1) % cfg.resync_every == 0) {
            // The incremental integer sums must equal a from-scratch pass.
            if (!(state.sums == PairSums::of(state.x)))
                throw std::logic_error("cached pair sums diverged from recomputation");
        }
        record(k + 1, state);
    }
}

// ---------- simulation with counter noise ----------

inline RescaledPath simulate_system(const SdeRunConfig& cfg, uint64_t replica = 0) {
    cfg.validate();
    const int64_t steps = cfg.steps();
    const double sqrt_n = std::sqrt(static_cast<double>(cfg.n));
    const double n34 = std::pow(static_cast<double>(cfg.n), 0.75);
    const double n14 = std::pow(static_cast<double>(cfg.n), 0.25);
    const uint64_t key = stream_key(cfg.seed, StreamPurpose::path_noise);
    const double root = std::sqrt(cfg.dt_natural / cfg.noise_substeps);

    ParticleState state = init_iid_gaussian(cfg.n, cfg.sigma_sq, cfg.seed, replica);

    RescaledPath path;
    path.n = cfg.n;
    path.sigma_sq = cfg.sigma_sq;
    path.seed = cfg.seed;
    path.replica = replica;
    const int64_t approx_records = steps / cfg.record_stride + 2;
    path.times.reserve(approx_records);
    path.s_tilde.reserve(approx_records);
    path.t_tilde.reserve(approx_records);

    std::vector<double> bm_cache(cfg.noise_substeps == 1 ? cfg.n : 0);
    auto noise = [&](int64_t k, int j) {
        if (cfg.noise_substeps == 2) {
            const GaussPair g = gauss_pair(key, replica, j, static_cast<uint64_t>(k));
            return root * (g.z0 + g.z1);
        }
        if ((k & 1) == 0) {
            const GaussPair g = gauss_pair(key, replica, j, static_cast<uint64_t>(k >> 1));
            bm_cache[j] = g.z1;
            return root * g.z0;
        }
        return root * bm_cache[j];
    };
    auto record = [&](int64_t k, const ParticleState& st) {
        if (k % cfg.record_stride != 0 && k != steps) return;
        path.times.push_back(static_cast<double>(k) * cfg.dt_natural / sqrt_n);
        path.s_tilde.push_back(st.s_sum() / n34);
        path.t_tilde.push_back(n14 * (st.t_sum() / cfg.n - cfg.sigma_sq));
        if (cfg.snapshot_full_state) path.snapshots.push_back(st.x);
    };

    try {
        integrate_particle_path(state, cfg, noise, record);
    } catch (blow_up_error& e) {
        throw blow_up_error(e.step, std::move(path));
    }
    return path;
}

inline std::vector<RescaledPath> run_replicas(const SdeRunConfig& cfg, int replicas,
                                              int workers) {
    if (replicas < 1) throw std::invalid_argument("run_replicas: replicas must be >= 1");
    std::vector<RescaledPath> out(replicas);
    parallel_for(replicas, workers,
                 [&](int r) { out[r] = simulate_system(cfg, static_cast<uint64_t>(r)); });
    return out;
}

} // namespace socdyn
