#pragma once
// Metropolis-adjusted (or unadjusted) Langevin sampling of the n-particle
// stationary density.  Full-dimensional proposals
//
//   y = x + (h/2) grad log f*(x) + sqrt(h) xi
//
// with the exact accept/reject correction; the step auto-tunes toward 0.55
// acceptance during burn-in and is frozen afterwards so the kept chain
// satisfies detailed balance.  Recorded statistic: S/n^{3/4} per kept sweep.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "socdyn/rng.hpp"
#include "socdyn/star_density.hpp"

namespace socdyn {

struct MalaConfig {
    int n = 2;
    double sigma_sq = 1.0;
    double step = 0.0; // 0: use 0.5 sigma_sq / n^{1/3}
    int64_t burn_in_sweeps = 0;
    int64_t thinning = 1;
    int64_t kept_samples = 1000;
    uint64_t seed = 1;
    uint64_t chain_id = 0;
    bool adjust = true;    // false: unadjusted Langevin, every proposal accepted
    bool auto_tune = true; // step adaptation during burn-in only
    bool interaction_enabled = true;

    double initial_step() const {
        return step > 0.0 ? step
                          : 0.5 * sigma_sq / std::cbrt(static_cast<double>(n));
    }

    // Burn-in and thinning sized from the slow mode: S/n^{3/4} relaxes on a
    // natural-time scale of order sqrt(n), i.e. sqrt(n)/h sweeps.
    static MalaConfig defaults(int n, double sigma_sq, int64_t kept, uint64_t seed) {
        MalaConfig c;
        c.n = n;
        c.sigma_sq = sigma_sq;
        c.kept_samples = kept;
        c.seed = seed;
        const double h0 = c.initial_step();
        const double relax_sweeps = std::sqrt(static_cast<double>(n)) * sigma_sq / h0;
        c.burn_in_sweeps = std::max<int64_t>(2000, static_cast<int64_t>(30.0 * relax_sweeps));
        c.thinning = std::max<int64_t>(10, static_cast<int64_t>(0.5 * relax_sweeps));
        return c;
    }

    void validate() const {
        if (n < 1) throw std::invalid_argument("mala: n must be >= 1");
        if (!(sigma_sq > 0.0)) throw std::invalid_argument("mala: sigma_sq must be positive");
        if (step < 0.0) throw std::invalid_argument("mala: step must be >= 0");
        if (burn_in_sweeps < 0) throw std::invalid_argument("mala: burn_in_sweeps must be >= 0");
        if (thinning < 1) throw std::invalid_argument("mala: thinning must be >= 1");
        if (kept_samples < 1) throw std::invalid_argument("mala: kept_samples must be >= 1");
    }
};

struct ChainDiagnostics {
    double acceptance_rate = 0.0; // over the sampling phase
    double ess = 0.0;             // of the kept statistic series
    int64_t sweeps = 0;           // total, burn-in included
    double final_step = 0.0;
    int64_t nonfinite_proposals = 0;
};

struct EquilibriumSample {
    std::vector<double> s_star_rescaled;
    ChainDiagnostics diag;
};

// Integrated-autocorrelation ESS with the initial-positive-sequence cutoff.
inline double effective_sample_size(const std::vector<double>& v) {
    const int64_t m = static_cast<int64_t>(v.size());
    if (m < 8) return static_cast<double>(m);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(m);
    double c0 = 0.0;
    for (double x : v) c0 += (x - mean) * (x - mean);
    c0 /= static_cast<double>(m);
    if (c0 <= 0.0) return static_cast<double>(m);
    double tau = 1.0;
    for (int64_t k = 1; k <= m / 3; ++k) {
        double ck = 0.0;
        for (int64_t i = 0; i + k < m; ++i) ck += (v[i] - mean) * (v[i + k] - mean);
        ck /= static_cast<double>(m);
        const double rho = ck / c0;
        if (rho <= 0.0) break;
        tau += 2.0 * rho;
    }
    return static_cast<double>(m) / tau;
}

class MalaChain {
public:
    MalaChain(MalaConfig cfg, uint64_t replica)
        : cfg_(std::move(cfg)), replica_(replica) {
        cfg_.validate();
        density_.n = cfg_.n;
        density_.model = PhiModel::gaussian(cfg_.sigma_sq);
        density_.interaction_enabled = cfg_.interaction_enabled;
        key_prop_ = stream_key(cfg_.seed, StreamPurpose::proposal);
        key_accept_ = stream_key(cfg_.seed, StreamPurpose::accept);
        h_ = cfg_.initial_step();

        const uint64_t key_init = stream_key(cfg_.seed, StreamPurpose::init_state);
        const double sigma = std::sqrt(cfg_.sigma_sq);
        x_.resize(cfg_.n);
        for (int j = 0; j < cfg_.n; ++j)
            x_[j] = sigma * gaussian_at(key_init, replica_, j, 0);
        sums_ = PairSums::of(x_);
        grad_x_.resize(cfg_.n);
        refresh_target(x_, sums_, logpi_x_, grad_x_);
        y_.resize(cfg_.n);
        grad_y_.resize(cfg_.n);
        bm_cache_.resize(cfg_.n);
    }

    // One full-dimensional proposal; returns whether it was accepted.
    bool sweep(int64_t index) {
        double xi_sq = 0.0;
        const double root_h = std::sqrt(h_);
        bool finite = true;
        for (int j = 0; j < cfg_.n; ++j) {
            const double xi = propose_noise(index, j);
            xi_sq += xi * xi;
            const double yj = x_[j] + 0.5 * h_ * grad_x_[j] + root_h * xi;
            y_[j] = yj;
            if (!std::isfinite(yj) || std::abs(yj) >= kFixedCoordLimit) finite = false;
        }
        if (!finite) {
            ++nonfinite_;
            return false;
        }

        const PairSums sums_y = PairSums::of(y_);
        double logpi_y;
        refresh_target(y_, sums_y, logpi_y, grad_y_);

        bool accept = true;
        if (cfg_.adjust) {
            double reverse = 0.0;
            for (int j = 0; j < cfg_.n; ++j) {
                const double d = x_[j] - y_[j] - 0.5 * h_ * grad_y_[j];
                reverse += d * d;
            }
            const double log_alpha =
                logpi_y - logpi_x_ - reverse / (2.0 * h_) + 0.5 * xi_sq;
            const double u = uniform01(key_accept_, replica_, 0, static_cast<uint64_t>(index));
            accept = std::log(u) < log_alpha;
        }
        if (accept) {
            x_.swap(y_);
            grad_x_.swap(grad_y_);
            sums_ = sums_y;
            logpi_x_ = logpi_y;
        }
        return accept;
    }

    void scale_step(double factor) {
        h_ = std::min(5.0, std::max(1e-7, h_ * factor));
    }

    double step() const { return h_; }
    double s_star_rescaled() const {
        return sums_.s() / std::pow(static_cast<double>(cfg_.n), 0.75);
    }
    const std::vector<double>& state() const { return x_; }
    int64_t nonfinite_proposals() const { return nonfinite_; }
    const StarDensity& density() const { return density_; }

private:
    double propose_noise(int64_t sweep_index, int j) {
        if ((sweep_index & 1) == 0) {
            const GaussPair g =
                gauss_pair(key_prop_, replica_, j, static_cast<uint64_t>(sweep_index >> 1));
            bm_cache_[j] = g.z1;
            return g.z0;
        }
        return bm_cache_[j];
    }

    // log f* and its gradient from shared sums; the gaussian potential allows
    // the O(1) form 2 sum phi = -T/(2 sigma^2).
    void refresh_target(const std::vector<double>& pos, const PairSums& sums,
                        double& logpi, std::vector<double>& grad) const {
        const double s = sums.s();
        const double t = sums.t();
        const double interaction =
            density_.interaction_enabled ? 0.5 * s * s / (t + 1.0) : 0.0;
        logpi = interaction - t / (2.0 * cfg_.sigma_sq);
        drift_into(pos, s, t, density_.model, density_.interaction_enabled, grad);
        for (double& g : grad) g *= 2.0;
    }

    MalaConfig cfg_;
    uint64_t replica_ = 0;
    StarDensity density_;
    uint64_t key_prop_ = 0, key_accept_ = 0;
    double h_ = 0.1;
    std::vector<double> x_, y_, grad_x_, grad_y_, bm_cache_;
    PairSums sums_;
    double logpi_x_ = 0.0;
    int64_t nonfinite_ = 0;
};

inline EquilibriumSample sample_equilibrium(const MalaConfig& cfg) {
    cfg.validate();
    MalaChain chain(cfg, cfg.chain_id);

    // Burn-in with windowed step adaptation toward 0.55 acceptance.
    const int64_t window = 100;
    int64_t accepted_window = 0, accepted_tail = 0, tail_len = 0;
    for (int64_t s = 0; s < cfg.burn_in_sweeps; ++s) {
        const bool acc = chain.sweep(s);
        accepted_window += acc;
        if (cfg.burn_in_sweeps - s <= 500) {
            accepted_tail += acc;
            ++tail_len;
        }
        if (cfg.auto_tune && cfg.adjust && (s + 1) % window == 0) {
            const double rate = static_cast<double>(accepted_window) / window;
            chain.scale_step(std::exp(0.5 * (rate - 0.55)));
            accepted_window = 0;
        }
    }
    if (cfg.adjust && tail_len >= 100) {
        const double tail_rate = static_cast<double>(accepted_tail) / tail_len;
        if (tail_rate < 0.05)
            throw std::runtime_error(
                "mala acceptance rate " + std::to_string(tail_rate) +
                " after the tuning window; retune the proposal step");
    }

    EquilibriumSample out;
    out.s_star_rescaled.reserve(cfg.kept_samples);
    int64_t accepted = 0;
    const int64_t sampling_sweeps = cfg.kept_samples * cfg.thinning;
    for (int64_t s = 0; s < sampling_sweeps; ++s) {
        accepted += chain.sweep(cfg.burn_in_sweeps + s);
        if ((s + 1) % cfg.thinning == 0)
            out.s_star_rescaled.push_back(chain.s_star_rescaled());
    }

    out.diag.acceptance_rate =
        sampling_sweeps > 0 ? static_cast<double>(accepted) / sampling_sweeps : 0.0;
    if (cfg.adjust && sampling_sweeps >= 1000 && out.diag.acceptance_rate < 0.05)
        throw std::runtime_error("mala acceptance rate collapsed during sampling; retune");
    out.diag.ess = effective_sample_size(out.s_star_rescaled);
    out.diag.sweeps = cfg.burn_in_sweeps + sampling_sweeps;
    out.diag.final_step = chain.step();
    out.diag.nonfinite_proposals = chain.nonfinite_proposals();
    return out;
}

} // namespace socdyn
