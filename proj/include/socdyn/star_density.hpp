#pragma once
// The n-particle stationary density and the drift that makes the particle
// system its Langevin diffusion.
//
// Up to normalization, log f*(x) = S^2/(2(T+1)) + 2 sum_j phi(x_j) with
// S = sum x_j and T = sum x_j^2.  The drift of coordinate j is
//
//   drift_j = phi'(x_j) + (r - x_j r^2)/2,   r = S/(T+1),
//
// which is exactly half the gradient of log f*, so grad log f* == 2*drift
// holds identically and is asserted by the tests.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "socdyn/fixed_sums.hpp"
#include "socdyn/phi_model.hpp"

namespace socdyn {

struct ParticleState {
    std::vector<double> x;
    PairSums sums;
    double natural_time = 0.0;

    double s_sum() const { return sums.s(); }
    double t_sum() const { return sums.t(); }

    static ParticleState of(std::vector<double> coords) {
        ParticleState st;
        st.sums = PairSums::of(coords);
        st.x = std::move(coords);
        return st;
    }
};

struct StarDensity {
    int n = 0;
    PhiModel model;
    // Diagnostic switch: with the interaction dropped the density factorizes
    // into the product exp(2 phi) and the drift is plain phi'.
    bool interaction_enabled = true;
};

inline void check_dimension(const StarDensity& density, size_t coords) {
    if (static_cast<size_t>(density.n) != coords)
        throw std::invalid_argument("StarDensity: coordinate count does not match n");
}

// log f* up to the (n-dependent) normalization constant.
inline double log_density_star(const StarDensity& density, const std::vector<double>& x) {
    check_dimension(density, x.size());
    double s = 0.0, t = 0.0, phi_sum = 0.0;
    for (double v : x) {
        s += v;
        t += v * v;
        phi_sum += density.model.phi(v);
    }
    const double interaction =
        density.interaction_enabled ? 0.5 * s * s / (t + 1.0) : 0.0;
    return interaction + 2.0 * phi_sum;
}

// Core drift evaluation against precomputed sums; out must have x.size() slots.
inline void drift_into(const std::vector<double>& x, double s, double t,
                       const PhiModel& model, bool interaction_enabled,
                       std::vector<double>& out) {
    const double r = interaction_enabled ? s / (t + 1.0) : 0.0;
    const double half_r = 0.5 * r;
    const double half_r2 = 0.5 * r * r;
    for (size_t j = 0; j < x.size(); ++j)
        out[j] = model.phi_prime(x[j]) + half_r - x[j] * half_r2;
}

inline std::vector<double> drift_vector(const StarDensity& density,
                                        const ParticleState& state) {
    check_dimension(density, state.x.size());
    std::vector<double> out(state.x.size());
    drift_into(state.x, state.s_sum(), state.t_sum(), density.model,
               density.interaction_enabled, out);
    return out;
}

inline std::vector<double> grad_log_density_star(const StarDensity& density,
                                                 const std::vector<double>& x) {
    check_dimension(density, x.size());
    // Take S and T from the same quantized accumulator the integrators use,
    // so grad == 2*drift holds exactly rather than to summation-order noise.
    const PairSums sums = PairSums::of(x);
    std::vector<double> out(x.size());
    drift_into(x, sums.s(), sums.t(), density.model, density.interaction_enabled, out);
    for (double& v : out) v *= 2.0;
    return out;
}

// ---------- confinement diagnostics ----------

// inner_product = S^2/(T+1)^2 + 2 sum_j x_j phi'(x_j) is the dissipation term
// whose upper bound keeps the diffusion from escaping.  Two bounds are
// reported: inner_product <= ratio_term + 2C(n + |x|^2), and the ratio term
// itself never exceeds n (S^2 <= nT and T <= (T+1)^2).
struct ConfinementReport {
    double inner_product = 0.0;
    double ratio_term = 0.0;
    double bound = 0.0;
    bool within = true;
};

inline ConfinementReport confinement_diagnostics(const StarDensity& density,
                                                 const std::vector<double>& x) {
    check_dimension(density, x.size());
    double s = 0.0, t = 0.0, cross = 0.0;
    for (double v : x) {
        s += v;
        t += v * v;
        cross += v * density.model.phi_prime(v);
    }
    ConfinementReport r;
    const double tp1 = t + 1.0;
    r.ratio_term = s * s / (tp1 * tp1);
    r.inner_product = r.ratio_term + 2.0 * cross;
    const double n = static_cast<double>(x.size());
    r.bound = r.ratio_term + 2.0 * density.model.confinement_c * (n + t);
    const double slack = 1e-12 * std::max(1.0, std::abs(r.bound));
    r.within = (r.inner_product <= r.bound + slack) && (r.ratio_term <= n + slack);
    return r;
}

} // namespace socdyn
