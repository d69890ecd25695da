#pragma once
// Pathwise verification of the inequalities that force the second coordinate
// to collapse onto its fixed point at the kappa = sqrt(n) time scale.  With
// xi = t_tilde^2 the required structure, checked record by record while the
// path stays in the centered box of radius k, is
//
//   (C3)  G(y^2) at the current point  <=  -kappa C2 xi + C4
//   (C4)  sum of squared noise coefficients of y^2  <=  C5
//
// together with the separation-of-scales condition kappa^{1/d} / alpha -> 0,
// which at alpha = n^{1/4} forces d > 2.  The constants are explicit in
// (n, sigma_sq, k) and conservative: C4 pads the in-box maximum of the
// nonnegative drift remainder, C5 the in-box maximum of the noise term.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "socdyn/generator.hpp"
#include "socdyn/particle_sde.hpp"

namespace socdyn {

struct CollapsingConstants {
    int n = 0;
    double sigma_sq = 1.0;
    double k = 2.0;  // box radius in both rescaled coordinates
    int d = 3;       // scale-separation exponent, must satisfy d > 2

    double kappa() const { return std::sqrt(static_cast<double>(n)); }
    double alpha() const { return quarter_power(n); }
    double c2() const { return 2.0 / sigma_sq; }

    // Largest value of the y-drift remainder on the closed box: x^2 h^2 is
    // maximized at |x| = k together with the most negative admissible y = -k,
    // where the damping factor is largest.
    double sup_r2_box() const {
        const double h = coupling_damping(-k, n, sigma_sq);
        return k * k * h * h / (std::pow(static_cast<double>(n), 0.75) * sigma_sq * sigma_sq);
    }

    double c4() const { return 4.0 * sigma_sq + 2.0 * k * sup_r2_box() + 4.0 * k; }
    double c5() const { return 16.0 * k * k * (sigma_sq + k); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("collapsing constants need n >= 1");
        if (!(sigma_sq > 0.0)) throw std::invalid_argument("collapsing constants need sigma_sq > 0");
        if (!(k > 0.0)) throw std::invalid_argument("collapsing constants need k > 0");
        if (d <= 2)
            throw std::invalid_argument(
                "collapsing constants need d > 2: kappa^{1/d} must be negligible against alpha = n^{1/4}");
        if (!(k < sigma_sq * quarter_power(n)))
            throw std::invalid_argument(
                "collapsing constants: box radius k reaches the domain edge y = -sigma_sq * n^{1/4}");
    }
};

struct CollapsingCheckReport {
    std::int64_t points_checked = 0;
    std::int64_t drift_violations = 0;  // (C3) failures
    std::int64_t noise_violations = 0;  // (C4) failures
    double worst_drift_margin = 0.0;    // min over records of bound - value; negative on violation
    double worst_noise_margin = 0.0;
    double max_xi = 0.0;
    double sup_abs_t_in_box = 0.0;
    std::optional<double> exit_time;    // first record with |s| >= k or |t| >= k
};

// Walk one recorded path, checking the two bounds at every in-box record and
// stopping at the first exit.  zeta is evaluated through the full generator
// acting on y^2, not a hand-expanded formula, so the check exercises the same
// operator the identity tests pin down.
inline CollapsingCheckReport collapsing_inequality_check(const RescaledPath& path,
                                                         const CollapsingConstants& cc) {
    cc.validate();
    if (path.n != cc.n)
        throw std::invalid_argument("collapsing_inequality_check: path and constants disagree on n");
    const auto m = path.times.size();
    if (m == 0 || path.s_tilde.size() != m || path.t_tilde.size() != m)
        throw std::invalid_argument("collapsing_inequality_check: empty or ragged path");

    const Function2D ysq = Function2D::y_squared();
    const double kappa_c2 = cc.kappa() * cc.c2();
    const double c4 = cc.c4();
    const double c5 = cc.c5();
    const double n14 = cc.alpha();

    CollapsingCheckReport rep;
    rep.worst_drift_margin = std::numeric_limits<double>::infinity();
    rep.worst_noise_margin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i) {
        const double x = path.s_tilde[i];
        const double y = path.t_tilde[i];
        if (std::abs(x) >= cc.k || std::abs(y) >= cc.k) {
            rep.exit_time = path.times[i];
            break;
        }
        const double xi = y * y;
        const double zeta = apply_g_tilde_n(ysq, {x, y, cc.n, cc.sigma_sq});
        const double drift_margin = (-kappa_c2 * xi + c4) - zeta;
        const double noise_sum = 16.0 * y * y * (cc.sigma_sq + y / n14);
        const double noise_margin = c5 - noise_sum;

        ++rep.points_checked;
        rep.max_xi = std::max(rep.max_xi, xi);
        rep.sup_abs_t_in_box = std::max(rep.sup_abs_t_in_box, std::abs(y));
        rep.worst_drift_margin = std::min(rep.worst_drift_margin, drift_margin);
        rep.worst_noise_margin = std::min(rep.worst_noise_margin, noise_margin);
        if (drift_margin < 0.0) ++rep.drift_violations;
        if (noise_margin < 0.0) ++rep.noise_violations;
    }
    return rep;
}

} // namespace socdyn
