#pragma once
// Dynkin residual along a recorded path: for the corrected observable
// F = F_{n,f}, the process  M(t) = F(path(t)) - F(path(0)) - int_0^t G F ds
// should be a martingale started at zero.  We estimate the time integral with
// the trapezoid rule on the recorded grid and report the predicted quadratic
// variation alongside, so a caller can compare Var M(t) against it across
// replicas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "socdyn/function2d.hpp"
#include "socdyn/generator.hpp"
#include "socdyn/particle_sde.hpp"
#include "socdyn/test_function.hpp"

namespace socdyn {

struct MartingaleSeries {
    std::vector<double> times;
    std::vector<double> residual;    // M at each record, residual[0] == 0
    std::vector<double> qv;          // predicted <M> via the carre-du-champ rate
    std::int64_t integrand_jumps = 0; // records where G F moved by > 10% of its path sup
};

// Quadratic-variation rate of F along the pair dynamics:
//   |grad|^2 summed over particles = P^2 + (4x / n^{1/4}) P Q
//                                  + (4 sigma^2 + 4y / n^{1/4}) Q^2
// with P = F_x, Q = F_y at the rescaled point.
inline double qv_rate(const Function2D& f, const GeneratorPoint& p) {
    check_generator_domain(p);
    const double n14 = quarter_power(p.n);
    const double pp = f.fx(p.x, p.y);
    const double qq = f.fy(p.x, p.y);
    return pp * pp + (4.0 * p.x / n14) * pp * qq +
           (4.0 * p.sigma_sq + 4.0 * p.y / n14) * qq * qq;
}

inline MartingaleSeries martingale_residual(const RescaledPath& path, const TestFunction& f) {
    const auto m = path.times.size();
    if (m < 2) throw std::invalid_argument("martingale_residual needs at least two records");
    if (path.s_tilde.size() != m || path.t_tilde.size() != m)
        throw std::invalid_argument("martingale_residual: ragged path");

    const Function2D big_f = perturbed_observable(f, path.n, path.sigma_sq);

    std::vector<double> g(m), rate(m), fval(m);
    double g_sup = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const GeneratorPoint p{path.s_tilde[i], path.t_tilde[i], path.n, path.sigma_sq};
        g[i] = apply_g_tilde_n(big_f, p);
        rate[i] = qv_rate(big_f, p);
        fval[i] = big_f.f(p.x, p.y);
        g_sup = std::max(g_sup, std::abs(g[i]));
    }

    MartingaleSeries out;
    out.times = path.times;
    out.residual.resize(m);
    out.qv.resize(m);
    out.residual[0] = 0.0;
    out.qv[0] = 0.0;
    const double jump_gate = 0.1 * std::max(g_sup, 1e-8);
    double integral = 0.0, qv_integral = 0.0;
    for (size_t i = 1; i < m; ++i) {
        const double dt = path.times[i] - path.times[i - 1];
        integral += 0.5 * dt * (g[i] + g[i - 1]);
        qv_integral += 0.5 * dt * (rate[i] + rate[i - 1]);
        out.residual[i] = fval[i] - fval[0] - integral;
        out.qv[i] = qv_integral;
        if (std::abs(g[i] - g[i - 1]) > jump_gate) ++out.integrand_jumps;
    }
    return out;
}

} // namespace socdyn
