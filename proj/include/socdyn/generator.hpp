#pragma once
// Generator calculus for the rescaled sum/second-moment pair.
//
// Three objects live here and the tests pin down how they relate:
//
//   * sqrtn_ln_psi      sqrt(n) L_n acting on F(s_tilde, t_tilde), computed
//                       from the n-particle dynamics by the chain rule.  No
//                       closed form is assumed; this is the ground truth.
//   * apply_g_tilde_n   the same operator written directly in the (x, y)
//                       plane.  Agreeing with sqrtn_ln_psi to round-off for
//                       every particle configuration is the first thing the
//                       acceptance suite checks.
//   * g_tilde_truncated the main part obtained by dropping the two remainder
//                       coefficients and the 1/n^{1/4} second-order terms.
//                       exact == truncated + fx*R1 + fy*R2 + mixed terms is
//                       an algebraic identity, tested as such.
//
// Everything is written in the variables w = y / (n^{1/4} sigma^2) and
// c = 1 / (n sigma^2); the operator is only defined for 1 + w + c > 0,
// i.e. y > -sigma^2 n^{1/4} (where the particle second moment would be
// negative).  The small remainder eps1 is evaluated in a cancellation-free
// form; the naive difference of the two large terms that define it loses all
// precision near w = 0 at large n.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "socdyn/function2d.hpp"
#include "socdyn/test_function.hpp"

namespace socdyn {

struct GeneratorPoint {
    double x = 0.0;
    double y = 0.0;
    int n = 1;
    double sigma_sq = 1.0;
};

inline double quarter_power(int n) { return std::pow(static_cast<double>(n), 0.25); }

inline void check_generator_domain(const GeneratorPoint& p) {
    if (p.n < 1) throw std::domain_error("generator point needs n >= 1");
    if (!(p.sigma_sq > 0.0)) throw std::domain_error("generator point needs sigma_sq > 0");
    if (!(p.y > -p.sigma_sq * quarter_power(p.n)))
        throw std::domain_error("generator point outside domain: y <= -sigma_sq * n^{1/4}");
}

// h = 1 / (1 + w + c), the factor by which the mean-field coupling is damped
// at finite n.  h -> 1 in the limit.
inline double coupling_damping(double y, int n, double sigma_sq) {
    if (!(y > -sigma_sq * quarter_power(n)))
        throw std::domain_error("coupling_damping outside domain: y <= -sigma_sq * n^{1/4}");
    const double w = y / (quarter_power(n) * sigma_sq);
    const double c = 1.0 / (static_cast<double>(n) * sigma_sq);
    return 1.0 / (1.0 + w + c);
}

// eps1 = sqrt(n) * [(w - w^2) - (1 - h)]: the defect of the damping factor
// from its quadratic expansion, scaled back up.  Expanding 1 - h = (w + c) h
// and clearing the denominator gives the single-ratio form below, which does
// not cancel.  Convention: exact x-coefficient == truncated + R1 with
// R1 = (x / 2 sigma^2) eps1 - (x^3 / 2 sigma^4) eps2.
inline double drift_eps1(double y, int n, double sigma_sq) {
    if (!(y > -sigma_sq * quarter_power(n)))
        throw std::domain_error("drift_eps1 outside domain: y <= -sigma_sq * n^{1/4}");
    const double w = y / (quarter_power(n) * sigma_sq);
    const double c = 1.0 / (static_cast<double>(n) * sigma_sq);
    const double u = w + c;
    return -std::sqrt(static_cast<double>(n)) * (c * (1.0 - w + w * w) + w * w * w) / (1.0 + u);
}

// eps2 = h^2 - 1, computed as (-u h)(1 + h) to avoid forming h^2 - 1 directly.
inline double drift_eps2(double y, int n, double sigma_sq) {
    const double w = y / (quarter_power(n) * sigma_sq);
    const double c = 1.0 / (static_cast<double>(n) * sigma_sq);
    const double u = w + c;
    const double h = coupling_damping(y, n, sigma_sq);
    return (-u * h) * (1.0 + h);
}

// R1: what the exact x-drift coefficient exceeds the truncated one by.
inline double remainder_r1(const GeneratorPoint& p) {
    check_generator_domain(p);
    const double s4 = p.sigma_sq * p.sigma_sq;
    return (p.x / (2.0 * p.sigma_sq)) * drift_eps1(p.y, p.n, p.sigma_sq) -
           (p.x * p.x * p.x / (2.0 * s4)) * drift_eps2(p.y, p.n, p.sigma_sq);
}

// R2: the surviving finite-n part of the y-drift beyond the linear pull-back.
inline double remainder_r2(const GeneratorPoint& p) {
    check_generator_domain(p);
    const double h = coupling_damping(p.y, p.n, p.sigma_sq);
    const double s4 = p.sigma_sq * p.sigma_sq;
    return p.x * p.x * h * h / (std::pow(static_cast<double>(p.n), 0.75) * s4);
}

// Limit generator on the line: (G_sigma f)(x) = f''/2 - x^3 f'/(2 sigma^4).
inline double apply_g_sigma(const TestFunction& f, double x, double sigma_sq) {
    if (!(sigma_sq > 0.0)) throw std::domain_error("apply_g_sigma needs sigma_sq > 0");
    const double s4 = sigma_sq * sigma_sq;
    return 0.5 * f.d2(x) - (x * x * x / (2.0 * s4)) * f.d1(x);
}

// Exact finite-n generator in the (x, y) plane.
inline double apply_g_tilde_n(const Function2D& f, const GeneratorPoint& p) {
    check_generator_domain(p);
    const double x = p.x, y = p.y, s2 = p.sigma_sq;
    const double s4 = s2 * s2;
    const double rootn = std::sqrt(static_cast<double>(p.n));
    const double n14 = quarter_power(p.n);
    const double h = coupling_damping(y, p.n, s2);
    const double w = y / (n14 * s2);
    const double c = 1.0 / (static_cast<double>(p.n) * s2);
    // 1 - h = (w + c) h, formed without cancellation.
    const double one_minus_h = (w + c) * h;

    const double coef_x = -(rootn * x / (2.0 * s2)) * one_minus_h - (x * x * x / (2.0 * s4)) * h * h;
    const double coef_y = -rootn * y / s2 + x * x * h * h / (std::pow(static_cast<double>(p.n), 0.75) * s4);

    return 0.5 * f.fxx(x, y) + (2.0 * x / n14) * f.fxy(x, y) +
           (2.0 * s2 + 2.0 * y / n14) * f.fyy(x, y) + coef_x * f.fx(x, y) + coef_y * f.fy(x, y);
}

// Main part: second-order block frozen at n = infinity, x-drift truncated at
// the cubic order, y-drift reduced to the linear pull-back.
inline double g_tilde_truncated(const Function2D& f, const GeneratorPoint& p) {
    check_generator_domain(p);
    const double x = p.x, y = p.y, s2 = p.sigma_sq;
    const double s4 = s2 * s2;
    const double s6 = s4 * s2;
    const double rootn = std::sqrt(static_cast<double>(p.n));
    const double n14 = quarter_power(p.n);

    const double coef_x = -n14 * x * y / (2.0 * s4) + (x * y * y - x * x * x * s2) / (2.0 * s6);
    const double coef_y = -rootn * y / s2;

    return 0.5 * f.fxx(x, y) + 2.0 * s2 * f.fyy(x, y) + coef_x * f.fx(x, y) +
           coef_y * f.fy(x, y);
}

// sqrt(n) L_n applied to x -> F(S/n^{3/4}, n^{1/4}(T/n - sigma^2)) at a
// particle configuration, via the chain rule.  Interaction and confinement
// are the gaussian-potential dynamics; this is the reference the plane form
// must reproduce.
inline double sqrtn_ln_psi(const std::vector<double>& xs, const Function2D& f, double sigma_sq) {
    if (xs.empty()) throw std::invalid_argument("sqrtn_ln_psi needs at least one particle");
    if (!(sigma_sq > 0.0)) throw std::domain_error("sqrtn_ln_psi needs sigma_sq > 0");
    const auto n = static_cast<double>(xs.size());
    double s = 0.0, t = 0.0;
    for (double v : xs) {
        s += v;
        t += v * v;
    }
    const double n34 = std::pow(n, 0.75);
    const double xt = s / n34;
    const double yt = std::pow(n, 0.25) * (t / n - sigma_sq);

    const double fx = f.fx(xt, yt), fy = f.fy(xt, yt);
    const double fxx = f.fxx(xt, yt), fxy = f.fxy(xt, yt), fyy = f.fyy(xt, yt);

    const double r = s / (t + 1.0);
    const double r2 = r * r;
    double drift_sum = 0.0;
    double x_drift_sum = 0.0;
    for (double v : xs) {
        const double d = -v / (2.0 * sigma_sq) + 0.5 * (r - v * r2);
        drift_sum += d;
        x_drift_sum += v * d;
    }

    const double second = 0.5 * (n * fxx + 4.0 * s * fxy + 4.0 * t * fyy) / n;
    const double ito_y = std::pow(n, 0.75) * fy;
    const double first = (fx * drift_sum + 2.0 * fy * x_drift_sum) / std::pow(n, 0.25);
    return second + ito_y + first;
}

struct PerturbationTerms {
    double h_value = 0.0;
    double k_value = 0.0;
    double f_n_value = 0.0;
};

inline PerturbationTerms perturbation_terms(const TestFunction& f, double x, double y, int n,
                                            double sigma_sq) {
    if (n < 1) throw std::domain_error("perturbation_terms needs n >= 1");
    if (!(sigma_sq > 0.0)) throw std::domain_error("perturbation_terms needs sigma_sq > 0");
    PerturbationTerms out;
    out.h_value = corrector_h(f, sigma_sq).f(x, y);
    out.k_value = corrector_k(f, sigma_sq).f(x, y);
    const double a = std::pow(static_cast<double>(n), -0.25);
    out.f_n_value = f.f(x) + a * out.h_value + a * a * out.k_value;
    return out;
}

struct RemainderSup {
    double sup = 0.0;
    double at_x = 0.0;
    double at_y = 0.0;
};

// sup over the closed Euclidean disk of radius k of
// |G_tilde_n F_{n,f} - G_sigma f|, scanned on a regular grid.  The disk must
// sit inside the operator's domain, hence k < sigma^2 n^{1/4}.
inline RemainderSup remainder_sup(const TestFunction& f, int n, double k, double sigma_sq,
                                  int grid_per_axis = 121) {
    if (n < 1) throw std::domain_error("remainder_sup needs n >= 1");
    if (!(sigma_sq > 0.0)) throw std::domain_error("remainder_sup needs sigma_sq > 0");
    if (!(k > 0.0)) throw std::domain_error("remainder_sup needs k > 0");
    if (!(k < sigma_sq * quarter_power(n)))
        throw std::domain_error(
            "remainder_sup: box radius k reaches y <= -sigma_sq * n^{1/4}; shrink k or grow n");
    if (grid_per_axis < 3) throw std::invalid_argument("remainder_sup needs grid_per_axis >= 3");

    const Function2D big_f = perturbed_observable(f, n, sigma_sq);
    RemainderSup out;
    const double step = 2.0 * k / (grid_per_axis - 1);
    for (int i = 0; i < grid_per_axis; ++i) {
        const double x = -k + i * step;
        for (int j = 0; j < grid_per_axis; ++j) {
            const double y = -k + j * step;
            if (x * x + y * y > k * k * (1.0 + 1e-12)) continue;
            const double val =
                std::abs(apply_g_tilde_n(big_f, {x, y, n, sigma_sq}) - apply_g_sigma(f, x, sigma_sq));
            if (val > out.sup) {
                out.sup = val;
                out.at_x = x;
                out.at_y = y;
            }
        }
    }
    return out;
}

} // namespace socdyn
