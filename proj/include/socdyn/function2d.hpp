#pragma once
// Observables F(x, y) of the rescaled pair, carrying value and the five
// partials the second-order generator needs.  The perturbed observable
// F = f + n^{-1/4} H + n^{-1/2} K packages the corrector terms whose partials
// were worked out by hand; fd_validate_2d is there to keep that algebra honest.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "socdyn/test_function.hpp"

namespace socdyn {

struct Function2D {
    std::function<double(double, double)> f;
    std::function<double(double, double)> fx;
    std::function<double(double, double)> fy;
    std::function<double(double, double)> fxx;
    std::function<double(double, double)> fxy;
    std::function<double(double, double)> fyy;

    static Function2D zero() {
        auto z = [](double, double) { return 0.0; };
        return {z, z, z, z, z, z};
    }

    // Lift a one-variable observable: F(x, y) = g(x).
    static Function2D profile(const TestFunction& g) {
        auto z = [](double, double) { return 0.0; };
        return {[g = g.f](double x, double) { return g(x); },
                [g = g.d1](double x, double) { return g(x); },
                z,
                [g = g.d2](double x, double) { return g(x); },
                z,
                z};
    }

    static Function2D coord_y() {
        auto z = [](double, double) { return 0.0; };
        return {[](double, double y) { return y; }, z, [](double, double) { return 1.0; },
                z, z, z};
    }

    static Function2D y_squared() {
        auto z = [](double, double) { return 0.0; };
        return {[](double, double y) { return y * y; },
                z,
                [](double, double y) { return 2.0 * y; },
                z,
                z,
                [](double, double) { return 2.0; }};
    }

    static Function2D product_xy() {
        auto z = [](double, double) { return 0.0; };
        return {[](double x, double y) { return x * y; },
                [](double, double y) { return y; },
                [](double x, double) { return x; },
                z,
                [](double, double) { return 1.0; },
                z};
    }
};

// First corrector: H(x, y) = -x y f'(x) / (2 sigma^2).
inline Function2D corrector_h(const TestFunction& f, double sigma_sq) {
    const double c = -0.5 / sigma_sq;
    return {
        [f1 = f.d1, c](double x, double y) { return c * x * y * f1(x); },
        [f1 = f.d1, f2 = f.d2, c](double x, double y) { return c * y * (f1(x) + x * f2(x)); },
        [f1 = f.d1, c](double x, double) { return c * x * f1(x); },
        [f2 = f.d2, f3 = f.d3, c](double x, double y) {
            return c * y * (2.0 * f2(x) + x * f3(x));
        },
        [f1 = f.d1, f2 = f.d2, c](double x, double) { return c * (f1(x) + x * f2(x)); },
        [](double, double) { return 0.0; }};
}

// Second corrector: K(x, y) = x y^2 (3 f'(x) + x f''(x)) / (8 sigma^4).
inline Function2D corrector_k(const TestFunction& f, double sigma_sq) {
    const double s4 = sigma_sq * sigma_sq;
    const double c8 = 1.0 / (8.0 * s4);
    const double c4 = 1.0 / (4.0 * s4);
    return {
        [f1 = f.d1, f2 = f.d2, c8](double x, double y) {
            return c8 * x * y * y * (3.0 * f1(x) + x * f2(x));
        },
        [f1 = f.d1, f2 = f.d2, f3 = f.d3, c8](double x, double y) {
            return c8 * y * y * (3.0 * f1(x) + 5.0 * x * f2(x) + x * x * f3(x));
        },
        [f1 = f.d1, f2 = f.d2, c4](double x, double y) {
            return c4 * x * y * (3.0 * f1(x) + x * f2(x));
        },
        [f2 = f.d2, f3 = f.d3, f4 = f.d4, c8](double x, double y) {
            return c8 * y * y * (8.0 * f2(x) + 7.0 * x * f3(x) + x * x * f4(x));
        },
        [f1 = f.d1, f2 = f.d2, f3 = f.d3, c4](double x, double y) {
            return c4 * y * (3.0 * f1(x) + 5.0 * x * f2(x) + x * x * f3(x));
        },
        [f1 = f.d1, f2 = f.d2, c4](double x, double) {
            return c4 * x * (3.0 * f1(x) + x * f2(x));
        }};
}

inline Function2D linear_combination(Function2D a, double ca, Function2D b, double cb,
                                     Function2D c, double cc) {
    auto mix = [ca, cb, cc](std::function<double(double, double)> fa,
                            std::function<double(double, double)> fb,
                            std::function<double(double, double)> fc) {
        return [ca, cb, cc, fa = std::move(fa), fb = std::move(fb),
                fc = std::move(fc)](double x, double y) {
            return ca * fa(x, y) + cb * fb(x, y) + cc * fc(x, y);
        };
    };
    Function2D out;
    out.f = mix(a.f, b.f, c.f);
    out.fx = mix(a.fx, b.fx, c.fx);
    out.fy = mix(a.fy, b.fy, c.fy);
    out.fxx = mix(a.fxx, b.fxx, c.fxx);
    out.fxy = mix(a.fxy, b.fxy, c.fxy);
    out.fyy = mix(a.fyy, b.fyy, c.fyy);
    return out;
}

// F_{n,f} = f + n^{-1/4} H + n^{-1/2} K, the corrected observable whose image
// under the finite-n generator tracks the one-dimensional limit generator.
inline Function2D perturbed_observable(const TestFunction& f, int n, double sigma_sq) {
    const double a = std::pow(static_cast<double>(n), -0.25);
    return linear_combination(Function2D::profile(f), 1.0, corrector_h(f, sigma_sq), a,
                              corrector_k(f, sigma_sq), a * a);
}

struct Fd2dReport {
    double max_deviation = 0.0;
    const char* worst_partial = "";
    double worst_x = 0.0, worst_y = 0.0;
    bool pass(double tol) const { return max_deviation <= tol; }
};

// Richardson-refined central differences for all five partials.
inline Fd2dReport fd_validate_2d(const Function2D& g,
                                 const std::vector<std::pair<double, double>>& points) {
    auto refine = [](auto&& est, double h) { return (4.0 * est(0.5 * h) - est(h)) / 3.0; };
    Fd2dReport rep;
    auto consider = [&rep](double fd, double an, const char* tag, double x, double y) {
        const double dev = std::abs(fd - an) / std::max(1.0, std::abs(an));
        if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.worst_partial = tag;
            rep.worst_x = x;
            rep.worst_y = y;
        }
    };
    for (auto [x, y] : points) {
        const double h = 0.02 * std::max({1.0, std::abs(x), std::abs(y)});
        consider(refine([&](double hh) { return (g.f(x + hh, y) - g.f(x - hh, y)) / (2.0 * hh); }, h),
                 g.fx(x, y), "fx", x, y);
        consider(refine([&](double hh) { return (g.f(x, y + hh) - g.f(x, y - hh)) / (2.0 * hh); }, h),
                 g.fy(x, y), "fy", x, y);
        consider(refine([&](double hh) {
                     return (g.f(x + hh, y) - 2.0 * g.f(x, y) + g.f(x - hh, y)) / (hh * hh);
                 }, h),
                 g.fxx(x, y), "fxx", x, y);
        consider(refine([&](double hh) {
                     return (g.f(x, y + hh) - 2.0 * g.f(x, y) + g.f(x, y - hh)) / (hh * hh);
                 }, h),
                 g.fyy(x, y), "fyy", x, y);
        consider(refine([&](double hh) {
                     return (g.f(x + hh, y + hh) - g.f(x + hh, y - hh) - g.f(x - hh, y + hh) +
                             g.f(x - hh, y - hh)) /
                            (4.0 * hh * hh);
                 }, h),
                 g.fxy(x, y), "fxy", x, y);
    }
    return rep;
}

} // namespace socdyn
