#pragma once
// Single-particle potential phi with its derivative and a confinement
// constant C satisfying x*phi'(x) <= C(1+x^2).  The quadratic well
// phi(x) = -x^2/(4 sigma^2) is the reference model; custom potentials are
// accepted if they pass validate_phi's probes (evenness, confinement, and an
// integrability spot check of exp(2 phi)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "socdyn/errors.hpp"

namespace socdyn {

struct PhiModel {
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    double confinement_c = 1.0;
    bool is_gaussian = false;
    double sigma_sq = 0.0; // set when is_gaussian

    static PhiModel gaussian(double sigma_sq) {
        if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
            throw model_error("gaussian potential needs sigma_sq > 0");
        PhiModel m;
        m.phi = [sigma_sq](double x) { return -x * x / (4.0 * sigma_sq); };
        m.phi_prime = [sigma_sq](double x) { return -x / (2.0 * sigma_sq); };
        // x*phi' = -x^2/(2 sigma^2) <= 0, so any positive C works; this one
        // keeps the confinement bound on the potential's own scale.
        m.confinement_c = 1.0 / (2.0 * sigma_sq);
        m.is_gaussian = true;
        m.sigma_sq = sigma_sq;
        return m;
    }

    static PhiModel custom(std::function<double(double)> phi,
                           std::function<double(double)> phi_prime,
                           double confinement_c) {
        PhiModel m;
        m.phi = std::move(phi);
        m.phi_prime = std::move(phi_prime);
        m.confinement_c = confinement_c;
        return m;
    }
};

struct ValidationReport {
    bool pass = true;
    std::string first_violation;
};

// Probes the potential on the given abscissas.  Soft failures (evenness,
// confinement, integrability) come back in the report; a non-finite phi or
// phi' value means the object is unusable and throws.
inline ValidationReport validate_phi(const PhiModel& model, std::vector<double> grid) {
    if (grid.empty()) throw std::invalid_argument("validate_phi: empty grid");

    auto fail = [](const std::string& msg) {
        ValidationReport r;
        r.pass = false;
        r.first_violation = msg;
        return r;
    };
    auto eval = [&](double x) {
        const double v = model.phi(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "phi(" << x << ") is not finite";
            throw model_error(os.str());
        }
        return v;
    };

    std::sort(grid.begin(), grid.end());

    for (double x : grid) {
        const double v = eval(x);
        const double w = eval(-x);
        if (std::abs(v - w) > 1e-12 * std::max(1.0, std::abs(v)))
            return fail("phi is not even at x = " + std::to_string(x));
    }

    for (double x : grid) {
        const double d = model.phi_prime(x);
        if (!std::isfinite(d)) {
            std::ostringstream os;
            os << "phi'(" << x << ") is not finite";
            throw model_error(os.str());
        }
        const double lhs = x * d;
        const double rhs = model.confinement_c * (1.0 + x * x);
        if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs)))
            return fail("confinement bound x*phi'(x) <= C(1+x^2) violated at x = " +
                        std::to_string(x));
    }

    // Integrability spot check for exp(2 phi) on the grid's hull.  A finite
    // trapezoid estimate is necessary but not sufficient, so additionally the
    // outermost cells must carry a negligible share of the mass; a growing
    // potential concentrates the estimate at the hull boundary and fails here.
    if (grid.size() >= 3) {
        double total = 0.0, boundary = 0.0;
        for (size_t i = 0; i + 1 < grid.size(); ++i) {
            const double cell = 0.5 * (std::exp(2.0 * eval(grid[i])) +
                                       std::exp(2.0 * eval(grid[i + 1]))) *
                                (grid[i + 1] - grid[i]);
            total += cell;
            if (i == 0 || i + 2 == grid.size()) boundary += cell;
        }
        if (!std::isfinite(total))
            return fail("trapezoid estimate of integral exp(2 phi) overflows");
        if (total > 0.0 && boundary > 1e-3 * total)
            return fail("integral of exp(2 phi) does not settle inside the grid hull "
                        "(boundary cells carry " +
                        std::to_string(boundary / total) + " of the mass)");
    }

    return ValidationReport{};
}

} // namespace socdyn
