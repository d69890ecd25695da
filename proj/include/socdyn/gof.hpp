#pragma once
// Goodness-of-fit statistics for the experiment suites: Kolmogorov-Smirnov
// distances with the small-sample-corrected asymptotic p-value, moment
// estimates with standard errors, path extrema, and the log-log slope fit
// used to quantify how fast the second coordinate tightens.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "socdyn/particle_sde.hpp"

namespace socdyn {

// Tail probability of the Kolmogorov distribution,
//   Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
// truncated once the terms fall below double resolution.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double d = 0.0;           // sup distance between the two distribution functions
    double p_value = 1.0;     // asymptotic, with the finite-sample argument correction
    double m_effective = 0.0; // sample count entering the p-value
};

namespace detail {

inline double ks_p_value(double d, double m_effective) {
    const double root = std::sqrt(m_effective);
    return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

} // namespace detail

// One-sample statistic against a continuous reference CDF.
inline KsResult ks_one_sample(std::vector<double> samples,
                              const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_one_sample needs samples");
    std::sort(samples.begin(), samples.end());
    const auto m = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        if (!std::isfinite(f) || f < -1e-12 || f > 1.0 + 1e-12)
            throw std::invalid_argument("ks_one_sample: reference CDF left [0, 1]");
        const double lo = static_cast<double>(i) / m;
        const double hi = static_cast<double>(i + 1) / m;
        d = std::max({d, f - lo, hi - f});
    }
    return {d, detail::ks_p_value(d, m), m};
}

// Two-sample statistic; the p-value uses the effective count mn/(m+n).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double inv_a = 1.0 / static_cast<double>(a.size());
    const double inv_b = 1.0 / static_cast<double>(b.size());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // Advance through ties together so the distance is evaluated only at
        // points where both empirical CDFs have finished jumping.
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) * inv_a - static_cast<double>(j) * inv_b));
    }
    const double m_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                         static_cast<double>(a.size() + b.size());
    return {d, detail::ks_p_value(d, m_eff), m_eff};
}

struct MomentEstimate {
    int order = 0;
    double value = 0.0;
    double std_error = 0.0;
};

// Sample moments E[X^p] with the standard error of the mean of X^p.
inline std::vector<MomentEstimate> empirical_moments(const std::vector<double>& samples,
                                                     const std::vector<int>& orders) {
    if (samples.size() < 2) throw std::invalid_argument("empirical_moments needs >= 2 samples");
    const auto m = static_cast<double>(samples.size());
    std::vector<MomentEstimate> out;
    out.reserve(orders.size());
    for (int p : orders) {
        if (p < 1) throw std::invalid_argument("empirical_moments needs orders >= 1");
        double mean = 0.0;
        for (double v : samples) mean += std::pow(v, p);
        mean /= m;
        double var = 0.0;
        for (double v : samples) {
            const double dev = std::pow(v, p) - mean;
            var += dev * dev;
        }
        var /= (m - 1.0);
        out.push_back({p, mean, std::sqrt(var / m)});
    }
    return out;
}

struct ExitTimeReport {
    double k = 0.0;
    std::optional<double> first_exit; // first record time with |s| >= k or |t| >= k
    double sup_abs_s = 0.0;           // over the whole recorded path
    double sup_abs_t = 0.0;
};

inline ExitTimeReport path_extrema(const RescaledPath& path, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("path_extrema needs k > 0");
    if (path.times.empty()) throw std::invalid_argument("path_extrema: empty path");
    ExitTimeReport rep;
    rep.k = k;
    for (size_t i = 0; i < path.times.size(); ++i) {
        const double s = std::abs(path.s_tilde[i]);
        const double t = std::abs(path.t_tilde[i]);
        rep.sup_abs_s = std::max(rep.sup_abs_s, s);
        rep.sup_abs_t = std::max(rep.sup_abs_t, t);
        if (!rep.first_exit && (s >= k || t >= k)) rep.first_exit = path.times[i];
    }
    return rep;
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares fit of log(value) against log(n); the decay-rate summary for
// per-size medians.  Values must be strictly positive.
inline ScalingFit collapsing_scaling(const std::vector<double>& ns,
                                     const std::vector<double>& values) {
    if (ns.size() != values.size()) throw std::invalid_argument("collapsing_scaling: ragged input");
    if (ns.size() < 3) throw std::invalid_argument("collapsing_scaling needs >= 3 sizes");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        if (!(ns[i] > 0.0) || !(values[i] > 0.0))
            throw std::invalid_argument("collapsing_scaling needs positive sizes and values");
        const double lx = std::log(ns[i]);
        const double ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const auto m = static_cast<double>(ns.size());
    ScalingFit fit;
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median_of: empty input");
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + mid);
        return 0.5 * (lo + hi);
    }
    return hi;
}

} // namespace socdyn
