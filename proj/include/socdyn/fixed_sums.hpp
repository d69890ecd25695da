#pragma once
// Order-independent accumulators for the pair (sum x_j, sum x_j^2).
//
// Coordinates are quantized to 2^-40 and summed in __int128, which makes the
// accumulation associative: S and T come out bit-identical under particle
// relabeling, and exactly negate/stay fixed under a global sign flip.  The
// quantization error (<= 2^-40 per term) sits far below the 1e-9 * n relative
// tolerance budgeted for the cached sums, and incremental updates agree with
// a from-scratch recomputation exactly, in integer arithmetic.
//
// Validity needs |x| < 2^20 so x^2 * 2^40 < 2^120 fits an __int128 term; the
// integrators enforce that bound as part of their blow-up guard.

#include <cmath>
#include <cstdlib>
#include <vector>

namespace socdyn {

using int128 = __int128;

inline constexpr double kFixedScale = 1099511627776.0; // 2^40
inline constexpr double kFixedCoordLimit = 1048576.0;  // 2^20

// Truncation toward zero is sign-symmetric: quantize(-v) == -quantize(v).
inline int128 quantize40(double v) {
    return static_cast<int128>(v * kFixedScale);
}

struct PairSums {
    int128 s_fix = 0;
    int128 t_fix = 0;

    void add(double x) {
        s_fix += quantize40(x);
        t_fix += quantize40(x * x);
    }
    void remove(double x) {
        s_fix -= quantize40(x);
        t_fix -= quantize40(x * x);
    }
    void replace(double old_x, double new_x) {
        remove(old_x);
        add(new_x);
    }

    double s() const { return static_cast<double>(s_fix) / kFixedScale; }
    double t() const { return static_cast<double>(t_fix) / kFixedScale; }

    bool operator==(const PairSums& o) const {
        return s_fix == o.s_fix && t_fix == o.t_fix;
    }

    static PairSums of(const std::vector<double>& x) {
        PairSums p;
        for (double v : x) p.add(v);
        return p;
    }
};

} // namespace socdyn
