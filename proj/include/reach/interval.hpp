#pragma once

#include <cmath>
#include <string>

#include "reach/errors.hpp"

namespace reach {

/// Closed interval [lo, hi] with finite endpoints.
///
/// Arithmetic is outward-rounded: every operation widens its result by
/// 4 ulp on each side, which dominates the rounding error of the basic
/// operations and of the libm functions used here. Exact construction
/// (literals, variable reads) is not widened.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(std::isfinite(lo) && std::isfinite(hi)))
            throw DomainError("interval endpoints must be finite");
        if (lo > hi)
            throw DomainError("interval endpoints out of order: [" + std::to_string(lo_) + ", " +
                              std::to_string(hi_) + "]");
    }

    static Interval point(double v) { return Interval(v, v); }

    double mid() const { return 0.5 * (lo + hi); }
    double rad() const { return 0.5 * (hi - lo); }
    double width() const { return hi - lo; }

    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool is_point() const { return lo == hi; }

    /// Largest absolute value attained on the interval.
    double max_abs() const { return std::fmax(std::fabs(lo), std::fabs(hi)); }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

/// x^n for integer n. Even exponents clamp the lower bound at 0 when the
/// interval straddles zero. Negative exponents require 0 outside the interval.
Interval int_pow(const Interval& x, long long n);

Interval iv_sin(const Interval& x);
Interval iv_cos(const Interval& x);
Interval iv_tan(const Interval& x);
Interval iv_exp(const Interval& x);
Interval iv_log(const Interval& x);
Interval iv_sqrt(const Interval& x);
Interval iv_abs(const Interval& x);
Interval iv_tanh(const Interval& x);

/// Smallest interval containing both arguments.
Interval hull(const Interval& a, const Interval& b);

/// Intersection; throws DomainError when empty.
Interval intersect(const Interval& a, const Interval& b);

/// Widen by k ulps on each side (saturates at the largest finite double).
Interval widen_ulps(const Interval& x, int k);

}  // namespace reach
