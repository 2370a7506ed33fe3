#include "reach/interval.hpp"

#include <algorithm>
#include <cfloat>
#include <limits>

namespace reach {

namespace {

double step_down(double v, int k) {
    for (int i = 0; i < k; ++i) v = std::nextafter(v, -std::numeric_limits<double>::infinity());
    return std::fmax(v, -DBL_MAX);
}

double step_up(double v, int k) {
    for (int i = 0; i < k; ++i) v = std::nextafter(v, std::numeric_limits<double>::infinity());
    return std::fmin(v, DBL_MAX);
}

// Outward widening applied after every inexact operation. Operations whose
// floating-point result is provably exact (TwoSum residual or FMA residual
// equal to zero) are not widened; degenerate zero intervals must stay
// degenerate or gain bounds that are structurally zero would start to grow.
constexpr int kUlps = 4;

bool sum_exact(double x, double y, double s) {
    if (!std::isfinite(s)) return false;
    const double bv = s - x;
    const double err = (x - (s - bv)) + (y - bv);
    return err == 0.0;
}

bool mul_exact(double x, double y, double p) {
    return std::isfinite(p) && std::fma(x, y, -p) == 0.0;
}

bool div_exact(double x, double y, double q) {
    return std::isfinite(q) && std::fma(q, y, -x) == 0.0;
}

Interval outward(double lo, double hi, bool lo_exact = false, bool hi_exact = false) {
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw DomainError("interval operation overflowed");
    return Interval(lo_exact ? lo : step_down(lo, kUlps), hi_exact ? hi : step_up(hi, kUlps));
}

}  // namespace

Interval widen_ulps(const Interval& x, int k) {
    return Interval(step_down(x.lo, k), step_up(x.hi, k));
}

Interval operator+(const Interval& a, const Interval& b) {
    const double lo = a.lo + b.lo;
    const double hi = a.hi + b.hi;
    return outward(lo, hi, sum_exact(a.lo, b.lo, lo), sum_exact(a.hi, b.hi, hi));
}

Interval operator-(const Interval& a, const Interval& b) {
    const double lo = a.lo - b.hi;
    const double hi = a.hi - b.lo;
    return outward(lo, hi, sum_exact(a.lo, -b.hi, lo), sum_exact(a.hi, -b.lo, hi));
}

Interval operator-(const Interval& a) {
    // Negation is exact.
    return Interval(-a.hi, -a.lo);
}

namespace {
struct Candidate {
    double value;
    bool exact;
};
}  // namespace

Interval operator*(const Interval& a, const Interval& b) {
    const Candidate p[4] = {
        {a.lo * b.lo, mul_exact(a.lo, b.lo, a.lo * b.lo)},
        {a.lo * b.hi, mul_exact(a.lo, b.hi, a.lo * b.hi)},
        {a.hi * b.lo, mul_exact(a.hi, b.lo, a.hi * b.lo)},
        {a.hi * b.hi, mul_exact(a.hi, b.hi, a.hi * b.hi)},
    };
    int lo = 0, hi = 0;
    for (int i = 1; i < 4; ++i) {
        if (p[i].value < p[lo].value) lo = i;
        if (p[i].value > p[hi].value) hi = i;
    }
    return outward(p[lo].value, p[hi].value, p[lo].exact, p[hi].exact);
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0))
        throw DomainError("interval division by an interval containing zero");
    const Candidate p[4] = {
        {a.lo / b.lo, div_exact(a.lo, b.lo, a.lo / b.lo)},
        {a.lo / b.hi, div_exact(a.lo, b.hi, a.lo / b.hi)},
        {a.hi / b.lo, div_exact(a.hi, b.lo, a.hi / b.lo)},
        {a.hi / b.hi, div_exact(a.hi, b.hi, a.hi / b.hi)},
    };
    int lo = 0, hi = 0;
    for (int i = 1; i < 4; ++i) {
        if (p[i].value < p[lo].value) lo = i;
        if (p[i].value > p[hi].value) hi = i;
    }
    return outward(p[lo].value, p[hi].value, p[lo].exact, p[hi].exact);
}

Interval int_pow(const Interval& x, long long n) {
    if (n == 0) return Interval::point(1.0);
    if (n < 0) {
        if (x.contains(0.0))
            throw DomainError("negative power of an interval containing zero");
        return Interval::point(1.0) / int_pow(x, -n);
    }
    if (n == 1) return x;
    if (x.lo == 0.0 && x.hi == 0.0) return Interval::point(0.0);
    const double pl = std::pow(x.lo, static_cast<double>(n));
    const double ph = std::pow(x.hi, static_cast<double>(n));
    if (n % 2 == 1) return outward(pl, ph);
    // Even power: monotone on each side of zero, clamp at 0 when straddling.
    if (x.lo >= 0.0) return outward(pl, ph);
    if (x.hi <= 0.0) return outward(ph, pl);
    return Interval(0.0, outward(0.0, std::max(pl, ph)).hi);
}

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 0.5 * kPi;
}  // namespace

Interval iv_sin(const Interval& x) {
    if (x.width() >= 2.0 * kPi) return Interval(-1.0, 1.0);
    double lo = std::min(std::sin(x.lo), std::sin(x.hi));
    double hi = std::max(std::sin(x.lo), std::sin(x.hi));
    // Peaks of sin at pi/2 + 2k*pi, troughs at -pi/2 + 2k*pi.
    const long long k_hi_first = static_cast<long long>(std::ceil((x.lo - kHalfPi) / (2.0 * kPi)));
    if (kHalfPi + 2.0 * kPi * static_cast<double>(k_hi_first) <= x.hi) hi = 1.0;
    const long long k_lo_first = static_cast<long long>(std::ceil((x.lo + kHalfPi) / (2.0 * kPi)));
    if (-kHalfPi + 2.0 * kPi * static_cast<double>(k_lo_first) <= x.hi) lo = -1.0;
    Interval r = outward(lo, hi);
    return Interval(std::fmax(r.lo, -1.0), std::fmin(r.hi, 1.0));
}

Interval iv_cos(const Interval& x) {
    if (x.width() >= 2.0 * kPi) return Interval(-1.0, 1.0);
    double lo = std::min(std::cos(x.lo), std::cos(x.hi));
    double hi = std::max(std::cos(x.lo), std::cos(x.hi));
    const long long k_hi_first = static_cast<long long>(std::ceil(x.lo / (2.0 * kPi)));
    if (2.0 * kPi * static_cast<double>(k_hi_first) <= x.hi) hi = 1.0;
    const long long k_lo_first = static_cast<long long>(std::ceil((x.lo - kPi) / (2.0 * kPi)));
    if (kPi + 2.0 * kPi * static_cast<double>(k_lo_first) <= x.hi) lo = -1.0;
    Interval r = outward(lo, hi);
    return Interval(std::fmax(r.lo, -1.0), std::fmin(r.hi, 1.0));
}

Interval iv_tan(const Interval& x) {
    // Reject intervals that may contain a pole. The conservative pole test
    // widens by one representable step around (k + 1/2)*pi.
    const long long k = static_cast<long long>(std::ceil((x.lo - kHalfPi) / kPi));
    const double pole = kHalfPi + kPi * static_cast<double>(k);
    if (pole <= x.hi + 1e-12 && pole >= x.lo - 1e-12)
        throw DomainError("tan over an interval containing a pole");
    return outward(std::tan(x.lo), std::tan(x.hi));
}

Interval iv_exp(const Interval& x) { return outward(std::exp(x.lo), std::exp(x.hi)); }

Interval iv_log(const Interval& x) {
    if (x.lo <= 0.0) throw DomainError("log over an interval containing non-positive values");
    return outward(std::log(x.lo), std::log(x.hi));
}

Interval iv_sqrt(const Interval& x) {
    if (x.lo < 0.0) throw DomainError("sqrt over an interval containing negative values");
    const double lo = std::sqrt(x.lo);
    const double hi = std::sqrt(x.hi);
    Interval r = outward(lo, hi);
    return Interval(std::fmax(r.lo, 0.0), r.hi);
}

Interval iv_abs(const Interval& x) {
    if (x.lo >= 0.0) return x;
    if (x.hi <= 0.0) return Interval(-x.hi, -x.lo);
    return Interval(0.0, x.max_abs());
}

Interval iv_tanh(const Interval& x) {
    Interval r = outward(std::tanh(x.lo), std::tanh(x.hi));
    return Interval(std::fmax(r.lo, -1.0), std::fmin(r.hi, 1.0));
}

Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::fmin(a.lo, b.lo), std::fmax(a.hi, b.hi));
}

Interval intersect(const Interval& a, const Interval& b) {
    const double lo = std::fmax(a.lo, b.lo);
    const double hi = std::fmin(a.hi, b.hi);
    if (lo > hi) throw DomainError("empty interval intersection");
    return Interval(lo, hi);
}

}  // namespace reach
