#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbmx {

// Closed interval [lo, hi]. Used for certified enclosures of probabilities
// and path values. Arithmetic here is plain double; the enclosure guarantees
// are modulo machine rounding (series truncation is the controlled error).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(a), hi(b) {}
    static Interval point(double x) { return {x, x}; }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool valid() const { return lo <= hi; }

    Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
    Interval operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }
    Interval operator+(double c) const { return {lo + c, hi + c}; }
    Interval operator-(double c) const { return {lo - c, hi - c}; }

    // Product of nonnegative intervals.
    Interval mul_nonneg(const Interval& o) const { return {lo * o.lo, hi * o.hi}; }

    Interval clamp(double a, double b) const {
        return {std::min(std::max(lo, a), b), std::min(std::max(hi, a), b)};
    }

    Interval hull(const Interval& o) const {
        return {std::min(lo, o.lo), std::max(hi, o.hi)};
    }
};

// Ratio p = num/den for nonnegative num <= den, den.lo > 0 required for a
// finite bracket; callers tighten the inputs until that holds.
inline Interval ratio_prob(const Interval& num, const Interval& den) {
    if (den.lo <= 0.0) return {0.0, 1.0};
    double lo = num.lo <= 0.0 ? 0.0 : num.lo / den.hi;
    double hi = num.hi / den.lo;
    return {std::max(0.0, lo), std::min(1.0, hi)};
}

} // namespace rbmx
