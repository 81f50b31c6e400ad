#pragma once

namespace decoyq {

// Closed interval [lo, hi] on the real line.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool valid() const { return lo <= hi; }
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

    static Interval point(double x) { return {x, x}; }
};

} // namespace decoyq
