#pragma once

#include <optional>
#include <string>

namespace decoyq {

// Intensity range of a phase-randomized weak coherent source. A zero-width
// interval is a perfectly stable source.
struct IntensityInterval {
    double mu_lo = 0.0;
    double mu_hi = 0.0;

    void validate() const; // throws domain_error on 0 <= mu_lo <= mu_hi violation
    double width() const { return mu_hi - mu_lo; }

    static IntensityInterval exact(double mu) { return {mu, mu}; }
    // [mu*(1-delta), mu*(1+delta)]
    static IntensityInterval relative(double mu, double delta);
};

// Bounds on the photon-number coefficients of the three sources, k = 0..2.
// a*: decoy source, ap*: signal source, b0_lo: vacuum-source vacuum
// coefficient. Coefficients for k > 2 never enter the formulas individually;
// they are controlled through the two ratio-chain conditions certified by
// the tail growth ratios below.
struct SourceBounds {
    double a0_lo = 0.0, a0_hi = 0.0;
    double a1_lo = 0.0, a1_hi = 0.0;
    double a2_lo = 0.0, a2_hi = 0.0;
    double ap0_lo = 0.0, ap0_hi = 0.0;
    double ap1_lo = 0.0, ap1_hi = 0.0;
    double ap2_lo = 0.0, ap2_hi = 0.0;
    double b0_lo = 1.0;

    // Per-k growth factor of the ratio sequences a_k^L/b_k^U and
    // a_k'^L/a_k^U. A factor >= 1 makes the sequence non-decreasing in k,
    // which certifies the corresponding condition for every k beyond the
    // explicitly bounded ones. Filled automatically for coherent sources;
    // must be supplied by the user for anything else.
    std::optional<double> tail_ratio_decoy;
    std::optional<double> tail_ratio_signal;

    // Range/order checks only; the two denominator conditions are enforced
    // by the operations that divide by them.
    void validate() const;

    double d0_lower_denominator() const { return a1_lo - a0_lo * (1.0 - b0_lo); }
    double d1_denominator() const { return a1_hi * ap2_lo - ap1_lo * a2_hi; }

    // True when every coefficient interval of `inner` lies inside the
    // corresponding interval of *this (and b0_lo is at least as loose).
    bool contains(const SourceBounds& inner) const;
};

// Coefficient bounds of three coherent sources with bounded intensities.
// Requires decoy.mu_hi < 1 and signal.mu_hi < 1 so that mu^k e^-mu is
// increasing on both intervals for k = 1, 2 and the endpoint formulas are
// the true extrema. Cross-source interval overlap is not an error here; it
// surfaces as a failing condition report.
SourceBounds coherent_bounds(const IntensityInterval& decoy,
                             const IntensityInterval& signal,
                             const IntensityInterval& vacuum);

enum class ConditionStatus { Pass, Fail, Unverified };

const char* to_string(ConditionStatus s);

// Admissibility report for the two ratio-chain conditions. Downstream bound
// operations refuse to run unless both are Pass.
struct ConditionReport {
    ConditionStatus vacuum_ratio = ConditionStatus::Unverified;       // a_k^L/b_k^U chain
    ConditionStatus signal_decoy_ratio = ConditionStatus::Unverified; // a_k'^L/a_k^U chain
    std::string diagnostic;

    bool ok() const {
        return vacuum_ratio == ConditionStatus::Pass &&
               signal_decoy_ratio == ConditionStatus::Pass;
    }
};

// Never throws; always returns a report.
ConditionReport validate_conditions(const SourceBounds& bounds);

// Throws condition_error unless validate_conditions(bounds).ok().
void require_conditions(const SourceBounds& bounds);

} // namespace decoyq
