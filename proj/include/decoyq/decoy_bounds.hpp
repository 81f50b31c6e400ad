#pragma once

#include <utility>

#include "decoyq/interval.hpp"
#include "decoyq/source_model.hpp"

namespace decoyq {

// Directly observed quantities of one 3-intensity run. Counts are stored as
// doubles (they can be large) but represent non-negative integers.
struct ObservedTallies {
    double pulses = 0.0; // M, total pulses sent
    double p0 = 0.0;     // vacuum-source selection probability
    double p = 0.0;      // decoy-source selection probability
    double pp = 0.0;     // signal-source selection probability
    double n0 = 0.0;     // counts caused by the vacuum source
    double nd = 0.0;     // counts caused by the decoy source
    double ns = 0.0;     // counts caused by the signal source
    double t0_signal = 0.0; // observed QBER over signal counts
    double t0_decoy = 0.0;  // observed QBER over decoy counts

    void validate() const;

    double rate_vacuum() const { return n0 / (p0 * pulses); } // S0
    double rate_decoy() const { return nd / (p * pulses); }   // S
    double rate_signal() const { return ns / (pp * pulses); } // S'
};

// Confidence intervals for the expected counts and the derived interval for
// the vacuum-count population D0. The signal interval uses the population
// identity (the total count is fixed; only its split fluctuates) instead of
// an independent sqrt(Ns) radius.
struct ExpectationIntervals {
    Interval n0;
    Interval nd;
    Interval ns;
    Interval d0;
    double sigma_mult = 0.0;
};

// Lower bound on the single-photon count fraction, evaluated at one D0.
struct FractionBound {
    double d1_lo = 0.0;            // certified lower bound on D1
    double n1s_expect_lo = 0.0;    // expected single-photon signal counts, lower bound
    double n1s_obs_lo = 0.0;       // observed-value bound after the sigma subtraction
    double n1d_expect_lo = 0.0;    // decoy-source analogues
    double n1d_obs_lo = 0.0;
    double delta1_signal_lo = 0.0; // fraction of signal counts from single photons
    double delta1_decoy_lo = 0.0;
    double d0_used = 0.0;
};

// Expected number of counts caused by zero-photon pulses of the decoy and
// signal sources, bounded through the vacuum-count population d0:
// ([p*a0_lo*d0, p*a0_hi*d0], [pp*ap0_lo*d0, pp*ap0_hi*d0]).
std::pair<Interval, Interval> vacuum_count_intervals(double d0, const SourceBounds& bounds,
                                                     double p, double pp);

// Two-sided bound on D0 from the vacuum and decoy count intervals.
Interval d0_interval(const Interval& n0, const Interval& nd,
                     const SourceBounds& bounds, double p0, double p);

// Lower bound on D1 given expected decoy/signal counts and a D0 value.
// Clamped at 0; never negative.
double d1_lower(double nd, double ns, double d0, const SourceBounds& bounds,
                double p, double pp);

// Asymptotic single-photon count fractions (decoy, signal) from counting
// rates, with D0 fixed at its upper bound S0/b0_lo. Both clamped to [0, 1].
std::pair<double, double> delta1_asymptotic(double s0, double s, double sp,
                                            const SourceBounds& bounds);

// sigma_mult standard-deviation confidence intervals around the observed
// counts, plus the induced D0 interval. sigma_mult = 0 reproduces the
// asymptotic limit exactly.
ExpectationIntervals expectation_intervals(const ObservedTallies& tallies,
                                           const SourceBounds& bounds,
                                           double sigma_mult);

// Non-asymptotic fraction bound at a given D0, which must lie inside the
// certified D0 interval. Uses the worst-case corner of the count intervals
// (smallest decoy, largest signal expectation).
FractionBound delta1_nonasymptotic(const ObservedTallies& tallies,
                                   const SourceBounds& bounds,
                                   double sigma_mult, double d0);

} // namespace decoyq
