#include "decoyq/decoy_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "decoyq/errors.hpp"

namespace decoyq {

void ObservedTallies::validate() const {
    if (!(pulses > 0.0)) throw domain_error("ObservedTallies.pulses must be positive");
    if (!(p0 > 0.0) || !(p > 0.0) || !(pp > 0.0)) {
        throw domain_error("ObservedTallies: selection probabilities must be positive");
    }
    if (std::abs(p0 + p + pp - 1.0) > 1e-9) {
        throw domain_error("ObservedTallies: p0 + p + pp must equal 1");
    }
    if (!(n0 >= 0.0) || !(nd >= 0.0) || !(ns >= 0.0)) {
        throw domain_error("ObservedTallies: counts must be non-negative");
    }
    if (n0 > p0 * pulses || nd > p * pulses || ns > pp * pulses) {
        throw domain_error("ObservedTallies: a source produced more counts than pulses");
    }
    if (!(t0_signal >= 0.0) || t0_signal > 0.5 || !(t0_decoy >= 0.0) || t0_decoy > 0.5) {
        throw domain_error("ObservedTallies: QBERs must lie in [0, 0.5]");
    }
}

std::pair<Interval, Interval> vacuum_count_intervals(double d0, const SourceBounds& bounds,
                                             double p, double pp) {
    if (!(d0 >= 0.0)) throw domain_error("vacuum_count_intervals: d0 must be non-negative");
    require_conditions(bounds);
    Interval n0d{p * bounds.a0_lo * d0, p * bounds.a0_hi * d0};
    Interval n0s{pp * bounds.ap0_lo * d0, pp * bounds.ap0_hi * d0};
    return {n0d, n0s};
}

Interval d0_interval(const Interval& n0, const Interval& nd,
                     const SourceBounds& bounds, double p0, double p) {
    if (!n0.valid() || !nd.valid() || n0.lo < 0.0 || nd.lo < 0.0) {
        throw domain_error("d0_interval: count intervals must be valid and non-negative");
    }
    if (!(p0 > 0.0) || !(p > 0.0)) {
        throw domain_error("d0_interval: selection probabilities must be positive");
    }
    require_conditions(bounds);

    Interval d0;
    d0.hi = n0.hi / (bounds.b0_lo * p0);
    const double leak = 1.0 - bounds.b0_lo; // upper bound on b_k, k >= 1
    if (leak <= 0.0) {
        d0.lo = n0.lo / p0; // perfect vacuum source: no photon leakage to correct for
    } else {
        const double den = bounds.a1_lo - bounds.a0_lo * leak;
        if (!(den > 0.0)) {
            throw condition_error("d0_interval: a1_lo - a0_lo*(1 - b0_lo) <= 0, "
                                  "vacuum source too noisy relative to a1_lo");
        }
        const double correction = p0 * leak / (p * bounds.a1_lo) * nd.hi;
        d0.lo = bounds.a1_lo / (p0 * den) * (n0.lo - correction);
    }
    d0.lo = std::max(0.0, d0.lo);
    if (d0.lo > d0.hi) {
        throw domain_error("d0_interval: empty interval, tallies inconsistent "
                           "with the declared source bounds");
    }
    return d0;
}

double d1_lower(double nd, double ns, double d0, const SourceBounds& bounds,
                double p, double pp) {
    if (!(nd >= 0.0) || !(ns >= 0.0) || !(d0 >= 0.0)) {
        throw domain_error("d1_lower: nd, ns and d0 must be non-negative");
    }
    if (!(p > 0.0) || !(pp > 0.0)) {
        throw domain_error("d1_lower: selection probabilities must be positive");
    }
    require_conditions(bounds);

    const double num = bounds.ap2_lo * nd / p - bounds.a2_hi * ns / pp -
                       (bounds.ap2_lo * bounds.a0_hi - bounds.a2_hi * bounds.ap0_lo) * d0;
    if (num <= 0.0) return 0.0; // a non-positive value certifies nothing; 0 always holds
    const double den = bounds.d1_denominator();
    if (!(den > 0.0)) {
        throw condition_error("d1_lower: a1_hi*ap2_lo - ap1_lo*a2_hi <= 0 "
                              "with a positive numerator; bounds too degenerate");
    }
    return num / den;
}

std::pair<double, double> delta1_asymptotic(double s0, double s, double sp,
                                            const SourceBounds& bounds) {
    if (!(s0 >= 0.0) || s0 > 1.0 || !(s >= 0.0) || s > 1.0 || !(sp >= 0.0) || sp > 1.0) {
        throw domain_error("delta1_asymptotic: counting rates must lie in [0, 1]");
    }
    require_conditions(bounds);

    // D0 fixed at its upper bound S0/b0_lo (in per-pulse units).
    const double num = bounds.ap2_lo * s - bounds.a2_hi * sp -
                       (bounds.ap2_lo * bounds.a0_hi - bounds.a2_hi * bounds.ap0_lo) *
                           s0 / bounds.b0_lo;
    if (num <= 0.0) return {0.0, 0.0};
    const double den = bounds.d1_denominator();
    if (!(den > 0.0)) {
        throw condition_error("delta1_asymptotic: a1_hi*ap2_lo - ap1_lo*a2_hi <= 0 "
                              "with a positive numerator; bounds too degenerate");
    }
    const double s1 = num / den;
    auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const double delta1_decoy = s > 0.0 ? clamp01(bounds.a1_lo * s1 / s) : 0.0;
    const double delta1_signal = sp > 0.0 ? clamp01(bounds.ap1_lo * s1 / sp) : 0.0;
    return {delta1_decoy, delta1_signal};
}

ExpectationIntervals expectation_intervals(const ObservedTallies& tallies,
                                           const SourceBounds& bounds,
                                           double sigma_mult) {
    tallies.validate();
    if (!(sigma_mult >= 0.0)) {
        throw domain_error("expectation_intervals: sigma_mult must be non-negative");
    }

    const double r0 = sigma_mult * std::sqrt(tallies.n0);
    const double rd = sigma_mult * std::sqrt(tallies.nd);

    ExpectationIntervals out;
    out.sigma_mult = sigma_mult;
    out.n0 = {std::max(0.0, tallies.n0 - r0), tallies.n0 + r0};
    out.nd = {std::max(0.0, tallies.nd - rd), tallies.nd + rd};
    // The total count is an identity, so the signal fluctuation is the
    // mirrored sum of the other two rather than an independent sqrt(Ns).
    out.ns = {std::max(0.0, tallies.ns - (rd + r0)), tallies.ns + (rd + r0)};
    out.d0 = d0_interval(out.n0, out.nd, bounds, tallies.p0, tallies.p);
    return out;
}

FractionBound delta1_nonasymptotic(const ObservedTallies& tallies,
                                   const SourceBounds& bounds,
                                   double sigma_mult, double d0) {
    const ExpectationIntervals ivs = expectation_intervals(tallies, bounds, sigma_mult);
    const double slack = 1e-9 * std::max(1.0, ivs.d0.hi);
    if (d0 < ivs.d0.lo - slack || d0 > ivs.d0.hi + slack) {
        std::ostringstream os;
        os << "delta1_nonasymptotic: d0 = " << d0 << " outside its certified interval ["
           << ivs.d0.lo << ", " << ivs.d0.hi << "]";
        throw domain_error(os.str());
    }

    FractionBound fb;
    fb.d0_used = d0;
    // Worst-case corner: the fewest decoy counts, the most signal counts.
    fb.d1_lo = d1_lower(ivs.nd.lo, ivs.ns.hi, d0, bounds, tallies.p, tallies.pp);

    auto observed_floor = [sigma_mult](double expect) {
        return std::max(0.0, expect - sigma_mult * std::sqrt(expect));
    };
    fb.n1s_expect_lo = tallies.pp * bounds.ap1_lo * fb.d1_lo;
    fb.n1s_obs_lo = observed_floor(fb.n1s_expect_lo);
    fb.n1d_expect_lo = tallies.p * bounds.a1_lo * fb.d1_lo;
    fb.n1d_obs_lo = observed_floor(fb.n1d_expect_lo);
    fb.delta1_signal_lo =
        tallies.ns > 0.0 ? std::min(1.0, fb.n1s_obs_lo / tallies.ns) : 0.0;
    fb.delta1_decoy_lo =
        tallies.nd > 0.0 ? std::min(1.0, fb.n1d_obs_lo / tallies.nd) : 0.0;
    return fb;
}

} // namespace decoyq
