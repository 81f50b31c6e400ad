#include "decoyq/source_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "decoyq/errors.hpp"

namespace decoyq {

void IntensityInterval::validate() const {
    if (!(mu_lo >= 0.0) || !(mu_hi >= mu_lo)) {
        std::ostringstream os;
        os << "invalid intensity interval [" << mu_lo << ", " << mu_hi
           << "]: need 0 <= mu_lo <= mu_hi";
        throw domain_error(os.str());
    }
}

IntensityInterval IntensityInterval::relative(double mu, double delta) {
    if (!(mu >= 0.0) || !(delta >= 0.0) || delta > 1.0) {
        throw domain_error("IntensityInterval::relative: need mu >= 0 and delta in [0, 1]");
    }
    return {mu * (1.0 - delta), mu * (1.0 + delta)};
}

namespace {

void check_prob_pair(double lo, double hi, const char* name) {
    if (!(lo >= 0.0) || !(hi <= 1.0) || !(lo <= hi)) {
        std::ostringstream os;
        os << "SourceBounds." << name << ": need 0 <= lo <= hi <= 1, got ["
           << lo << ", " << hi << "]";
        throw domain_error(os.str());
    }
}

} // namespace

void SourceBounds::validate() const {
    check_prob_pair(a0_lo, a0_hi, "a0");
    check_prob_pair(a1_lo, a1_hi, "a1");
    check_prob_pair(a2_lo, a2_hi, "a2");
    check_prob_pair(ap0_lo, ap0_hi, "ap0");
    check_prob_pair(ap1_lo, ap1_hi, "ap1");
    check_prob_pair(ap2_lo, ap2_hi, "ap2");
    if (!(b0_lo > 0.0) || !(b0_lo <= 1.0)) {
        throw domain_error("SourceBounds.b0_lo: need 0 < b0_lo <= 1");
    }
    if (tail_ratio_decoy && !(*tail_ratio_decoy >= 0.0)) {
        throw domain_error("SourceBounds.tail_ratio_decoy: must be non-negative");
    }
    if (tail_ratio_signal && !(*tail_ratio_signal >= 0.0)) {
        throw domain_error("SourceBounds.tail_ratio_signal: must be non-negative");
    }
}

bool SourceBounds::contains(const SourceBounds& inner) const {
    return a0_lo <= inner.a0_lo && inner.a0_hi <= a0_hi &&
           a1_lo <= inner.a1_lo && inner.a1_hi <= a1_hi &&
           a2_lo <= inner.a2_lo && inner.a2_hi <= a2_hi &&
           ap0_lo <= inner.ap0_lo && inner.ap0_hi <= ap0_hi &&
           ap1_lo <= inner.ap1_lo && inner.ap1_hi <= ap1_hi &&
           ap2_lo <= inner.ap2_lo && inner.ap2_hi <= ap2_hi &&
           b0_lo <= inner.b0_lo;
}

SourceBounds coherent_bounds(const IntensityInterval& decoy,
                             const IntensityInterval& signal,
                             const IntensityInterval& vacuum) {
    decoy.validate();
    signal.validate();
    vacuum.validate();
    if (!(decoy.mu_lo > 0.0) || !(signal.mu_lo > 0.0)) {
        throw domain_error("coherent_bounds: decoy and signal intensities must be positive");
    }
    // mu^k e^-mu is increasing in mu only while mu < k; beyond 1 the endpoint
    // formulas stop bounding the k = 1 extremum.
    if (!(decoy.mu_hi < 1.0) || !(signal.mu_hi < 1.0)) {
        throw domain_error("coherent_bounds: intensities must stay below 1 "
                           "(endpoint formulas require mu^k e^-mu monotone for k = 1, 2)");
    }

    auto poisson = [](double mu, int k) {
        double v = std::exp(-mu);
        for (int i = 1; i <= k; ++i) v *= mu / static_cast<double>(i);
        return v;
    };

    SourceBounds b;
    b.a0_lo = std::exp(-decoy.mu_hi);
    b.a0_hi = std::exp(-decoy.mu_lo);
    b.a1_lo = poisson(decoy.mu_lo, 1);
    b.a1_hi = poisson(decoy.mu_hi, 1);
    b.a2_lo = poisson(decoy.mu_lo, 2);
    b.a2_hi = poisson(decoy.mu_hi, 2);
    b.ap0_lo = std::exp(-signal.mu_hi);
    b.ap0_hi = std::exp(-signal.mu_lo);
    b.ap1_lo = poisson(signal.mu_lo, 1);
    b.ap1_hi = poisson(signal.mu_hi, 1);
    b.ap2_lo = poisson(signal.mu_lo, 2);
    b.ap2_hi = poisson(signal.mu_hi, 2);
    b.b0_lo = std::exp(-vacuum.mu_hi);

    // a_k'^L/a_k^U = (mu'_lo/mu_hi)^k e^(mu_hi - mu'_lo): geometric in k.
    b.tail_ratio_signal = signal.mu_lo / decoy.mu_hi;
    // a_k^L/b_k^U = (mu_lo/mu0_hi)^k e^(mu0_hi - mu_lo); an exactly-vacuum
    // source emits no photons at all, which certifies the chain outright.
    if (vacuum.mu_hi == 0.0) {
        b.tail_ratio_decoy = std::numeric_limits<double>::infinity();
    } else {
        b.tail_ratio_decoy = decoy.mu_lo / vacuum.mu_hi;
    }
    return b;
}

const char* to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::Pass: return "PASS";
        case ConditionStatus::Fail: return "FAIL";
        case ConditionStatus::Unverified: return "UNVERIFIED";
    }
    return "?";
}

ConditionReport validate_conditions(const SourceBounds& bounds) {
    ConditionReport report;
    std::ostringstream diag;

    // Condition (i): a_k^L/b_k^U must never drop below its k = 1 value, so
    // that the vacuum-source photon leakage can be charged to the decoy
    // pool. A non-decreasing ratio sequence suffices; b_1^U <= 1 - b0_lo
    // settles the base case.
    if (bounds.b0_lo >= 1.0) {
        report.vacuum_ratio = ConditionStatus::Pass; // vacuum source emits no photons
    } else if (bounds.tail_ratio_decoy) {
        if (*bounds.tail_ratio_decoy >= 1.0) {
            report.vacuum_ratio = ConditionStatus::Pass;
        } else {
            report.vacuum_ratio = ConditionStatus::Fail;
            diag << "vacuum/decoy ratio chain decreasing (growth "
                 << *bounds.tail_ratio_decoy
                 << " < 1): vacuum intensity range overlaps the decoy range; ";
        }
    } else {
        report.vacuum_ratio = ConditionStatus::Unverified;
        diag << "vacuum/decoy ratio chain unverified: supply tail_ratio_decoy "
                "for non-coherent bounds; ";
    }

    // Condition (ii): a_k'^L/a_k^U non-decreasing from k = 1 on. The k = 1
    // vs k = 2 step is checkable from the explicit bounds; the k > 2 tail
    // needs the growth ratio.
    const bool explicit_ok =
        bounds.ap2_lo * bounds.a1_hi >= bounds.ap1_lo * bounds.a2_hi;
    const bool tail_fail =
        bounds.tail_ratio_signal && *bounds.tail_ratio_signal < 1.0;
    if (!explicit_ok || tail_fail) {
        report.signal_decoy_ratio = ConditionStatus::Fail;
        if (!explicit_ok) {
            diag << "signal/decoy ratio chain fails at k = 2: "
                    "ap2_lo*a1_hi < ap1_lo*a2_hi; ";
        }
        if (tail_fail) {
            diag << "signal/decoy ratio chain decreasing (growth "
                 << *bounds.tail_ratio_signal
                 << " < 1): signal intensity range overlaps the decoy range; ";
        }
    } else if (!bounds.tail_ratio_signal) {
        report.signal_decoy_ratio = ConditionStatus::Unverified;
        diag << "signal/decoy tail (k > 2) unverified: supply tail_ratio_signal "
                "for non-coherent bounds; ";
    } else {
        report.signal_decoy_ratio = ConditionStatus::Pass;
    }

    report.diagnostic = diag.str();
    return report;
}

void require_conditions(const SourceBounds& bounds) {
    bounds.validate();
    const ConditionReport report = validate_conditions(bounds);
    if (!report.ok()) {
        throw condition_error("admissibility conditions not satisfied: " + report.diagnostic);
    }
}

} // namespace decoyq
