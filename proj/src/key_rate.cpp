#include "decoyq/key_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "decoyq/errors.hpp"

namespace decoyq {

double binary_entropy(double t) {
    if (!(t >= 0.0) || t > 1.0) {
        throw domain_error("binary_entropy: argument must lie in [0, 1]");
    }
    if (t == 0.0 || t == 1.0) return 0.0;
    return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

double t1_estimate(double t0, double d0, double delta1, double n1s_obs_lo,
                   const SourceBounds& bounds, double pp, double ns,
                   const T1Options& opts) {
    if (!(t0 >= 0.0) || t0 > 0.5) throw domain_error("t1_estimate: t0 must lie in [0, 0.5]");
    if (!(d0 >= 0.0)) throw domain_error("t1_estimate: d0 must be non-negative");
    if (!(ns > 0.0)) throw domain_error("t1_estimate: ns must be positive");
    if (!(delta1 > 0.0) || !(n1s_obs_lo > 0.0)) {
        throw domain_error("t1_estimate: no single-photon credit, no key "
                           "(delta1 or n1s bound is zero)");
    }
    if (!(opts.sigma_mult >= 0.0)) {
        throw domain_error("t1_estimate: sigma_mult must be non-negative");
    }

    const double ns_norm = opts.halved_ns ? 0.5 * ns : ns;
    // Expected vacuum counts err at rate 1/2; everything left over is
    // charged to the single-photon pool.
    double t1p = (t0 - pp * bounds.ap0_lo * d0 / (2.0 * ns_norm)) / delta1;
    t1p = std::clamp(t1p, 0.0, 0.5);
    double t1 = t1p;
    if (opts.sigma_mult > 0.0 && t1p > 0.0) {
        t1 += opts.sigma_mult * std::sqrt(4.0 * t1p / n1s_obs_lo);
    }
    return std::min(t1, 0.5);
}

double key_rate(double delta1, double t1, double t) {
    if (!(delta1 >= 0.0) || delta1 > 1.0) {
        throw domain_error("key_rate: delta1 must lie in [0, 1]");
    }
    if (!(t1 >= 0.0) || t1 > 0.5) throw domain_error("key_rate: t1 must lie in [0, 0.5]");
    return delta1 * (1.0 - binary_entropy(t1)) - binary_entropy(t);
}

namespace {

struct GridPoint {
    double rate = 0.0;
    double d0 = 0.0;
    double delta1 = 0.0;
    double t1 = 0.5;
};

// Rate per raw signal bit at one D0. A vanished fraction bound means the
// rate degenerates to -H(t) with no usable t1 estimate.
GridPoint evaluate_rate_at(const ObservedTallies& tallies, const SourceBounds& bounds,
                           double sigma_mult, double d0, bool halved_ns,
                           double entropy_t) {
    GridPoint pt;
    pt.d0 = d0;
    const FractionBound fb = delta1_nonasymptotic(tallies, bounds, sigma_mult, d0);
    if (fb.delta1_signal_lo <= 0.0 || fb.n1s_obs_lo <= 0.0) {
        pt.rate = -entropy_t;
        pt.delta1 = 0.0;
        pt.t1 = 0.5;
        return pt;
    }
    pt.delta1 = fb.delta1_signal_lo;
    pt.t1 = t1_estimate(tallies.t0_signal, d0, fb.delta1_signal_lo, fb.n1s_obs_lo,
                        bounds, tallies.pp, tallies.ns, {sigma_mult, halved_ns});
    pt.rate = pt.delta1 * (1.0 - binary_entropy(pt.t1)) - entropy_t;
    return pt;
}

} // namespace

RateReport worst_case_rate(const ObservedTallies& tallies, const SourceBounds& bounds,
                           double sigma_mult, const RateOptions& opts) {
    if (opts.grid_n < 2) throw domain_error("worst_case_rate: grid_n must be at least 2");
    require_conditions(bounds);
    const ExpectationIntervals ivs = expectation_intervals(tallies, bounds, sigma_mult);
    const double entropy_t = binary_entropy(tallies.t0_signal);

    int evaluations = 0;
    GridPoint best;
    best.rate = std::numeric_limits<double>::infinity();

    auto scan = [&](double lo, double hi, int n) {
        int argmin = 0;
        GridPoint local_best;
        local_best.rate = std::numeric_limits<double>::infinity();
        if (hi <= lo) n = 1;
        for (int j = 0; j < n; ++j) {
            const double frac = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
            const double d0 = std::min(lo + (hi - lo) * frac, hi);
            const GridPoint pt = evaluate_rate_at(tallies, bounds, sigma_mult, d0,
                                                  opts.halved_ns, entropy_t);
            ++evaluations;
            if (pt.rate < local_best.rate) {
                local_best = pt;
                argmin = j;
            }
        }
        if (local_best.rate < best.rate) best = local_best;
        return argmin;
    };

    const int argmin = scan(ivs.d0.lo, ivs.d0.hi, opts.grid_n);
    // One refinement pass around the argmin guards against grid aliasing.
    if (ivs.d0.width() > 0.0) {
        const double step = ivs.d0.width() / (opts.grid_n - 1);
        const double lo = std::max(ivs.d0.lo, ivs.d0.lo + (argmin - 1) * step);
        const double hi = std::min(ivs.d0.hi, ivs.d0.lo + (argmin + 1) * step);
        scan(lo, hi, opts.grid_n);
    }

    RateReport report;
    report.rate_per_count = best.rate;
    report.rate = std::max(0.0, tallies.rate_signal() * best.rate);
    report.d0_worst = best.d0;
    report.delta1_used = best.delta1;
    report.t1_used = best.t1;
    report.t_used = tallies.t0_signal;
    report.grid_points = evaluations;
    return report;
}

SweepTable sweep_delta_m(const ObservedTallies& tallies, double mu_decoy, double mu_signal,
                         const std::vector<double>& delta_m_list,
                         const std::vector<double>& vacuum_caps,
                         double sigma_mult, const RateOptions& opts) {
    if (delta_m_list.empty()) throw domain_error("sweep_delta_m: delta_m_list is empty");
    for (double dm : delta_m_list) {
        if (!(dm >= 0.0) || dm > 0.05) {
            throw domain_error("sweep_delta_m: delta_m values must lie in [0, 0.05]");
        }
    }
    for (double cap : vacuum_caps) {
        if (!(cap >= 0.0)) throw domain_error("sweep_delta_m: vacuum caps must be non-negative");
    }

    auto bounds_for = [&](double dm, double cap) {
        return coherent_bounds(IntensityInterval::relative(mu_decoy, dm),
                               IntensityInterval::relative(mu_signal, dm),
                               IntensityInterval{0.0, cap});
    };

    SweepTable table;
    table.delta_m = delta_m_list;

    SweepRow asym;
    asym.label = "R";
    asym.vacuum_cap = 0.0;
    asym.asymptotic = true;
    for (double dm : delta_m_list) {
        asym.cells.push_back(worst_case_rate(tallies, bounds_for(dm, 0.0), 0.0, opts));
    }
    table.rows.push_back(std::move(asym));

    for (std::size_t i = 0; i < vacuum_caps.size(); ++i) {
        SweepRow row;
        row.label = "R" + std::to_string(i + 1);
        row.vacuum_cap = vacuum_caps[i];
        row.asymptotic = false;
        for (double dm : delta_m_list) {
            row.cells.push_back(
                worst_case_rate(tallies, bounds_for(dm, vacuum_caps[i]), sigma_mult, opts));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace decoyq
