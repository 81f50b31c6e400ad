#pragma once

#include <string>
#include <vector>

#include "decoyq/decoy_bounds.hpp"

namespace decoyq {

// Shannon entropy of a bit, H(t) = -t log2 t - (1-t) log2(1-t), with
// H(0) = H(1) = 0 by continuity. t must lie in [0, 1].
double binary_entropy(double t);

struct T1Options {
    double sigma_mult = 10.0;
    // Reading of the N_s' normalizer in the vacuum-error subtraction:
    // false = total signal counts Ns, true = Ns/2 (post-sifting).
    bool halved_ns = false;
};

// Upper estimate of the single-photon QBER: starts from the observed QBER,
// subtracts the expected vacuum-count errors (error rate 1/2), attributes
// the remainder entirely to single-photon counts, then adds the statistical
// penalty sigma*sqrt(4 t1'/n1s). Clamped to [0, 0.5].
double t1_estimate(double t0, double d0, double delta1, double n1s_obs_lo,
                   const SourceBounds& bounds, double pp, double ns,
                   const T1Options& opts = {});

// Secure fraction per raw signal bit: delta1*(1 - H(t1)) - H(t).
double key_rate(double delta1, double t1, double t);

struct RateReport {
    double rate = 0.0;           // final bits per signal pulse, clamped at 0
    double rate_per_count = 0.0; // per raw signal bit at the worst case; may be < 0
    double d0_worst = 0.0;       // D0 attaining the minimum
    double delta1_used = 0.0;
    double t1_used = 0.0;
    double t_used = 0.0;
    int grid_points = 0;         // total rate evaluations, refinement included
};

struct RateOptions {
    int grid_n = 1001;
    bool halved_ns = false;
};

// Worst-case key rate over the certified D0 interval: evaluates the full
// fraction-bound -> t1 -> rate chain on an evenly spaced grid including both
// endpoints, then refines once around the argmin. sigma_mult = 0 is the
// asymptotic mode (zero-width intervals, no statistical penalties).
RateReport worst_case_rate(const ObservedTallies& tallies, const SourceBounds& bounds,
                           double sigma_mult, const RateOptions& opts = {});

struct SweepRow {
    std::string label;       // "R" for the asymptotic row, then "R1", "R2", ...
    double vacuum_cap = 0.0; // upper bound on the vacuum-source intensity
    bool asymptotic = false;
    std::vector<RateReport> cells; // one per delta_m value
};

struct SweepTable {
    std::vector<double> delta_m;
    std::vector<SweepRow> rows;
};

// Rate table over intensity-error bounds delta_m (columns) and vacuum
// intensity caps (rows): one asymptotic row with a perfect vacuum source,
// then one non-asymptotic row per cap.
SweepTable sweep_delta_m(const ObservedTallies& tallies, double mu_decoy, double mu_signal,
                         const std::vector<double>& delta_m_list,
                         const std::vector<double>& vacuum_caps,
                         double sigma_mult, const RateOptions& opts = {});

} // namespace decoyq
