#pragma once

#include <array>
#include <cstdint>

#include "decoyq/decoy_bounds.hpp"
#include "decoyq/source_model.hpp"

namespace decoyq {

// Per-source intensity program. Pulses are grouped into blocks; blocks
// alternate strong/weak (even block index = strong). Strong blocks emit
// mean*(1+delta), weak blocks mean*(1-delta).
struct IntensityLaw {
    double mean = 0.0;
    double delta = 0.0;

    double strong_value() const { return mean * (1.0 + delta); }
    double weak_value() const { return mean * (1.0 - delta); }
};

// Pulse-level scenario: three fluctuating sources plus an adversarial
// channel that may treat strong and weak blocks differently (the adversary
// is assumed to learn the block type from the average intensity, never the
// per-pulse source choice).
struct SimScenario {
    std::uint64_t pulses = 0; // M; must be a multiple of block_len
    double p0 = 0.0;
    double p = 0.0;
    double pp = 0.0;
    std::uint64_t block_len = 1;
    IntensityLaw vacuum;
    IntensityLaw decoy;
    IntensityLaw signal;
    double eta_strong = 0.0; // channel transmittance applied to strong blocks
    double eta_weak = 0.0;   // and to weak blocks
    double dark_rate = 0.0;  // per-pulse dark-count probability
    std::uint64_t seed = 0;

    void validate() const;
};

// Photon-number histogram buckets: k = 0..8 exact, last bucket = k >= 9.
inline constexpr int kPhotonBuckets = 10;

enum class SimSource : int { Vacuum = 0, Decoy = 1, Signal = 2 };

struct SimOutcome {
    ObservedTallies tallies;
    // Ground truth: pulses by (source, photon number), emitted and counted.
    std::array<std::array<std::uint64_t, kPhotonBuckets>, 3> emitted{};
    std::array<std::array<std::uint64_t, kPhotonBuckets>, 3> counted{};
    // Exact fraction of signal-source counts caused by single-photon pulses.
    double truth_delta1_signal = 0.0;
    // Intensity ranges actually realized by the block program.
    IntensityInterval realized_vacuum;
    IntensityInterval realized_decoy;
    IntensityInterval realized_signal;

    std::uint64_t emitted_total(SimSource s) const;
    std::uint64_t counted_total(SimSource s) const;
};

// Threshold-detection Monte Carlo: every photon of a pulse survives the
// block channel independently; the pulse counts iff at least one survives or
// a dark count fires. Deterministic for a given seed: every block has its
// own RNG substream, so the result is byte-identical for any worker count.
// workers = 0 picks the hardware concurrency.
SimOutcome run_simulation(const SimScenario& scenario, int workers = 0);

// Closed-form yield ratio Y_m1(decoy)/Y_m1(signal) for m-photon pulses
// attenuated to one photon by a two-value attenuator with relative error
// eps, against a channel that applies eta_ratio more transmittance to
// strong blocks. Independent of the absolute channel scale; equals 1 when
// eta_ratio = 1 or lambda_d = lambda_s.
double appendix_yield_ratio(double lambda_d, double lambda_s, int m, double eps,
                            double eta_ratio);

struct VerificationReport {
    bool pass = false;
    double bound = 0.0;   // certified fraction bound at the worst D0
    double truth = 0.0;   // exact simulated fraction
    double margin = 0.0;  // truth - bound
    double d0_used = 0.0;
};

// Closes the loop: checks that the declared bounds cover the realized
// coefficient ranges (anything else is a scenario bug, reported as an
// error), then verifies bound <= truth at the worst D0 endpoint.
VerificationReport verify_bound(const SimOutcome& outcome, const SourceBounds& bounds,
                                double sigma_mult);

} // namespace decoyq
