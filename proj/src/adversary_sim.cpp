#include "decoyq/adversary_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "decoyq/errors.hpp"

namespace decoyq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t block_stream_seed(std::uint64_t seed, std::uint64_t block) {
    return splitmix64(splitmix64(seed) ^ splitmix64(block + 0x6A09E667F3BCC908ULL));
}

// Uniform in [0, 1) from the top 53 bits.
double u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Knuth inversion; exact and portable, fast for the sub-photon means used
// here. exp_neg_mu = e^-mu precomputed by the caller.
int poisson_knuth(std::mt19937_64& eng, double exp_neg_mu) {
    if (exp_neg_mu >= 1.0) return 0;
    int k = 0;
    double prod = 1.0;
    do {
        prod *= u01(eng);
        ++k;
    } while (prod > exp_neg_mu);
    return k - 1;
}

struct Accum {
    std::array<std::array<std::uint64_t, kPhotonBuckets>, 3> emitted{};
    std::array<std::array<std::uint64_t, kPhotonBuckets>, 3> counted{};

    void merge(const Accum& other) {
        for (int s = 0; s < 3; ++s) {
            for (int k = 0; k < kPhotonBuckets; ++k) {
                emitted[s][k] += other.emitted[s][k];
                counted[s][k] += other.counted[s][k];
            }
        }
    }
};

void simulate_block_range(const SimScenario& sc, std::uint64_t block_begin,
                          std::uint64_t block_end, Accum& acc) {
    for (std::uint64_t block = block_begin; block < block_end; ++block) {
        std::mt19937_64 eng(block_stream_seed(sc.seed, block));
        const bool strong = (block % 2 == 0);
        const double eta = strong ? sc.eta_strong : sc.eta_weak;
        const double mu[3] = {
            strong ? sc.vacuum.strong_value() : sc.vacuum.weak_value(),
            strong ? sc.decoy.strong_value() : sc.decoy.weak_value(),
            strong ? sc.signal.strong_value() : sc.signal.weak_value(),
        };
        const double exp_neg_mu[3] = {std::exp(-mu[0]), std::exp(-mu[1]),
                                      std::exp(-mu[2])};

        for (std::uint64_t i = 0; i < sc.block_len; ++i) {
            const double u = u01(eng);
            const int src = u < sc.p0 ? 0 : (u < sc.p0 + sc.p ? 1 : 2);
            const int k = mu[src] > 0.0 ? poisson_knuth(eng, exp_neg_mu[src]) : 0;
            const int bucket = std::min(k, kPhotonBuckets - 1);
            ++acc.emitted[src][bucket];

            bool clicked = false;
            for (int photon = 0; photon < k && !clicked; ++photon) {
                clicked = u01(eng) < eta;
            }
            if (!clicked && sc.dark_rate > 0.0) {
                clicked = u01(eng) < sc.dark_rate;
            }
            if (clicked) ++acc.counted[src][bucket];
        }
    }
}

// Block 0 is always strong; weak values occur only from the second block on.
IntensityInterval realized_interval(const IntensityLaw& law, bool has_weak) {
    if (!has_weak) return IntensityInterval::exact(law.strong_value());
    return {std::min(law.strong_value(), law.weak_value()),
            std::max(law.strong_value(), law.weak_value())};
}

} // namespace

void SimScenario::validate() const {
    if (pulses == 0) throw domain_error("SimScenario.pulses must be positive");
    if (block_len == 0 || pulses % block_len != 0) {
        throw domain_error("SimScenario.block_len must divide the pulse count");
    }
    if (!(p0 > 0.0) || !(p > 0.0) || !(pp > 0.0) || std::abs(p0 + p + pp - 1.0) > 1e-9) {
        throw domain_error("SimScenario: selection probabilities must be positive and sum to 1");
    }
    for (const IntensityLaw* law : {&vacuum, &decoy, &signal}) {
        if (!(law->mean >= 0.0) || !(law->delta >= 0.0) || law->delta > 1.0) {
            throw domain_error("SimScenario: intensity laws need mean >= 0 and delta in [0, 1]");
        }
    }
    if (!(eta_strong >= 0.0) || eta_strong > 1.0 || !(eta_weak >= 0.0) || eta_weak > 1.0) {
        throw domain_error("SimScenario: channel transmittances must lie in [0, 1]");
    }
    if (!(dark_rate >= 0.0) || dark_rate > 1.0) {
        throw domain_error("SimScenario.dark_rate must lie in [0, 1]");
    }
}

std::uint64_t SimOutcome::emitted_total(SimSource s) const {
    const auto& row = emitted[static_cast<int>(s)];
    return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

std::uint64_t SimOutcome::counted_total(SimSource s) const {
    const auto& row = counted[static_cast<int>(s)];
    return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

SimOutcome run_simulation(const SimScenario& scenario, int workers) {
    scenario.validate();
    const std::uint64_t nblocks = scenario.pulses / scenario.block_len;

    unsigned n_workers = workers > 0 ? static_cast<unsigned>(workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(
        std::min<std::uint64_t>(n_workers, nblocks));

    std::vector<Accum> partial(n_workers);
    if (n_workers <= 1) {
        simulate_block_range(scenario, 0, nblocks, partial[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        const std::uint64_t chunk = (nblocks + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, nblocks);
            const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, nblocks);
            pool.emplace_back(simulate_block_range, std::cref(scenario), begin, end,
                              std::ref(partial[w]));
        }
        for (auto& t : pool) t.join();
    }

    Accum total;
    for (const Accum& part : partial) total.merge(part);

    SimOutcome out;
    out.emitted = total.emitted;
    out.counted = total.counted;
    out.tallies.pulses = static_cast<double>(scenario.pulses);
    out.tallies.p0 = scenario.p0;
    out.tallies.p = scenario.p;
    out.tallies.pp = scenario.pp;
    out.tallies.n0 = static_cast<double>(out.counted_total(SimSource::Vacuum));
    out.tallies.nd = static_cast<double>(out.counted_total(SimSource::Decoy));
    out.tallies.ns = static_cast<double>(out.counted_total(SimSource::Signal));

    const std::uint64_t ns = out.counted_total(SimSource::Signal);
    out.truth_delta1_signal =
        ns > 0 ? static_cast<double>(out.counted[static_cast<int>(SimSource::Signal)][1]) /
                     static_cast<double>(ns)
               : 0.0;

    const bool has_weak = nblocks >= 2;
    out.realized_vacuum = realized_interval(scenario.vacuum, has_weak);
    out.realized_decoy = realized_interval(scenario.decoy, has_weak);
    out.realized_signal = realized_interval(scenario.signal, has_weak);
    return out;
}

double appendix_yield_ratio(double lambda_d, double lambda_s, int m, double eps,
                            double eta_ratio) {
    if (m < 1) throw domain_error("appendix_yield_ratio: m must be at least 1");
    if (!(lambda_d > 0.0) || !(lambda_s > 0.0)) {
        throw domain_error("appendix_yield_ratio: attenuator transmittances must be positive");
    }
    if (!(eps >= 0.0) || eps >= 1.0) {
        throw domain_error("appendix_yield_ratio: eps must lie in [0, 1)");
    }
    if ((1.0 + eps) * std::max(lambda_d, lambda_s) > 1.0) {
        throw domain_error("appendix_yield_ratio: (1 + eps)*lambda must not exceed 1");
    }
    if (!(eta_ratio > 0.0)) {
        throw domain_error("appendix_yield_ratio: eta_ratio must be positive");
    }

    // Weight of "exactly one of m photons passes the attenuator" at
    // transmittance lambda; the binomial coefficient cancels in the yield.
    auto one_photon_weight = [m](double lambda) {
        return lambda * std::pow(1.0 - lambda, m - 1);
    };
    // Yield in units of the weak-block channel transmittance.
    auto yield = [&](double lambda) {
        const double w_strong = one_photon_weight((1.0 + eps) * lambda);
        const double w_weak = one_photon_weight((1.0 - eps) * lambda);
        return (w_strong * eta_ratio + w_weak) / (w_strong + w_weak);
    };
    return yield(lambda_d) / yield(lambda_s);
}

VerificationReport verify_bound(const SimOutcome& outcome, const SourceBounds& bounds,
                                double sigma_mult) {
    require_conditions(bounds);
    const SourceBounds realized = coherent_bounds(
        outcome.realized_decoy, outcome.realized_signal, outcome.realized_vacuum);
    if (!bounds.contains(realized)) {
        throw domain_error("verify_bound: declared source bounds do not cover the "
                           "realized intensity range (scenario bug, not a bound failure)");
    }

    const ExpectationIntervals ivs =
        expectation_intervals(outcome.tallies, bounds, sigma_mult);
    // The fraction bound is affine in D0, so the worst case sits at an
    // endpoint of the certified interval.
    const FractionBound at_lo =
        delta1_nonasymptotic(outcome.tallies, bounds, sigma_mult, ivs.d0.lo);
    const FractionBound at_hi =
        delta1_nonasymptotic(outcome.tallies, bounds, sigma_mult, ivs.d0.hi);
    const FractionBound& worst =
        at_lo.delta1_signal_lo <= at_hi.delta1_signal_lo ? at_lo : at_hi;

    VerificationReport report;
    report.bound = worst.delta1_signal_lo;
    report.truth = outcome.truth_delta1_signal;
    report.margin = report.truth - report.bound;
    report.d0_used = worst.d0_used;
    report.pass = report.bound <= report.truth;
    return report;
}

} // namespace decoyq
