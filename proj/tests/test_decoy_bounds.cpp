#include <doctest.h>

#include <cmath>
#include <random>

#include "decoyq/decoy_bounds.hpp"
#include "decoyq/errors.hpp"
#include "oracle.hpp"

using namespace decoyq;

namespace {

SourceBounds reference_bounds(double delta_m = 0.0, double vacuum_cap = 0.0) {
    return coherent_bounds(IntensityInterval::relative(0.2, delta_m),
                           IntensityInterval::relative(0.6, delta_m),
                           IntensityInterval{0.0, vacuum_cap});
}

// Observed tallies of the bundled 102.7 km reference run.
ObservedTallies reference_tallies() {
    ObservedTallies t;
    t.pulses = 5.222e9;
    t.p0 = 0.1;
    t.p = 0.4;
    t.pp = 0.5;
    t.n0 = std::round(6.711e-6 * 0.1 * t.pulses);
    t.nd = std::round(4.611e-5 * 0.4 * t.pulses);
    t.ns = std::round(1.262e-4 * 0.5 * t.pulses);
    t.t0_signal = 0.0358;
    t.t0_decoy = 0.09098;
    return t;
}

// Tallies consistent with a physical threshold-detection channel.
ObservedTallies physical_tallies(double mu, double mup, double eta, double dark,
                                 double pulses = 1e8) {
    const oracle::RateModel model{eta, dark};
    ObservedTallies t;
    t.pulses = pulses;
    t.p0 = 0.1;
    t.p = 0.4;
    t.pp = 0.5;
    t.n0 = std::round(model.rate(0.0) * t.p0 * pulses);
    t.nd = std::round(model.rate(mu) * t.p * pulses);
    t.ns = std::round(model.rate(mup) * t.pp * pulses);
    return t;
}

} // namespace

TEST_CASE("vacuum_count_intervals: zero d0 collapses both intervals to [0, 0]") {
    const auto [n0d, n0s] = vacuum_count_intervals(0.0, reference_bounds(), 0.4, 0.5);
    CHECK(n0d.lo == 0.0);
    CHECK(n0d.hi == 0.0);
    CHECK(n0s.lo == 0.0);
    CHECK(n0s.hi == 0.0);
}

TEST_CASE("vacuum_count_intervals: zero-width a0 bounds give a degenerate interval") {
    const SourceBounds b = reference_bounds();
    const auto [n0d, n0s] = vacuum_count_intervals(100.0, b, 0.4, 0.5);
    CHECK(n0d.lo == n0d.hi);
    CHECK(n0d.lo == doctest::Approx(40.0 * b.a0_lo).epsilon(1e-14));
    CHECK(n0s.lo == n0s.hi);
}

TEST_CASE("vacuum_count_intervals: 3% error endpoints by direct multiplication") {
    // frozen: 400*e^-0.206 and 400*e^-0.194
    const auto [n0d, n0s] = vacuum_count_intervals(1000.0, reference_bounds(0.03), 0.4, 0.5);
    CHECK(n0d.lo == doctest::Approx(325.53323051316829).epsilon(1e-13));
    CHECK(n0d.hi == doctest::Approx(329.46316170743073).epsilon(1e-13));
    CHECK(n0s.lo <= n0s.hi);
    CHECK_THROWS_AS(vacuum_count_intervals(-1.0, reference_bounds(), 0.4, 0.5), domain_error);
}

TEST_CASE("d0_interval: perfect vacuum source collapses to [n0_lo/p0, n0_hi/p0]") {
    const SourceBounds b = reference_bounds();
    const Interval d0 = d0_interval({3400.0, 3600.0}, {9e4, 1e5}, b, 0.1, 0.4);
    CHECK(d0.lo == doctest::Approx(34000.0).epsilon(1e-14));
    CHECK(d0.hi == doctest::Approx(36000.0).epsilon(1e-14));

    const Interval point = d0_interval(Interval::point(3504.0), {9e4, 1e5}, b, 0.1, 0.4);
    CHECK(point.lo == doctest::Approx(point.hi).epsilon(1e-14));
}

TEST_CASE("d0_interval: reference-run case with a 1% vacuum intensity cap") {
    // frozen: direct evaluation of both closed forms at n0 = 3504,
    // nd = 9.63e4, mu = 0.2 exact, b0_lo = e^-0.01
    const SourceBounds b = reference_bounds(0.0, 0.01);
    const Interval d0 =
        d0_interval(Interval::point(3504.0), Interval::point(9.63e4), b, 0.1, 0.4);
    CHECK(d0.lo == doctest::Approx(21479.243251062674).epsilon(1e-12));
    CHECK(d0.hi == doctest::Approx(35392.157854629249).epsilon(1e-12));
}

TEST_CASE("d0_interval: no vacuum counts gives [0, 0]") {
    const Interval d0 = d0_interval(Interval::point(0.0), Interval::point(9.63e4),
                                    reference_bounds(), 0.1, 0.4);
    CHECK(d0.lo == 0.0);
    CHECK(d0.hi == 0.0);
}

TEST_CASE("d0_interval: lower endpoint clamps at 0 when the correction dominates") {
    const SourceBounds b = reference_bounds(0.0, 0.01);
    const Interval d0 =
        d0_interval(Interval::point(10.0), Interval::point(1e6), b, 0.1, 0.4);
    CHECK(d0.lo == 0.0);
    CHECK(d0.hi > 0.0);
}

TEST_CASE("d1_lower: error-free reduction matches the independent decoy formula") {
    std::mt19937_64 eng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const oracle::RateTuple t = oracle::random_rate_tuple(eng);
        const SourceBounds b = coherent_bounds(IntensityInterval::exact(t.mu),
                                               IntensityInterval::exact(t.mup),
                                               IntensityInterval::exact(0.0));
        const double pulses = 1e9;
        const double d1 =
            d1_lower(t.s * 0.4 * pulses, t.sp * 0.5 * pulses, t.s0 * pulses, b, 0.4, 0.5);
        const double s1 = oracle::s1_lower_error_free(t.s0, t.s, t.sp, t.mu, t.mup);
        worst = std::max(worst, oracle::rel_err(d1 / pulses, s1));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("d1_lower: degenerate identical sources clamp to 0") {
    // Shared zero-width a2 and a0 interval with width: the numerator reduces
    // to -(a0_hi - a0_lo)*a2*d0 <= 0.
    SourceBounds b;
    b.a0_lo = 0.70;
    b.a0_hi = 0.75;
    b.ap0_lo = 0.70;
    b.ap0_hi = 0.75;
    b.a1_lo = 0.15;
    b.a1_hi = 0.20;
    b.ap1_lo = 0.15;
    b.ap1_hi = 0.20;
    b.a2_lo = b.a2_hi = 0.02;
    b.ap2_lo = b.ap2_hi = 0.02;
    b.b0_lo = 1.0;
    b.tail_ratio_decoy = 2.0;
    b.tail_ratio_signal = 1.0;
    REQUIRE(validate_conditions(b).ok());
    const double nd = 4000.0, ns = 5000.0;
    REQUIRE(nd / 0.4 == ns / 0.5);
    CHECK(d1_lower(nd, ns, 1000.0, b, 0.4, 0.5) == 0.0);
}

TEST_CASE("d1_lower: positive credit at the reference-run midpoint d0") {
    const ObservedTallies t = reference_tallies();
    const SourceBounds b = reference_bounds();
    const ExpectationIntervals ivs = expectation_intervals(t, b, 0.0);
    const double d1 = d1_lower(t.nd, t.ns, ivs.d0.mid(), b, t.p, t.pp);
    CHECK(d1 > 0.0);
    // feeds a delta1' near 0.485 and from there the headline asymptotic rate
    CHECK(t.pp * b.ap1_lo * d1 / t.ns == doctest::Approx(0.4854).epsilon(1e-3));
}

TEST_CASE("d1_lower: rejects failing conditions and negative inputs") {
    SourceBounds b = reference_bounds();
    CHECK_THROWS_AS(d1_lower(-1.0, 0.0, 0.0, b, 0.4, 0.5), domain_error);
    b.ap2_lo = 0.0; // breaks the explicit k=2 chain
    CHECK_THROWS_AS(d1_lower(1e4, 1e4, 0.0, b, 0.4, 0.5), condition_error);
}

TEST_CASE("delta1_asymptotic: identical sources with equal rates give 0") {
    SourceBounds b = reference_bounds();
    // same coefficient set for both sources, zero width
    b.ap0_lo = b.ap0_hi = b.a0_lo;
    b.ap1_lo = b.ap1_hi = b.a1_lo;
    b.ap2_lo = b.ap2_hi = b.a2_lo;
    b.tail_ratio_signal = 1.0;
    const auto [dd, ds] = delta1_asymptotic(1e-5, 1e-4, 1e-4, b);
    CHECK(dd == 0.0);
    CHECK(ds == 0.0);
}

TEST_CASE("delta1_asymptotic: error-free reduction matches the oracle") {
    std::mt19937_64 eng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const oracle::RateTuple t = oracle::random_rate_tuple(eng);
        const SourceBounds b = coherent_bounds(IntensityInterval::exact(t.mu),
                                               IntensityInterval::exact(t.mup),
                                               IntensityInterval::exact(0.0));
        const auto [dd, ds] = delta1_asymptotic(t.s0, t.s, t.sp, b);
        worst = std::max(worst, oracle::rel_err(ds, oracle::delta1_signal_error_free(
                                                        t.s0, t.s, t.sp, t.mu, t.mup)));
        worst = std::max(worst, oracle::rel_err(dd, oracle::delta1_decoy_error_free(
                                                        t.s0, t.s, t.sp, t.mu, t.mup)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("delta1_asymptotic: reference-run regression values") {
    // frozen from a high-precision evaluation of the closed forms
    {
        const auto [dd, ds] = delta1_asymptotic(6.711e-6, 4.611e-5, 1.262e-4,
                                                reference_bounds(0.0));
        CHECK(ds == doctest::Approx(0.485386358105047).epsilon(1e-12));
        CHECK(dd == doctest::Approx(0.66061485753784788).epsilon(1e-12));
    }
    {
        const auto [dd, ds] = delta1_asymptotic(6.711e-6, 4.611e-5, 1.262e-4,
                                                reference_bounds(0.005));
        CHECK(ds == doctest::Approx(0.47692231662980138).epsilon(1e-12));
        CHECK(dd == doctest::Approx(0.64779833378942464).epsilon(1e-12));
    }
}

TEST_CASE("expectation_intervals: sigma_mult = 0 collapses to the observations") {
    const ObservedTallies t = reference_tallies();
    const ExpectationIntervals ivs = expectation_intervals(t, reference_bounds(), 0.0);
    CHECK(ivs.n0.lo == ivs.n0.hi);
    CHECK(ivs.nd.lo == t.nd);
    CHECK(ivs.ns.hi == t.ns);
    CHECK(ivs.d0.lo == doctest::Approx(ivs.d0.hi).epsilon(1e-14));
}

TEST_CASE("expectation_intervals: stated arithmetic including the 0 clamp") {
    ObservedTallies t;
    t.pulses = 1e7;
    t.p0 = 0.1;
    t.p = 0.4;
    t.pp = 0.5;
    t.n0 = 100.0;
    t.nd = 10000.0;
    t.ns = 50000.0;
    const ExpectationIntervals ivs = expectation_intervals(t, reference_bounds(), 10.0);
    CHECK(ivs.nd.lo == doctest::Approx(9000.0).epsilon(1e-14));
    CHECK(ivs.nd.hi == doctest::Approx(11000.0).epsilon(1e-14));
    CHECK(ivs.n0.lo == 0.0);
    CHECK(ivs.n0.hi == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(ivs.ns.lo == doctest::Approx(48900.0).epsilon(1e-14));
    CHECK(ivs.ns.hi == doctest::Approx(51100.0).epsilon(1e-14));
}

TEST_CASE("expectation_intervals: population identity bracket holds") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const ObservedTallies t =
            physical_tallies(0.2, 0.6, 0.01 + 0.4 * u(eng), 1e-6 * u(eng));
        const ExpectationIntervals ivs =
            expectation_intervals(t, reference_bounds(), 20.0 * u(eng));
        const double total = t.n0 + t.nd + t.ns;
        CHECK(ivs.n0.lo + ivs.nd.lo + ivs.ns.lo <= total);
        CHECK(total <= ivs.n0.hi + ivs.nd.hi + ivs.ns.hi);
        CHECK(ivs.d0.valid());
        CHECK(ivs.d0.lo >= 0.0);
    }
}

TEST_CASE("delta1_nonasymptotic: sigma subtraction and clamps") {
    const ObservedTallies t = reference_tallies();
    const SourceBounds b = reference_bounds(0.0, 0.01);
    const ExpectationIntervals ivs = expectation_intervals(t, b, 10.0);
    const FractionBound fb = delta1_nonasymptotic(t, b, 10.0, ivs.d0.hi);
    CHECK(fb.n1s_expect_lo > 0.0);
    CHECK(fb.n1s_obs_lo ==
          doctest::Approx(fb.n1s_expect_lo - 10.0 * std::sqrt(fb.n1s_expect_lo))
              .epsilon(1e-12));
    CHECK(fb.n1s_obs_lo <= fb.n1s_expect_lo);
    CHECK(fb.delta1_signal_lo == doctest::Approx(fb.n1s_obs_lo / t.ns).epsilon(1e-12));
    CHECK(fb.delta1_signal_lo <= 1.0);
    CHECK(fb.delta1_decoy_lo == doctest::Approx(fb.n1d_obs_lo / t.nd).epsilon(1e-12));

    CHECK_THROWS_AS(delta1_nonasymptotic(t, b, 10.0, ivs.d0.hi * 2.0 + 1.0), domain_error);
}

TEST_CASE("delta1_nonasymptotic: vanished expectation bound gives all zeros") {
    // A huge sigma empties the count intervals and the fraction bound.
    const ObservedTallies t = physical_tallies(0.2, 0.6, 0.05, 0.0, 1e5);
    const SourceBounds b = reference_bounds();
    const ExpectationIntervals ivs = expectation_intervals(t, b, 1e4);
    const FractionBound fb = delta1_nonasymptotic(t, b, 1e4, ivs.d0.lo);
    CHECK(fb.n1s_obs_lo == 0.0);
    CHECK(fb.delta1_signal_lo == 0.0);
}

TEST_CASE("delta1_nonasymptotic: monotone in sigma_mult") {
    const ObservedTallies t = reference_tallies();
    const SourceBounds b = reference_bounds(0.01, 0.01);
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double s1 = 15.0 * u(eng);
        const double s2 = s1 + 10.0 * u(eng);
        const ExpectationIntervals narrow = expectation_intervals(t, b, s1);
        const double d0 = narrow.d0.lo + narrow.d0.width() * u(eng);
        const FractionBound f1 = delta1_nonasymptotic(t, b, s1, d0);
        const FractionBound f2 = delta1_nonasymptotic(t, b, s2, d0);
        CHECK(f2.delta1_signal_lo <= f1.delta1_signal_lo + 1e-15);
    }
}

TEST_CASE("delta1_nonasymptotic: widening source bounds never helps") {
    const ObservedTallies t = reference_tallies();
    std::mt19937_64 eng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double dm = 0.03 * u(eng);
        const double extra = dm + 0.02 * u(eng);
        const SourceBounds narrow = reference_bounds(dm, 0.01);
        const SourceBounds wide = reference_bounds(extra, 0.01);
        // same vacuum cap, so the d0 upper endpoint coincides
        const double d0 = expectation_intervals(t, narrow, 10.0).d0.hi;
        const FractionBound fn = delta1_nonasymptotic(t, narrow, 10.0, d0);
        const FractionBound fw = delta1_nonasymptotic(t, wide, 10.0, d0);
        CHECK(fw.delta1_signal_lo <= fn.delta1_signal_lo + 1e-15);
    }
}

TEST_CASE("ObservedTallies::validate rejects inconsistent data") {
    ObservedTallies t = reference_tallies();
    CHECK_NOTHROW(t.validate());
    t.n0 = t.p0 * t.pulses + 1.0;
    CHECK_THROWS_AS(t.validate(), domain_error);
    t = reference_tallies();
    t.pp = 0.6; // probabilities no longer sum to 1
    CHECK_THROWS_AS(t.validate(), domain_error);
    t = reference_tallies();
    t.t0_signal = 0.6;
    CHECK_THROWS_AS(t.validate(), domain_error);
}
