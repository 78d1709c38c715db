#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tdcsync/tdl.hpp"

using namespace tdcsync;

namespace {

TdlConfig flat_line(int taps, double delay, double clock) {
    TdlConfig cfg;
    cfg.num_taps = taps;
    cfg.mean_tap_delay = delay;
    cfg.tap_delay_jitter = 0.0;
    cfg.bank_period = 0;
    cfg.bank_extra_delay = 0.0;
    cfg.clock_period = clock;
    cfg.rng_seed = 1;
    return cfg;
}

AcquisitionConfig quiet() {
    AcquisitionConfig acq;
    acq.hit_jitter_sigma = 0.0;
    acq.bubble_probability = 0.0;
    acq.bubble_depth = 0;
    return acq;
}

// Reference implementation of the code map: count boundaries <= t by linear
// scan.
int ideal_code_scan(const TapDelayLine& tdl, double t) {
    int code = 0;
    for (double b : tdl.boundaries)
        if (b <= t) ++code;
    return code;
}

std::string bits(const ThermometerSample& s) {
    std::string out;
    for (int i = 0; i < s.length(); ++i) out += s.get(i) ? '1' : '0';
    return out;
}

}  // namespace

TEST_CASE("thermometer sample packs bits across word borders") {
    ThermometerSample s(130);
    CHECK(s.length() == 130);
    CHECK(s.popcount() == 0);
    s.set(0, true);
    s.set(63, true);
    s.set(64, true);
    s.set(129, true);
    CHECK(s.popcount() == 4);
    CHECK(s.get(63));
    CHECK(s.get(64));
    CHECK_FALSE(s.get(65));
    s.flip(64);
    CHECK_FALSE(s.get(64));
    CHECK(s.popcount() == 3);
    s.flip(64);
    CHECK(s.get(64));

    ThermometerSample c = ThermometerSample::clean(130, 65);
    CHECK(c.popcount() == 65);
    CHECK(c.get(64));
    CHECK_FALSE(c.get(65));
}

TEST_CASE("flat line boundaries are exact prefix sums") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    REQUIRE(tdl.boundaries.size() == 4);
    CHECK(tdl.boundaries[0] == doctest::Approx(100.0));
    CHECK(tdl.boundaries[1] == doctest::Approx(200.0));
    CHECK(tdl.boundaries[2] == doctest::Approx(300.0));
    CHECK(tdl.boundaries[3] == doctest::Approx(400.0));
    CHECK(tdl.clock_period == doctest::Approx(350.0));

    // Code = number of taps the hit has propagated through.
    CHECK(ideal_code(tdl, 0.0) == 0);
    CHECK(ideal_code(tdl, 99.999) == 0);
    CHECK(ideal_code(tdl, 100.0) == 1);
    CHECK(ideal_code(tdl, 250.0) == 2);
    CHECK(ideal_code(tdl, 349.999) == 3);
}

TEST_CASE("bank crossings add extra delay at fixed tap intervals") {
    TdlConfig cfg = flat_line(6, 10.0, 60.0);
    cfg.bank_period = 2;
    cfg.bank_extra_delay = 5.0;
    TapDelayLine tdl = build_tdl(cfg);
    // Taps 2 and 4 sit just past a bank boundary: 10,10,15,10,15,10.
    const std::vector<double> expect = {10.0, 20.0, 35.0, 45.0, 60.0, 70.0};
    REQUIRE(tdl.boundaries.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(tdl.boundaries[i] == doctest::Approx(expect[i]));
    CHECK(ideal_code(tdl, 34.999) == 2);
    CHECK(ideal_code(tdl, 35.0) == 3);
}

TEST_CASE("code map agrees with the linear-scan reference on random lines") {
    TdlConfig cfg;  // defaults: 160 taps, jittered, banked
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.rng_seed = seed;
        TapDelayLine tdl = build_tdl(cfg);
        Rng rng(seed * 977);
        for (int i = 0; i < 2000; ++i) {
            const double t = rng.uniform(0.0, tdl.boundaries.back());
            CHECK(ideal_code(tdl, t) == ideal_code_scan(tdl, t));
        }
        // Hits exactly on a boundary count that tap as fired.
        CHECK(ideal_code(tdl, tdl.boundaries[10]) == 11);
    }
}

TEST_CASE("line that cannot nominally span the clock period is rejected") {
    // 157 * 40.7 = 6389.9 < 6400 -> unbuildable by construction.
    TdlConfig bad;
    bad.num_taps = 157;
    CHECK_THROWS_AS(build_tdl(bad), std::invalid_argument);
    // One more tap tips the nominal span over the period.
    TdlConfig ok;
    ok.num_taps = 158;
    ok.tap_delay_jitter = 0.0;
    CHECK_NOTHROW(build_tdl(ok));

    TdlConfig zero_taps;
    zero_taps.num_taps = 0;
    CHECK_THROWS_AS(build_tdl(zero_taps), std::invalid_argument);
    TdlConfig neg_delay;
    neg_delay.mean_tap_delay = -1.0;
    CHECK_THROWS_AS(build_tdl(neg_delay), std::invalid_argument);
}

TEST_CASE("default config always covers the clock period") {
    TdlConfig cfg;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        cfg.rng_seed = seed;
        TapDelayLine tdl = build_tdl(cfg);
        CHECK(tdl.boundaries.back() >= cfg.clock_period);
        CHECK(static_cast<int>(tdl.tap_delays.size()) == cfg.num_taps);
    }
}

TEST_CASE("tap delays are floored at the physical minimum") {
    TdlConfig cfg = flat_line(10, 2.0, 15.0);
    cfg.tap_delay_jitter = 10.0;  // most raw draws would be <= 0
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.rng_seed = seed;
        TapDelayLine tdl = build_tdl(cfg);
        for (double d : tdl.tap_delays) CHECK(d >= kMinTapDelayPs);
    }
}

TEST_CASE("noiseless acquisition latches the clean pattern for the code") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    AcquisitionConfig acq = quiet();
    Rng rng(5);
    ThermometerSample s = acquire(tdl, 250.0, acq, rng);
    CHECK(bits(s) == "1100");
    CHECK(s.popcount() == ideal_code(tdl, 250.0));

    ThermometerSample s0 = acquire(tdl, 0.0, acq, rng);
    CHECK(s0.popcount() == 0);
}

TEST_CASE("hit phase outside the clock period is rejected") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    AcquisitionConfig acq = quiet();
    Rng rng(5);
    CHECK_THROWS_AS(acquire(tdl, -0.001, acq, rng), std::invalid_argument);
    CHECK_THROWS_AS(acquire(tdl, 350.0, acq, rng), std::invalid_argument);
    CHECK_THROWS_AS(acquire(tdl, 1e9, acq, rng), std::invalid_argument);
}

TEST_CASE("single tap spanning the period yields code 0 for every hit") {
    TapDelayLine tdl = build_tdl(flat_line(1, 400.0, 350.0));
    AcquisitionConfig acq = quiet();
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        ThermometerSample s = acquire(tdl, rng.uniform(0.0, 350.0), acq, rng);
        CHECK(s.popcount() == 0);
    }
}

TEST_CASE("timing jitter spreads hits across the adjacent boundary") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    AcquisitionConfig acq = quiet();
    acq.hit_jitter_sigma = 5.0;
    Rng rng(11);
    int above = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        // A hit exactly on boundary 0 should land on either side evenly.
        ThermometerSample s = acquire(tdl, 100.0, acq, rng);
        if (s.popcount() >= 1) ++above;
    }
    CHECK(static_cast<double>(above) / n == doctest::Approx(0.5).epsilon(0.05));

    // Jitter never pushes the sample outside the representable range.
    for (int i = 0; i < 2000; ++i) {
        ThermometerSample s = acquire(tdl, 0.0, acq, rng);
        CHECK(s.popcount() >= 0);
        CHECK(s.popcount() <= 4);
    }
}

TEST_CASE("bubble injection flips exactly one bit near the edge") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    AcquisitionConfig acq = quiet();
    acq.bubble_probability = 1.0;
    acq.bubble_depth = 2;
    Rng rng(13);
    const ThermometerSample clean = ThermometerSample::clean(4, 2);
    std::set<int> positions;
    for (int i = 0; i < 2000; ++i) {
        ThermometerSample s = acquire(tdl, 250.0, acq, rng);
        int differences = 0;
        int where = -1;
        for (int pos = 0; pos < 4; ++pos) {
            if (s.get(pos) != clean.get(pos)) {
                ++differences;
                where = pos;
            }
        }
        CHECK(differences == 1);
        // Flip lands within bubble_depth of the 1/0 edge (code 2).
        CHECK(where >= 0);
        CHECK(where <= 3);
        positions.insert(where);
        const int delta = s.popcount() - 2;
        CHECK((delta == 1 || delta == -1));
    }
    // Depth 2 around code 2 on a 4-tap line reaches every position.
    CHECK(positions.size() == 4);
}

TEST_CASE("depth-1 bubbles around code 2 produce exactly two patterns") {
    // Clean pattern 1100 with a single flip adjacent to the edge can only
    // become 1000 or 1110.
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    AcquisitionConfig acq = quiet();
    acq.bubble_probability = 1.0;
    acq.bubble_depth = 1;
    Rng rng(17);
    std::set<std::string> seen;
    for (int i = 0; i < 500; ++i) seen.insert(bits(acquire(tdl, 250.0, acq, rng)));
    CHECK(seen == std::set<std::string>{"1000", "1110"});
}

TEST_CASE("zero probability or zero depth never injects a bubble") {
    TapDelayLine tdl = build_tdl(flat_line(4, 100.0, 350.0));
    Rng rng(19);
    AcquisitionConfig no_prob = quiet();
    AcquisitionConfig no_depth = quiet();
    no_depth.bubble_probability = 1.0;
    no_depth.bubble_depth = 0;
    for (int i = 0; i < 200; ++i) {
        CHECK(bits(acquire(tdl, 250.0, no_prob, rng)) == "1100");
        CHECK(bits(acquire(tdl, 250.0, no_depth, rng)) == "1100");
    }
}
