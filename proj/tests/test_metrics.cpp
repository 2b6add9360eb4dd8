#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "sqrn/metrics.hpp"
#include "sqrn/rng.hpp"

using sqrn::ByteHistogram;

TEST_CASE("shannon entropy reference points") {
    ByteHistogram uniform;
    for (int i = 0; i < 256; ++i) uniform.counts[i] = 10;
    uniform.total = 2560;
    CHECK(sqrn::shannon_entropy(uniform) == doctest::Approx(8.0).epsilon(1e-12));

    ByteHistogram single;
    single.counts[42] = 1000;
    single.total = 1000;
    CHECK(sqrn::shannon_entropy(single) == doctest::Approx(0.0));

    ByteHistogram coin;
    coin.counts[0] = 500;
    coin.counts[255] = 500;
    coin.total = 1000;
    CHECK(sqrn::shannon_entropy(coin) == doctest::Approx(1.0).epsilon(1e-12));

    ByteHistogram empty;
    CHECK_THROWS_AS(sqrn::shannon_entropy(empty), std::invalid_argument);
}

TEST_CASE("min entropy reference points") {
    ByteHistogram uniform;
    for (int i = 0; i < 256; ++i) uniform.counts[i] = 7;
    uniform.total = 256 * 7;
    CHECK(sqrn::min_entropy(uniform) == doctest::Approx(8.0).epsilon(1e-12));

    ByteHistogram half;
    half.counts[3] = 500;
    half.counts[4] = 250;
    half.counts[5] = 250;
    half.total = 1000;
    CHECK(sqrn::min_entropy(half) == doctest::Approx(1.0).epsilon(1e-12));

    ByteHistogram empty;
    CHECK_THROWS_AS(sqrn::min_entropy(empty), std::invalid_argument);
}

TEST_CASE("min entropy of a deliberately biased bit source sits near 7.745") {
    // per-bit majority probability 2^(-7.7451/8)
    const double p_max = std::pow(2.0, -7.7451 / 8.0);
    sqrn::Prng rng(2024);
    ByteHistogram hist;
    for (size_t i = 0; i < 4u << 20; ++i) {
        uint8_t byte = 0;
        for (int b = 0; b < 8; ++b)
            byte = static_cast<uint8_t>((byte << 1) | (rng.next_double() < p_max ? 0 : 1));
        hist.add(byte);
    }
    const double h = sqrn::min_entropy(hist);
    CHECK(h > 7.70);
    CHECK(h < 7.79);
}

TEST_CASE("visibility examples and symmetry") {
    CHECK(sqrn::visibility(1000, 1000) == doctest::Approx(0.0));
    CHECK(sqrn::visibility(1000, 0) == doctest::Approx(1.0));
    CHECK(sqrn::visibility(997, 3) == doctest::Approx(0.994));
    CHECK(sqrn::visibility(12345, 678) == sqrn::visibility(678, 12345));
    CHECK_THROWS_AS(sqrn::visibility(0, 0), std::invalid_argument);
}

TEST_CASE("entropy ordering and permutation invariance") {
    sqrn::Prng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        ByteHistogram h;
        for (int i = 0; i < 256; ++i) h.counts[i] = rng.next_u64() % 1000;
        h.counts[0] += 1; // never empty
        h.total = 0;
        for (auto c : h.counts) h.total += c;

        const double hs = sqrn::shannon_entropy(h);
        const double hm = sqrn::min_entropy(h);
        REQUIRE(hm >= 0.0);
        REQUIRE(hm <= hs + 1e-12);
        REQUIRE(hs <= 8.0 + 1e-12);

        ByteHistogram shuffled = h;
        std::shuffle(shuffled.counts.begin(), shuffled.counts.end(), rng);
        REQUIRE(sqrn::shannon_entropy(shuffled) == doctest::Approx(hs).epsilon(1e-12));
        REQUIRE(sqrn::min_entropy(shuffled) == doctest::Approx(hm).epsilon(1e-12));
    }
}

TEST_CASE("histograms merge additively") {
    sqrn::Prng rng(5);
    ByteHistogram a, b, whole;
    for (int i = 0; i < 10000; ++i) {
        const auto byte = static_cast<uint8_t>(rng.next_u64());
        whole.add(byte);
        (i % 2 ? a : b).add(byte);
    }
    a.merge(b);
    CHECK(a.total == whole.total);
    CHECK(a.counts == whole.counts);
}
