#include <doctest.h>

#include "sqrn/extractor.hpp"
#include "sqrn/rng.hpp"
#include "support/toeplitz_oracle.hpp"

using namespace sqrn;

namespace {

BitVec random_bits(size_t n, uint64_t seed) {
    Prng rng(seed);
    BitVec v;
    v.reserve_bits(n);
    for (size_t i = 0; i < n; ++i) v.push_back(rng.next_u64() & 1);
    return v;
}

} // namespace

TEST_CASE("output sizing from the leftover hash lemma") {
    CHECK(derive_output_length(400, 7.7451, 100) == 187);
    CHECK(derive_output_length(400, 8.0, 100) == 200);
    CHECK_THROWS_AS(derive_output_length(400, 4.0, 100), insufficient_entropy_error);
    CHECK_THROWS_AS(derive_output_length(400, 4.0001, 100), insufficient_entropy_error);
    CHECK_THROWS_AS(derive_output_length(401, 7.7, 100), std::invalid_argument);
    CHECK_THROWS_AS(derive_output_length(400, 0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(derive_output_length(400, 9.0, 100), std::invalid_argument);
}

TEST_CASE("seed consumption splits the raw stream") {
    const BitVec raw = random_bits(1000, 50);
    auto [seed, rest] = seed_from_raw(raw, 400, 187);
    CHECK(seed.size() == 586);
    CHECK(rest.size() == 414);
    for (size_t i = 0; i < rest.size(); ++i) REQUIRE(rest[i] == raw[586 + i]);

    const BitVec exact = random_bits(586, 51);
    auto [seed2, rest2] = seed_from_raw(exact, 400, 187);
    CHECK(seed2.size() == 586);
    CHECK(rest2.empty());

    const BitVec short_raw = random_bits(585, 52);
    CHECK_THROWS_AS(seed_from_raw(short_raw, 400, 187), std::invalid_argument);
}

TEST_CASE("matrix construction follows the seed indexing convention") {
    // n=3, m=2, 4-bit seed: row 0 is seed[2],seed[1],seed[0]; row 1
    // starts with seed[3].
    BitVec seed;
    for (bool b : {true, false, false, true}) seed.push_back(b);
    const auto ext = ToeplitzExtractor::build(seed, 3, 2);
    CHECK(ext.matrix_bit(0, 0) == false); // seed[2]
    CHECK(ext.matrix_bit(0, 1) == false); // seed[1]
    CHECK(ext.matrix_bit(0, 2) == true);  // seed[0]
    CHECK(ext.matrix_bit(1, 0) == true);  // seed[3]
    CHECK(ext.matrix_bit(1, 1) == false); // seed[2]
    CHECK(ext.matrix_bit(1, 2) == false); // seed[1]
    // diagonals constant
    CHECK(ext.matrix_bit(1, 1) == ext.matrix_bit(0, 0));
    CHECK(ext.matrix_bit(1, 2) == ext.matrix_bit(0, 1));
}

TEST_CASE("hand-checked 1x2 instance") {
    // seed [1,0]: row = [0,1], so output = input bit 1
    BitVec seed;
    seed.push_back(true);
    seed.push_back(false);
    const auto ext = ToeplitzExtractor::build(seed, 2, 1);
    BitVec input;
    input.push_back(true);  // b0
    input.push_back(false); // b1
    input.push_back(false); // second subsequence: b0
    input.push_back(true);  // b1
    const BitVec out = ext.extract(input);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == false); // b1 of first pair
    CHECK(out[1] == true);  // b1 of second pair
}

TEST_CASE("an all-zero seed hashes everything to zero") {
    BitVec seed;
    for (int i = 0; i < 9; ++i) seed.push_back(false);
    const auto ext = ToeplitzExtractor::build(seed, 6, 4);
    const BitVec out = ext.extract(random_bits(60, 53));
    REQUIRE(out.size() == 40);
    for (size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == false);
}

TEST_CASE("seed length is enforced") {
    CHECK_THROWS_AS(ToeplitzExtractor::build(random_bits(4, 54), 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(ToeplitzExtractor::build(random_bits(5, 54), 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(ToeplitzExtractor::build(random_bits(3, 54), 3, 2), std::invalid_argument);
    CHECK_NOTHROW(ToeplitzExtractor::build(random_bits(4, 54), 3, 2));
}

TEST_CASE("length arithmetic: 800 bits at n=400,m=187 give 374 bits") {
    const BitVec seed = random_bits(586, 55);
    const auto ext = ToeplitzExtractor::build(seed, 400, 187);
    CHECK(ext.extract(random_bits(800, 56)).size() == 374);
    // trailing remainder dropped
    CHECK(ext.extract(random_bits(1199, 57)).size() == 374);
    CHECK_THROWS_AS(ext.extract(random_bits(399, 58)), std::invalid_argument);
}

TEST_CASE("fast path equals the dense oracle on random small instances") {
    Prng rng(59);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t n = 2 + rng.next_u64() % 31;        // 2..32
        const size_t m = 1 + rng.next_u64() % (n - 1);   // 1..n-1
        const BitVec seed = random_bits(n + m - 1, 600 + trial);
        const BitVec input = random_bits(n * (1 + rng.next_u64() % 5), 900 + trial);

        const auto ext = ToeplitzExtractor::build(seed, n, m);
        const auto dense = sqrn::testing::dense_toeplitz_matrix(seed, n, m);
        REQUIRE(ext.extract(input) == sqrn::testing::dense_extract(dense, input));
    }
}

TEST_CASE("linearity over bitwise XOR") {
    Prng rng(61);
    const size_t n = 48, m = 20;
    const BitVec seed = random_bits(n + m - 1, 62);
    const auto ext = ToeplitzExtractor::build(seed, n, m);
    for (int trial = 0; trial < 200; ++trial) {
        const BitVec x = random_bits(n * 3, 700 + trial);
        const BitVec y = random_bits(n * 3, 1700 + trial);
        BitVec xy;
        for (size_t i = 0; i < x.size(); ++i) xy.push_back(x[i] != y[i]);
        const BitVec ex = ext.extract(x);
        const BitVec ey = ext.extract(y);
        const BitVec exy = ext.extract(xy);
        REQUIRE(exy.size() == ex.size());
        for (size_t i = 0; i < exy.size(); ++i) REQUIRE(exy[i] == (ex[i] != ey[i]));
    }
}

TEST_CASE("parallel extraction is identical to single-threaded") {
    const BitVec seed = random_bits(586, 63);
    const auto ext = ToeplitzExtractor::build(seed, 400, 187);
    const BitVec input = random_bits(400 * 4001 + 137, 64);
    const BitVec st = ext.extract(input, 1);
    const BitVec mt = ext.extract(input, 8);
    CHECK(st == mt);
}
