#include <doctest.h>

#include "sqrn/bits.hpp"
#include "sqrn/rng.hpp"

using sqrn::BitVec;

TEST_CASE("BitVec packs MSB-first") {
    BitVec v;
    for (bool b : {true, false, true, true, false, false, false, true}) v.push_back(b);
    REQUIRE(v.size() == 8);
    CHECK(v.bytes()[0] == 0xB1);
    CHECK(v[0] == true);
    CHECK(v[1] == false);
}

TEST_CASE("BitVec slice realigns and append shifts") {
    sqrn::Prng rng(7);
    BitVec v;
    for (int i = 0; i < 1000; ++i) v.push_back(rng.next_u64() & 1);

    const BitVec s = v.slice(13, 700);
    REQUIRE(s.size() == 700);
    for (size_t i = 0; i < 700; ++i) REQUIRE(s[i] == v[13 + i]);

    BitVec joined = v.slice(0, 13);
    joined.append(s);
    for (size_t i = 0; i < 713; ++i) REQUIRE(joined[i] == v[i]);
}

TEST_CASE("BitVec word view is MSB-aligned and zero padded") {
    BitVec v;
    for (int i = 0; i < 70; ++i) v.push_back(true);
    CHECK(v.word(0) == ~0ull);
    CHECK(v.word(1) == 0xFC00000000000000ull);
    CHECK(v.word_count() == 2);
}

TEST_CASE("from_bytes with a bit count clears the unused tail") {
    const BitVec v = BitVec::from_bytes({0xFF, 0xFF}, 11);
    CHECK(v.size() == 11);
    CHECK(v.bytes()[1] == 0xE0); // only 3 bits of the second byte survive
    CHECK(v.full_bytes() == 1);
    CHECK_THROWS_AS(BitVec::from_bytes({0xFF}, 9), std::invalid_argument);

    BitVec a = BitVec::from_bytes({0xAA}, 3); // 1,0,1
    BitVec b = BitVec::from_bytes({0xAA}, 3);
    a.append(b);
    REQUIRE(a.size() == 6);
    CHECK(a.bytes()[0] == 0xB4); // 101101--
}

TEST_CASE("derived seeds differ and are stable") {
    const uint64_t a = sqrn::derive_seed(42, 0);
    const uint64_t b = sqrn::derive_seed(42, 1);
    const uint64_t c = sqrn::derive_seed(43, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(a == sqrn::derive_seed(42, 0));
}

TEST_CASE("prng streams are reproducible") {
    sqrn::Prng a(123), b(123);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
    sqrn::Prng c(124);
    CHECK(a.next_u64() != c.next_u64());
}
