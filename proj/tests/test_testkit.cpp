#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sqrn/testkit.hpp"
#include "sqrn/rng.hpp"
#include "support/ks_oracle.hpp"

using namespace sqrn;

namespace {

BitVec uniform_bits(size_t n, uint64_t seed) {
    Prng rng(seed);
    std::vector<uint8_t> bytes((n + 7) / 8);
    for (auto& b : bytes) b = static_cast<uint8_t>(rng.next_u64());
    return BitVec::from_bytes(std::move(bytes), n);
}

} // namespace

TEST_CASE("proportion confidence interval reference values") {
    const auto ci = proportion_confidence_interval(0.01, 1000);
    CHECK(ci.lo == doctest::Approx(0.98056).epsilon(5e-6));
    CHECK(ci.hi == doctest::Approx(0.99944).epsilon(5e-6));
    CHECK_FALSE(ci.clamped);
    // rounded to 3 decimals: [0.980, 0.999]
    CHECK(std::round(ci.lo * 1000) / 1000 == doctest::Approx(0.981).epsilon(1e-9));
    CHECK(std::round(ci.hi * 1000) / 1000 == doctest::Approx(0.999).epsilon(1e-9));

    // large-n limit collapses onto p-hat
    const auto tight = proportion_confidence_interval(0.01, 1000000000ull);
    CHECK(tight.lo == doctest::Approx(0.99).epsilon(1e-4));
    CHECK(tight.hi == doctest::Approx(0.99).epsilon(1e-4));

    // wide interval is clamped and flagged
    const auto wide = proportion_confidence_interval(0.5, 4);
    CHECK(wide.lo == 0.0);
    CHECK(wide.hi == 1.0);
    CHECK(wide.clamped);

    CHECK_THROWS_AS(proportion_confidence_interval(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(proportion_confidence_interval(1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(proportion_confidence_interval(0.01, 0), std::invalid_argument);
}

TEST_CASE("KS fixed vectors") {
    SUBCASE("evenly spread values give D=0.005 and p near 1") {
        std::vector<double> v;
        for (int i = 0; i < 100; ++i) v.push_back((2 * i + 1) / 200.0);
        CHECK(sqrn::testing::ks_statistic_bruteforce(v) == doctest::Approx(0.005).epsilon(1e-12));
        CHECK(ks_uniformity_pvalue(v) > 1.0 - 1e-9);
    }
    SUBCASE("a constant vector fails decisively") {
        std::vector<double> v(50, 0.5);
        CHECK(sqrn::testing::ks_statistic_bruteforce(v) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(ks_uniformity_pvalue(v) < 1e-9);
    }
    SUBCASE("two points, hand evaluated") {
        const std::vector<double> v{0.3, 0.7};
        CHECK(sqrn::testing::ks_statistic_bruteforce(v) == doctest::Approx(0.3).epsilon(1e-12));
        const double scale = std::sqrt(2.0) + 0.12 + 0.11 / std::sqrt(2.0);
        CHECK(ks_uniformity_pvalue(v) ==
              doctest::Approx(sqrn::testing::kolmogorov_q_reference(scale * 0.3)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ks_uniformity_pvalue(std::vector<double>{0.5}), std::invalid_argument);
    CHECK_THROWS_AS(ks_uniformity_pvalue(std::vector<double>{0.5, 1.5}), std::invalid_argument);
}

TEST_CASE("KS agrees with the brute-force oracle to 1e-10") {
    Prng rng(91);
    for (int trial = 0; trial < 40; ++trial) {
        const size_t n = 2 + rng.next_u64() % 300;
        std::vector<double> v(n);
        for (auto& x : v) x = rng.next_double();
        const double fast = ks_uniformity_pvalue(v);
        const double slow = sqrn::testing::ks_pvalue_bruteforce(v);
        REQUIRE(std::abs(fast - slow) <= 1e-10);
    }
}

TEST_CASE("verdict bands") {
    CHECK(classify_pvalue(0.5) == Verdict::Pass);
    CHECK(classify_pvalue(0.011) == Verdict::Pass);
    CHECK(classify_pvalue(0.01) == Verdict::Weak);
    CHECK(classify_pvalue(0.99) == Verdict::Weak);
    CHECK(classify_pvalue(1e-4) == Verdict::Weak);
    CHECK(classify_pvalue(0.9999) == Verdict::Weak);
    CHECK(classify_pvalue(1e-5) == Verdict::Fail);
    CHECK(classify_pvalue(0.99995) == Verdict::Fail);
    CHECK(classify_pvalue(0.0) == Verdict::Fail);
}

TEST_CASE("bit scan matches a bit-by-bit reference") {
    Prng rng(92);
    for (int trial = 0; trial < 30; ++trial) {
        const size_t n = 65 + rng.next_u64() % 1000;
        const BitVec bits = uniform_bits(n, 9000 + trial);

        const auto fast = scan_bits(bits);
        uint64_t ones = 0, transitions = 0, pairs = 0;
        for (size_t i = 0; i < n; ++i) {
            ones += bits[i];
            if (i + 1 < n) {
                transitions += bits[i] != bits[i + 1];
                pairs += bits[i] && bits[i + 1];
            }
        }
        REQUIRE(fast.n == n);
        REQUIRE(fast.ones == ones);
        REQUIRE(fast.transitions == transitions);
        REQUIRE(fast.ones_pairs == pairs);
    }
}

TEST_CASE("battery degenerate inputs") {
    SUBCASE("all zeros: monobit fails") {
        const BitVec bits = BitVec::from_bytes(std::vector<uint8_t>(200000, 0x00));
        const auto report = quick_battery(bits);
        CHECK(report.tests[0].name == "monobit_frequency");
        CHECK(report.tests[0].verdict == Verdict::Fail);
        CHECK(report.any_fail());
    }
    SUBCASE("alternating 0101: runs test fails") {
        const BitVec bits = BitVec::from_bytes(std::vector<uint8_t>(200000, 0x55));
        const auto report = quick_battery(bits);
        CHECK(report.tests[1].name == "runs");
        CHECK(report.tests[1].verdict == Verdict::Fail);
        CHECK(report.tests[3].verdict == Verdict::Fail); // serial correlation -1
        CHECK(report.any_fail());
    }
    SUBCASE("uniform input passes") {
        const auto report = quick_battery(uniform_bits(4 << 20, 93));
        for (const auto& t : report.tests) CHECK(t.verdict == Verdict::Pass);
        CHECK(report.all_pass());
    }
    CHECK_THROWS_AS(quick_battery(uniform_bits(999999, 94)), std::invalid_argument);
}

TEST_CASE("battery p-values are themselves uniform over repeated trials") {
    std::vector<double> monobit, runs, chi2, serial;
    for (int trial = 0; trial < 100; ++trial) {
        const auto report = quick_battery(uniform_bits(10000000, 5000 + trial));
        monobit.push_back(report.tests[0].p_value);
        runs.push_back(report.tests[1].p_value);
        chi2.push_back(report.tests[2].p_value);
        serial.push_back(report.tests[3].p_value);
    }
    CHECK(ks_uniformity_pvalue(monobit) > 0.01);
    CHECK(ks_uniformity_pvalue(runs) > 0.01);
    CHECK(ks_uniformity_pvalue(chi2) > 0.01);
    CHECK(ks_uniformity_pvalue(serial) > 0.01);
}

TEST_CASE("exporters are byte exact and round trip") {
    BitVec bits;
    for (bool b : {true, false, true, true, false, false, false, true}) bits.push_back(b);

    const std::string ascii =
        (std::filesystem::temp_directory_path() / "sqrn_export_test.txt").string();
    const std::string raw = ascii + ".bin";
    export_nist(bits, ascii, raw);

    std::ifstream in(ascii);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "10110001");

    const BitVec back = import_raw_bits(raw);
    REQUIRE(back.size() == 8);
    CHECK(back == bits);

    const std::string dh = ascii + ".dh";
    export_dieharder(uniform_bits(80000, 95), dh);
    const BitVec dh_back = import_raw_bits(dh);
    CHECK(dh_back == uniform_bits(80000, 95));

    std::remove(ascii.c_str());
    std::remove(raw.c_str());
    std::remove(dh.c_str());
}
