#include "doctest.h"

#include <set>

#include "resfi/bytes.hpp"
#include "resfi/rng.hpp"

using namespace resfi;

TEST_CASE("base64 round-trips arbitrary byte strings") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        Bytes data(rng.next_below(64));
        rng.fill(data.data(), data.size());
        auto back = base64_decode(base64_encode(data));
        REQUIRE(back.has_value());
        CHECK(*back == data);
    }
}

TEST_CASE("base64 known vectors") {
    CHECK(base64_encode(to_bytes("")) == "");
    CHECK(base64_encode(to_bytes("f")) == "Zg==");
    CHECK(base64_encode(to_bytes("fo")) == "Zm8=");
    CHECK(base64_encode(to_bytes("foo")) == "Zm9v");
    CHECK(base64_encode(to_bytes("foobar")) == "Zm9vYmFy");
    CHECK(to_string(*base64_decode("Zm9vYmFy")) == "foobar");
}

TEST_CASE("base64 rejects garbage") {
    CHECK_FALSE(base64_decode("Zm9v!").has_value());
    CHECK_FALSE(base64_decode("Zg==Zg").has_value()); // data after padding
    CHECK_FALSE(base64_decode("Z").has_value());      // dangling 6 bits
}

TEST_CASE("hex encoding") {
    Bytes data{0x00, 0xff, 0x10, 0xab};
    CHECK(hex_encode(data) == "00ff10ab");
}

TEST_CASE("rng is deterministic per seed and distinct across seeds") {
    Rng a(7), b(7), c(8);
    bool all_equal = true;
    bool any_equal_c = false;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
        all_equal = all_equal && (va == vb);
        any_equal_c = any_equal_c || (va == vc);
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("rng fork yields independent reproducible streams") {
    Rng parent1(99), parent2(99);
    Rng childa1 = parent1.fork("alpha");
    Rng childa2 = parent2.fork("alpha");
    CHECK(childa1.next_u64() == childa2.next_u64());

    Rng parent3(99);
    Rng childb = parent3.fork("beta");
    CHECK(childa2.next_u64() != childb.next_u64());
}

TEST_CASE("uniform stays in range, next_below unbiased enough") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        double v = rng.uniform(2.0, 5.0);
        CHECK(v >= 2.0);
        CHECK(v < 5.0);
    }
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        uint64_t v = rng.next_below(10);
        CHECK(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
    CHECK(rng.next_below(0) == 0);
    CHECK(rng.next_below(1) == 0);
}

TEST_CASE("chance respects edge probabilities") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        CHECK_FALSE(rng.chance(0.0));
        CHECK(rng.chance(1.0));
    }
}
