#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "fairlaunch/rng.hpp"

using fairlaunch::RandomSource;

TEST_CASE("philox block matches the reference implementation", "[rng]") {
    // Known-answer vectors cross-checked against numpy.random.Philox
    // (same 4x64-10 variant; numpy emits block counter+1 first).
    const std::array<std::uint64_t, 4> zero =
        RandomSource::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x16554d9eca36314cull);
    CHECK(zero[1] == 0xdb20fe9d672d0fdcull);
    CHECK(zero[2] == 0xd7e772cee186176bull);
    CHECK(zero[3] == 0x7e68b68aec7ba23bull);

    const std::array<std::uint64_t, 4> one =
        RandomSource::block({1, 0, 0, 0}, {0, 0});
    CHECK(one[0] == 0x02f4ba6408e4d89bull);
    CHECK(one[1] == 0x3dd62b0b9ca8c5b2ull);
    CHECK(one[2] == 0x1c8667a55d902e79ull);
    CHECK(one[3] == 0x907d7a052fd5b4dcull);

    const std::array<std::uint64_t, 4> keyed =
        RandomSource::block({0, 0, 0, 0}, {42, 0});
    CHECK(keyed[0] == 0xa7687e2d34c89dc6ull);
    CHECK(keyed[1] == 0x4c5818ab9649d53full);
    CHECK(keyed[2] == 0xea0add4230dddab5ull);
    CHECK(keyed[3] == 0xe2a142eecee5bb40ull);

    const std::array<std::uint64_t, 4> wrap = RandomSource::block(
        {0xffffffffffffffffull, 0xffffffffffffffffull, 0xffffffffffffffffull,
         0xffffffffffffffffull},
        {0xdeadbeef12345678ull, 0x0123456789abcdefull});
    CHECK(wrap[0] == 0x770c4fb8092b31acull);
    CHECK(wrap[1] == 0xa40f3dc95bc2b161ull);
    CHECK(wrap[2] == 0x681bf0a40b33e0fbull);
    CHECK(wrap[3] == 0x722d3da6a171f857ull);
}

TEST_CASE("same seed reproduces the full sequence", "[rng]") {
    RandomSource a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("different seeds diverge", "[rng]") {
    RandomSource a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) {
        if (a.next_u64() == b.next_u64()) ++equal;
    }
    CHECK(equal == 0);
}

TEST_CASE("uniform01 stays in [0,1) and fills the range", "[rng]") {
    RandomSource rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 1e-4);
    CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("child streams are independent of parent state and of each other", "[rng]") {
    RandomSource parent(99);
    RandomSource child_before = parent.child(5);
    for (int i = 0; i < 100; ++i) parent.next_u64();
    RandomSource child_after = parent.child(5);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(child_before.next_u64() == child_after.next_u64());
    }

    // Paired-draw correlation between sibling streams.
    RandomSource s0 = parent.child(0);
    RandomSource s1 = parent.child(1);
    const int n = 100000;
    double sum0 = 0, sum1 = 0, sum00 = 0, sum11 = 0, sum01 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s0.uniform01();
        const double y = s1.uniform01();
        sum0 += x;
        sum1 += y;
        sum00 += x * x;
        sum11 += y * y;
        sum01 += x * y;
    }
    const double m0 = sum0 / n, m1 = sum1 / n;
    const double v0 = sum00 / n - m0 * m0;
    const double v1 = sum11 / n - m1 * m1;
    const double cov = sum01 / n - m0 * m1;
    const double r = cov / std::sqrt(v0 * v1);
    CHECK(std::abs(r) < 0.01);
}

TEST_CASE("sibling and nested child streams do not collide", "[rng]") {
    RandomSource parent(4242);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t k = 0; k < 200; ++k) {
        firsts.insert(parent.child(k).next_u64());
        firsts.insert(parent.child(k).child(0).next_u64());
    }
    CHECK(firsts.size() == 400);
}
