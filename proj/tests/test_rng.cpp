#include <doctest.h>

#include <set>

#include "dodewalk/rng.hpp"

using namespace dodewalk;

TEST_CASE("philox4x32-10 known answers") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("deviates are replayable and distinct per walker") {
    const DeviateStream a(42, 3);
    const DeviateStream b(42, 3);
    const DeviateStream c(42, 4);
    const DeviateStream d(43, 3);
    for (std::uint64_t s : {0ULL, 1ULL, 1000ULL, 1ULL << 40}) {
        CHECK(a.uniforms(s) == b.uniforms(s));
        CHECK(a.uniform(s) != c.uniform(s));
        CHECK(a.uniform(s) != d.uniform(s));
        CHECK(a.uniforms(s)[0] != a.uniforms(s)[1]);
    }
}

TEST_CASE("uniforms lie in [0, 1) with the right mean") {
    const DeviateStream s(1, 0);
    double sum = 0.0;
    std::set<double> seen;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        for (double u : s.uniforms(static_cast<std::uint64_t>(i))) {
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            sum += u;
        }
        if (i < 1000) seen.insert(s.uniform(static_cast<std::uint64_t>(i)));
    }
    CHECK(sum / (2.0 * n) == doctest::Approx(0.5).epsilon(0.005));
    CHECK(seen.size() == 1000);
}
