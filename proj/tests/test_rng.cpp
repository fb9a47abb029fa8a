#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "foodsim/rng.hpp"

using foodsim::philox4x32;
using foodsim::RngStream;
using foodsim::StreamPurpose;

TEST_CASE("philox4x32 known-answer vectors") {
    // Vectors from the Random123 reference distribution (kat_vectors.txt,
    // philox 4x32 10 rounds).
    SUBCASE("zero counter, zero key") {
        auto out = philox4x32({0, 0, 0, 0}, {0, 0});
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    SUBCASE("all-ones counter and key") {
        auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    SUBCASE("pi digits") {
        auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("stream words are the philox blocks in order") {
    // The stream must consume blocks philox({0,lo,hi,purpose}, key),
    // philox({1,lo,hi,purpose}, key), ... word by word.
    const std::uint64_t seed = 0x0123456789abcdefULL;
    const std::uint64_t index = 0x00000002'00000001ULL;  // lo=1, hi=2
    RngStream stream(seed, index, StreamPurpose::count);

    std::array<std::uint32_t, 2> key = {0x89abcdefu, 0x01234567u};
    for (std::uint32_t block = 0; block < 3; ++block) {
        auto expected = philox4x32({block, 1u, 2u, 3u}, key);
        for (std::uint32_t word : expected) CHECK(stream.next_u32() == word);
    }
}

TEST_CASE("streams are reproducible and disjoint") {
    auto take = [](std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) {
        RngStream stream(seed, index, purpose);
        std::vector<std::uint32_t> out;
        for (int i = 0; i < 16; ++i) out.push_back(stream.next_u32());
        return out;
    };

    auto base = take(42, 7, StreamPurpose::count);
    CHECK(base == take(42, 7, StreamPurpose::count));
    CHECK(base != take(43, 7, StreamPurpose::count));
    CHECK(base != take(42, 8, StreamPurpose::count));
    CHECK(base != take(42, 7, StreamPurpose::meals));
    CHECK(base != take(42, 7, StreamPurpose::demographics));
}

TEST_CASE("next_double stays in [0,1) and looks uniform") {
    RngStream stream(2018, 0, StreamPurpose::split);
    double sum = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        double value = stream.next_double();
        REQUIRE(value >= 0.0);
        REQUIRE(value < 1.0);
        sum += value;
    }
    // mean of 20k uniforms: sd ~ 0.002, so +-0.02 is a ten-sigma corridor
    CHECK(sum / draws == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("uniform_int respects the bound without modulo bias") {
    RngStream stream(7, 1, StreamPurpose::demographics);
    std::array<int, 7> buckets{};
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        std::uint32_t value = stream.uniform_int(7);
        REQUIRE(value < 7u);
        ++buckets[value];
    }
    for (int count : buckets) {
        // expected 10000 per bucket, sd ~ 92.6
        CHECK(count > 9300);
        CHECK(count < 10700);
    }
}

TEST_CASE("bernoulli edge probabilities are exact") {
    RngStream stream(1, 2, StreamPurpose::meals);
    for (int i = 0; i < 1000; ++i) {
        CHECK_FALSE(stream.bernoulli(0.0));
        CHECK(stream.bernoulli(1.0));
    }
}

TEST_CASE("shuffle is a deterministic permutation") {
    std::vector<int> values(100);
    std::iota(values.begin(), values.end(), 0);

    RngStream stream_a(99, 0, StreamPurpose::split);
    std::vector<int> first = values;
    foodsim::shuffle(first, stream_a);

    RngStream stream_b(99, 0, StreamPurpose::split);
    std::vector<int> second = values;
    foodsim::shuffle(second, stream_b);

    CHECK(first == second);
    CHECK(first != values);  // 100 elements: staying put has probability ~1/100!

    std::vector<int> sorted = first;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == values);

    std::vector<int> tiny = {5};
    RngStream stream_c(99, 0, StreamPurpose::split);
    foodsim::shuffle(tiny, stream_c);
    CHECK(tiny == std::vector<int>{5});

    std::vector<int> empty;
    foodsim::shuffle(empty, stream_c);
    CHECK(empty.empty());
}
