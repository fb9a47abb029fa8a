#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace foodsim {

// Philox 4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Counter-based: the output is a pure function of
// (counter, key), which is what makes record-level streams reproducible
// independent of draw order, thread count, or platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Disjoint purposes so that, e.g., adding one more demographic draw for a
// record never shifts the count draw of that record or any other.
enum class StreamPurpose : std::uint32_t {
    split = 1,
    demographics = 2,
    count = 3,
    meals = 4,
};

// One lazily generated random stream, fully determined by
// (seed, index, purpose). The triple is baked into the Philox key/counter;
// only a draw counter advances between outputs.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform in [0, bound); bound >= 1. Rejection sampling, no modulo bias.
    std::uint32_t uniform_int(std::uint32_t bound);

    bool bernoulli(double p);

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> stream_id_;
    std::array<std::uint32_t, 4> buffer_{};
    std::uint32_t block_counter_ = 0;
    int buffer_pos_ = 4;  // empty; first draw triggers refill
};

// Deterministic Fisher-Yates shuffle driven by an RngStream.
template <typename T>
void shuffle(std::vector<T>& values, RngStream& stream) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = stream.uniform_int(static_cast<std::uint32_t>(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace foodsim
