#pragma once

#include <array>
#include <cstdint>

namespace dodewalk {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Deviate source for one walker: every (step, lane) maps to a fixed uniform
/// in [0, 1), so any step can be replayed in isolation.
class DeviateStream {
public:
    DeviateStream(std::uint64_t seed, std::uint64_t walker) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          walker_(walker) {}

    /// Two independent 53-bit uniforms for a step.
    [[nodiscard]] std::array<double, 2> uniforms(std::uint64_t step) const noexcept;
    [[nodiscard]] double uniform(std::uint64_t step) const noexcept { return uniforms(step)[0]; }

    [[nodiscard]] std::uint64_t walker() const noexcept { return walker_; }

private:
    PhiloxKey key_;
    std::uint64_t walker_;
};

/// Stream for walker i of an ensemble seeded with `seed`.
inline DeviateStream derive_stream(std::uint64_t seed, std::uint64_t walker) noexcept {
    return {seed, walker};
}

}  // namespace dodewalk
