// SPDX-License-Identifier: Apache-2.0
//
// Seed derivation and the random streams used for channels, symbols and
// noise. One master seed deterministically derives independent sub-streams,
// so e.g. enabling noise never perturbs the channel draw. Gaussian variates
// come from a hand-rolled Box-Muller on top of mt19937_64 uniforms, keeping
// the byte stream identical across standard-library implementations.

#pragma once

#include "xalign/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace xalign {

/// Purpose tags for sub-stream derivation.
enum class Stream : std::uint64_t {
    Channels = 1,
    Symbols = 2,
    Noise = 3,
    Trial = 4,
    Redraw = 5,
    Precoders = 6,
};

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t base, Stream tag, std::uint64_t index = 0) {
    const std::uint64_t t = detail::mix64(base + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(tag));
    return detail::mix64(t + 0xD1B54A32D192ED03ull * (index + 1));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Two uniform bits (QPSK point index).
    std::uint32_t bits2() { return static_cast<std::uint32_t>(gen_() >> 62); }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    Complex cgaussian() {
        const double radius = std::sqrt(-std::log1p(-uniform()));
        const double phase = 2.0 * std::numbers::pi * uniform();
        return Complex(radius * std::cos(phase), radius * std::sin(phase));
    }

    CMatrix cgaussian_matrix(Index rows, Index cols) {
        CMatrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = cgaussian();
        return m;
    }

    CVector cgaussian_vector(Index len) {
        CVector v(len);
        for (Index i = 0; i < len; ++i) v(i) = cgaussian();
        return v;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace xalign
