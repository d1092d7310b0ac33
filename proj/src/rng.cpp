// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/rng.hpp"

#include <cmath>
#include <numbers>

namespace subgen {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// SplitMix64 finalizer.
std::uint64_t CounterRng::mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t CounterRng::next_u64() {
    ++m_counter;
    return mix(m_key + m_counter * kGolden);
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool CounterRng::bernoulli(double p) {
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform() < p;
}

double CounterRng::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
    if (bound <= 1) {
        return 0;
    }
    // Reject the top partial block so the modulo is unbiased.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x < limit) {
            return x % bound;
        }
    }
}

CounterRng CounterRng::split(std::uint64_t id) const {
    return CounterRng(mix(m_key ^ mix(id + kGolden)), 0);
}

}  // namespace subgen
