// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace subgen {

/**
 * @brief Counter-based splittable generator.
 *
 * The n-th draw is a pure function of (key, n), so a generator can be
 * serialized as two integers and resumed exactly. Child generators derived
 * with split() are statistically independent of the parent and of each other.
 * Every random decision in the library flows from one of these.
 */
class CounterRng {
public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t seed) : m_key(mix(seed)) {}
    CounterRng(std::uint64_t key, std::uint64_t counter) : m_key(key), m_counter(counter) {}

    std::uint64_t next_u64();

    /// Uniform on [0, 1), 53 random bits.
    double uniform();

    /// True with probability p. p <= 0 never fires, p >= 1 always fires.
    bool bernoulli(double p);

    /// Standard normal via Box-Muller; platform independent unlike std::normal_distribution.
    double normal();

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    /// Independent child stream, keyed by (this key, id). Does not advance this generator.
    CounterRng split(std::uint64_t id) const;

    std::uint64_t key() const { return m_key; }
    std::uint64_t counter() const { return m_counter; }

    friend bool operator==(const CounterRng&, const CounterRng&) = default;

    static std::uint64_t mix(std::uint64_t x);

private:
    std::uint64_t m_key = 0;
    std::uint64_t m_counter = 0;
};

}  // namespace subgen
