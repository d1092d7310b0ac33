// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "subgen/types.hpp"

namespace subgen::harness {

enum class DistributionKind { sampler, reservoir };

std::string_view to_string(DistributionKind kind);

struct DistributionReport {
    DistributionKind kind = DistributionKind::sampler;
    std::size_t trials = 0;
    std::uint64_t draws = 0;  ///< slots tallied across all trials
    std::vector<double> target;
    std::vector<double> empirical;
    double total_variation = 0.0;
    double tolerance = 0.02;

    bool pass() const { return total_variation <= tolerance; }
};

/**
 * @brief Monte Carlo check of the value sampler's slot distribution.
 *
 * Token i carries ||v_i||^2 = squared_norms[i]. Each trial feeds the tokens
 * through a fresh, independently seeded sketch and tallies every slot. The
 * target is squared_norms[i] / sum.
 */
DistributionReport sampler_distribution(std::span<const double> squared_norms, std::size_t trials,
                                        std::uint64_t seed, std::size_t slots = 4);

/**
 * @brief Monte Carlo check of one cluster's reservoir.
 *
 * All keys must fall in the cluster opened by the first key (within
 * @p delta of it). Target is the multiplicity of each distinct key over the
 * stream length.
 */
DistributionReport reservoir_distribution(std::span<const Vec> keys, double delta, std::size_t trials,
                                          std::uint64_t seed, std::size_t slots = 4);

/// The two fixed checks: weights {1,2,3,4} for the sampler and keys {a, a, b} for the reservoir.
DistributionReport distribution_test(DistributionKind kind, std::size_t trials, std::uint64_t seed);

}  // namespace subgen::harness
