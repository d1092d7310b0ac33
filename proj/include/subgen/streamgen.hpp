// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "subgen/types.hpp"

namespace subgen {

enum class ValueNormProfile { uniform, powerlaw, spiky };

std::string_view to_string(ValueNormProfile profile);
std::optional<ValueNormProfile> parse_value_norm_profile(std::string_view name);

/// Parameters of a synthetic clusterable stream.
struct StreamSpec {
    std::size_t n = 1024;
    std::size_t d = 8;
    std::size_t m = 8;                ///< number of key clusters
    double delta = 0.25;              ///< max intra-cluster key diameter
    double r = 1.0;                   ///< max query norm
    ValueNormProfile value_profile = ValueNormProfile::uniform;
    double alpha = 1.5;               ///< power-law exponent, ||v|| ~ rank^-alpha
    double spike_probability = 0.01;  ///< spiky: chance a value is a spike
    double spike_norm = 10.0;         ///< spiky: norm of a spike (others have norm 1)
    double center_separation = 1.0;   ///< min distance between cluster centers
    double drift = 0.0;               ///< per-step center displacement
    double query_scale = 1.0;         ///< multiplies every query after sampling
    std::uint64_t seed = 0;

    void validate() const;
};

/**
 * @brief Generates a stream whose keys are (m, delta)-clusterable.
 *
 * Centers lie on a sphere whose radius starts at center_separation and grows
 * until m mutually separated centers are found by rejection. Token i belongs
 * to cluster i mod m and its key is the center plus a perturbation of norm at
 * most delta / 2. Queries are uniform in the ball of radius r, values have
 * uniform directions and norms from the profile.
 *
 * With drift > 0 each center moves along a fixed random direction by drift
 * per step, skipping a step when the move would break separation. The
 * diameter guarantee then only holds per instant, not across the stream.
 */
std::vector<TokenTriplet> generate(const StreamSpec& spec);

/// Centers the generator would place for @p spec, before any drift.
std::vector<Vec> generate_centers(const StreamSpec& spec);

/**
 * @brief One-sided clusterability check.
 *
 * Replays the delta-threshold online assignment and returns true iff it
 * opens at most m clusters. A true answer certifies that the keys admit a
 * partition into m groups of diameter at most 2 delta. A false answer does
 * not prove the keys are not (m, delta)-clusterable.
 */
bool verify_clusterable(std::span<const Vec> keys, std::size_t m, double delta);

/**
 * @brief Non-clusterable control stream.
 *
 * Keys are distinct points of a centered integer lattice scaled by
 * @p spacing, so every pair is at least @p spacing apart. Queries are
 * uniform in the ball of radius @p r and values are unit vectors.
 */
std::vector<TokenTriplet> generate_adversarial(std::size_t n, std::size_t d, std::uint64_t seed,
                                               double spacing = 2.5, double r = 1.0);

/// Stream file: "SBST", version u32, n u64, d u64, then n x (q, k, v) as f64, little-endian.
void write_stream(std::ostream& out, std::span<const TokenTriplet> stream);
std::vector<TokenTriplet> read_stream(std::istream& in);

}  // namespace subgen
