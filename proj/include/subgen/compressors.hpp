// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subgen/types.hpp"

namespace subgen {

enum class PolicyKind { subgen_offline, sink, h2o_lite, exact };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

/**
 * @brief Eviction policy parameters. Budget is in tokens.
 *
 * subgen_offline: last recent_r tokens plus k_centers greedy k-center picks
 *                 from the rest; requires recent_r + k_centers <= budget.
 * sink:           first sink_prefix plus last recent_r tokens; requires
 *                 sink_prefix + recent_r <= budget.
 * h2o_lite:       last recent_r plus the highest accumulated-attention
 *                 tokens, up to budget.
 * exact:          keeps everything.
 */
struct PolicyConfig {
    PolicyKind kind = PolicyKind::exact;
    std::size_t budget = 0;
    std::size_t recent_r = 0;
    std::size_t k_centers = 0;
    std::size_t sink_prefix = 0;

    void validate() const;
};

/// Tokens kept by a compressor. Positions are 1-based and strictly increasing.
struct RetainedCache {
    std::vector<std::size_t> kept_indices;
    ExactCache cache;
    std::size_t budget = 0;
};

/**
 * @brief Gonzalez farthest-point traversal.
 *
 * Starts from index 0; every following pick is the point farthest from its
 * nearest chosen center, lowest index on ties. Covering radius is within a
 * factor two of optimal.
 */
std::vector<std::size_t> greedy_k_center(std::span<const Vec> points, std::size_t k);

/// max over points of the distance to the nearest listed center.
double covering_radius(std::span<const Vec> points, std::span<const std::size_t> centers);

/**
 * @brief Applies an eviction policy to a full cache.
 *
 * @p queries are the per-step queries q_1..q_n; only h2o_lite reads them and
 * it requires one per cached token.
 */
RetainedCache compress(const ExactCache& cache, const PolicyConfig& cfg, std::span<const Vec> queries = {});

/// Exact attention over the retained rows.
AttnVector query_compressed(const RetainedCache& rc, std::span<const double> q);

}  // namespace subgen
