// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "subgen/harness/config.hpp"

namespace subgen::harness {

inline constexpr std::string_view kSubGenPolicy = "subgen";

/// One CSV row: seed, step, policy, spectral_error, vectors_stored, m_prime, wall_time_ns.
struct MetricRow {
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    std::string policy;
    double spectral_error = 0.0;
    std::uint64_t vectors_stored = 0;
    std::uint64_t m_prime = 0;
    std::uint64_t wall_time_ns = 0;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

std::string to_csv(std::span<const MetricRow> rows);
std::vector<MetricRow> parse_csv(std::string_view text);

struct Quantiles {
    std::size_t count = 0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles; all zero for an empty input.
Quantiles quantiles(std::vector<double> values);

struct PolicySummary {
    std::string policy;
    Quantiles final_step;  ///< one value per seed, at that seed's last step
    Quantiles all_steps;
    std::uint64_t final_vectors_stored_max = 0;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Summary {
    std::vector<PolicySummary> policies;
    std::vector<CheckResult> checks;
    std::uint64_t budget_infeasible_rows = 0;
    bool pass = true;
};

/**
 * @brief Per-policy error quantiles and threshold checks.
 *
 * A pure function of the rows: the same CSV always yields the same summary.
 * @p reservoir_size is t, the budget-matching granularity.
 */
Summary summarize(std::span<const MetricRow> rows, const Thresholds& thresholds, double epsilon,
                  std::size_t reservoir_size);

nlohmann::json to_json(const Summary& summary);

}  // namespace subgen::harness
