// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subgen/harness/audit.hpp"
#include "subgen/harness/config.hpp"
#include "subgen/harness/distribution.hpp"
#include "subgen/harness/summary.hpp"
#include "subgen/subgen.hpp"

namespace subgen::harness {

/// Powers of two up to n, plus n itself.
std::vector<std::uint64_t> step_schedule(std::uint64_t n);

struct SeedAudit {
    std::uint64_t seed = 0;
    AuditReport report;
};

struct ExperimentResult {
    SketchSizes sizes;
    std::vector<MetricRow> rows;     ///< sorted by (seed, step), policy order within a step
    std::vector<MetricRow> timings;  ///< same rows with measured wall time
    std::vector<SeedAudit> audits;
    std::vector<DistributionReport> distributions;
    Summary summary;

    bool audits_pass() const;
    bool distributions_pass() const;
    bool pass() const { return summary.pass && audits_pass() && distributions_pass(); }
};

/// The stream a seed runs on.
std::vector<TokenTriplet> stream_for_seed(const RunConfig& cfg, std::uint64_t seed);

/// Seed for the sketch's own generator, independent of the stream's.
std::uint64_t sketch_seed(std::uint64_t seed);

/**
 * @brief Runs SubGen and every configured baseline over each seed.
 *
 * At every scheduled step SubGen's output is scored against the exact
 * oracle, then each baseline is compressed to the token budget
 * floor(subgen_vectors / 2) and scored the same way.
 */
ExperimentResult run_experiment(const RunConfig& cfg);

/// Writes metrics.csv, timings.csv, summary.json and, when audits ran, audit.json.
void write_outputs(const ExperimentResult& result, const RunConfig& cfg);

nlohmann::json audit_json(const ExperimentResult& result);

}  // namespace subgen::harness
