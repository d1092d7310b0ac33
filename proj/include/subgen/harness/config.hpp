// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subgen/compressors.hpp"
#include "subgen/streamgen.hpp"
#include "subgen/subgen.hpp"

namespace subgen::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AuditLevel { off, invariants, distributions };

std::string_view to_string(AuditLevel level);

inline constexpr std::size_t kMinDistributionTrials = 10000;

/// Pass/fail gates evaluated on the metrics CSV.
struct Thresholds {
    /// Fraction of seeds whose final-step SubGen error is <= epsilon must reach error_bound_fraction.
    bool error_bound = false;
    double error_bound_fraction = 0.9;
    /// Final-step median SubGen error must be strictly below each listed policy's median.
    std::vector<PolicyKind> ordering_against;
    /// Every feasible baseline row must store within t + 1 vectors of SubGen.
    bool budget_match = true;
};

struct RunConfig {
    StreamSpec stream;
    bool adversarial = false;
    double adversarial_spacing = 2.5;

    AccuracyParams accuracy{0.5, 1.0, 0.25, 0.0};  ///< n_max <= 0 means "use stream.n"
    SizeConstants constants{1.0, 4.0};

    std::vector<PolicyKind> policies;  ///< baselines compared against SubGen
    std::size_t sink_prefix = 4;
    double recent_fraction = 0.5;

    AuditLevel audit = AuditLevel::off;
    std::size_t trials = 20000;
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds{1};
    std::size_t jobs = 1;
    bool record_wall_time = false;

    Thresholds thresholds;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;

    /// Accuracy params with n_max and delta/r resolved against the stream.
    AccuracyParams resolved_accuracy() const;
};

/// Sets one key from its textual value. Throws ConfigError on unknown keys or bad values.
void set_key(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});

RunConfig load_config(const std::string& path, RunConfig base = {});

/// "1-5,9,12-13" -> {1,2,3,4,5,9,12,13}
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace subgen::harness
