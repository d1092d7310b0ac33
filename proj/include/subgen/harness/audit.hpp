// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subgen/subgen.hpp"
#include "subgen/types.hpp"

namespace subgen::harness {

/// Invariant ids reported by the auditor.
namespace invariant {
inline constexpr const char* kMassSum = "mass_sum";                  // mu == sum ||v||^2
inline constexpr const char* kCountSum = "count_sum";                // sum of cluster counts == n
inline constexpr const char* kReservoirRadius = "reservoir_radius";  // reservoir keys within delta of center
inline constexpr const char* kCenterSeparation = "center_separation";
inline constexpr const char* kClusterBound = "cluster_bound";        // m' <= m
}  // namespace invariant

struct Violation {
    std::uint64_t step = 0;
    std::string invariant;
    std::string detail;
};

struct AuditReport {
    std::uint64_t steps_checked = 0;
    std::uint64_t violation_count = 0;
    std::vector<Violation> first_violations;  ///< first failure of each invariant, in step order
    std::size_t max_clusters = 0;

    bool pass() const { return violation_count == 0; }
};

/**
 * @brief Checks the sketch invariants after every update.
 *
 * Keeps an independent running sum of squared value norms to compare
 * against the sampler's mass.
 */
class InvariantAuditor {
public:
    /// @p cluster_bound enables the m' <= m check.
    explicit InvariantAuditor(std::optional<std::size_t> cluster_bound = std::nullopt,
                              double relative_mass_tolerance = 1e-6, double slack = 1e-9);

    /// Call after state.update(k, v).
    void observe(const SubGen& state, std::span<const double> v);

    const AuditReport& report() const { return m_report; }

private:
    void fail(const char* id, std::string detail);

    std::optional<std::size_t> m_cluster_bound;
    double m_mass_tolerance;
    double m_slack;
    double m_shadow_mass = 0.0;
    std::size_t m_centers_checked = 0;
    AuditReport m_report;
};

/// Feeds @p stream through a fresh SubGen and audits every step.
AuditReport audit_invariants(std::span<const TokenTriplet> stream, const SubGenConfig& config, std::uint64_t seed,
                             std::optional<std::size_t> cluster_bound = std::nullopt);

}  // namespace subgen::harness
