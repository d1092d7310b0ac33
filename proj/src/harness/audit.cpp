// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/harness/audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subgen::harness {

InvariantAuditor::InvariantAuditor(std::optional<std::size_t> cluster_bound, double relative_mass_tolerance,
                                   double slack)
    : m_cluster_bound(cluster_bound), m_mass_tolerance(relative_mass_tolerance), m_slack(slack) {}

void InvariantAuditor::fail(const char* id, std::string detail) {
    ++m_report.violation_count;
    const bool seen = std::any_of(m_report.first_violations.begin(), m_report.first_violations.end(),
                                  [&](const Violation& v) { return v.invariant == id; });
    if (!seen) {
        m_report.first_violations.push_back({m_report.steps_checked, id, std::move(detail)});
    }
}

void InvariantAuditor::observe(const SubGen& state, std::span<const double> v) {
    ++m_report.steps_checked;
    m_shadow_mass += squared_norm(v);

    const double mu = state.sampler().mu();
    if (std::abs(mu - m_shadow_mass) > m_mass_tolerance * m_shadow_mass) {
        std::ostringstream os;
        os << "mu=" << mu << " expected " << m_shadow_mass;
        fail(invariant::kMassSum, os.str());
    }

    const NormalizerDS& normalizer = state.normalizer();
    const auto& clusters = normalizer.clusters();
    const std::uint64_t counted = normalizer.total_count();
    if (counted != state.n()) {
        std::ostringstream os;
        os << "sum of counts " << counted << " != n " << state.n();
        fail(invariant::kCountSum, os.str());
    }

    const std::size_t d = state.d();
    const double delta = normalizer.delta();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t j = 0; j < normalizer.t(); ++j) {
            const double dist = distance(clusters[c].sample(j, d), clusters[c].center);
            if (dist > delta + m_slack) {
                std::ostringstream os;
                os << "cluster " << c << " slot " << j << " at distance " << dist;
                fail(invariant::kReservoirRadius, os.str());
            }
        }
    }

    // Centers never move, so only pairs involving new centers need checking.
    for (std::size_t a = m_centers_checked; a < clusters.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            const double dist = distance(clusters[a].center, clusters[b].center);
            if (dist <= delta - m_slack) {
                std::ostringstream os;
                os << "centers " << b << " and " << a << " at distance " << dist;
                fail(invariant::kCenterSeparation, os.str());
            }
        }
    }
    m_centers_checked = clusters.size();

    m_report.max_clusters = std::max(m_report.max_clusters, clusters.size());
    if (m_cluster_bound && clusters.size() > *m_cluster_bound) {
        std::ostringstream os;
        os << clusters.size() << " clusters exceed bound " << *m_cluster_bound;
        fail(invariant::kClusterBound, os.str());
    }
}

AuditReport audit_invariants(std::span<const TokenTriplet> stream, const SubGenConfig& config, std::uint64_t seed,
                             std::optional<std::size_t> cluster_bound) {
    if (stream.empty()) {
        return {};
    }
    SubGen state(stream.front().dim(), config, seed);
    InvariantAuditor auditor(cluster_bound);
    for (const auto& token : stream) {
        state.update(token.k, token.v);
        auditor.observe(state, token.v);
    }
    return auditor.report();
}

}  // namespace subgen::harness
