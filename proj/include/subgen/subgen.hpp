// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "subgen/rng.hpp"
#include "subgen/types.hpp"

namespace subgen {

/// Accuracy targets that size the sketch.
struct AccuracyParams {
    double epsilon = 0.5;    ///< target spectral error, in (0, 1)
    double r = 1.0;          ///< bound on query norms
    double delta = 0.25;     ///< cluster admission radius
    double n_max = 2.0;      ///< expected maximum stream length

    void validate() const;
};

/// Multipliers applied to the asymptotic reservoir and sampler sizes.
struct SizeConstants {
    double c_t = 1.0;
    double c_s = 1.0;
};

struct SketchSizes {
    std::size_t t = 0;  ///< keys kept per cluster reservoir
    std::size_t s = 0;  ///< (key, value) pairs kept by the value sampler
};

/**
 * @brief Reservoir and sampler sizes for a target accuracy.
 *
 * t = ceil(c_t * eps^-2 * exp(2 delta r) * ln(max(n_max, 2)))
 * s = ceil(c_s * eps^-2 * d)
 *
 * t is capped at ceil(n_max). s is not: the sampler draws with replacement
 * and needs on the order of d draws whatever the stream length. Throws when delta * r > 300 since exp(2 delta r)
 * is no longer representable and the clustering regime is meaningless.
 */
SketchSizes derive_sizes(const AccuracyParams& params, std::size_t d, SizeConstants constants = {});

/// One cluster of the partition-function sketch.
struct ClusterSummary {
    Vec center;                 ///< first key admitted to the cluster
    std::vector<double> reservoir;  ///< t keys, row-major t x d
    std::uint64_t count = 0;    ///< keys assigned so far

    std::span<const double> sample(std::size_t j, std::size_t d) const {
        return {reservoir.data() + j * d, d};
    }
};

/**
 * @brief Online delta-threshold clustering with a uniform reservoir per cluster.
 *
 * A key joins its nearest center (lowest index on ties) when within delta,
 * otherwise it opens a new cluster whose reservoir is t copies of itself.
 * Joining a cluster of post-increment size n' replaces each reservoir slot
 * independently with probability 1/n'. Clusters are never merged or evicted.
 */
class NormalizerDS {
public:
    NormalizerDS() = default;
    NormalizerDS(double delta, std::size_t t, std::size_t d);

    /// Returns the index of the cluster that received @p k.
    std::size_t update(std::span<const double> k, CounterRng& rng);

    /// Nearest center by linear scan, as (index, distance). Requires at least one cluster.
    std::pair<std::size_t, double> nearest(std::span<const double> k) const;

    const std::vector<ClusterSummary>& clusters() const { return m_clusters; }
    std::size_t size() const { return m_clusters.size(); }
    double delta() const { return m_delta; }
    std::size_t t() const { return m_t; }
    std::size_t d() const { return m_d; }
    std::uint64_t total_count() const;

    /// Unchecked access for snapshot restore and fault-injection tests.
    std::vector<ClusterSummary>& mutable_clusters() { return m_clusters; }

private:
    std::vector<ClusterSummary> m_clusters;
    double m_delta = 0.0;
    std::size_t m_t = 0;
    std::size_t m_d = 0;
};

/**
 * @brief Streaming row-norm sampler for exp(K q)^T V.
 *
 * Keeps s slots, each an independent draw of (k_i, v_i) with probability
 * ||v_i||^2 / mu. Tokens with v = 0 are never sampled.
 */
class ValueSampler {
public:
    ValueSampler() = default;
    ValueSampler(std::size_t s, std::size_t d);

    /// Coin flips against the pre-update mass. Does not touch mu.
    void update(std::span<const double> k, std::span<const double> v, CounterRng& rng);

    void add_mass(double squared_value_norm) { m_mu += squared_value_norm; }

    bool filled() const { return m_filled; }
    std::size_t s() const { return m_s; }
    std::size_t d() const { return m_d; }
    double mu() const { return m_mu; }

    std::span<const double> key(std::size_t slot) const { return {m_keys.data() + slot * m_d, m_d}; }
    std::span<const double> value(std::size_t slot) const { return {m_values.data() + slot * m_d, m_d}; }
    double value_squared_norm(std::size_t slot) const { return m_value_sq[slot]; }

    /// Rebuilds a sampler from serialized parts. Slot norms are recomputed.
    static ValueSampler restore(std::size_t s, std::size_t d, double mu, bool filled,
                                std::vector<double> keys, std::vector<double> values);

private:
    void assign(std::size_t slot, std::span<const double> k, std::span<const double> v, double v_sq);

    std::vector<double> m_keys;    // s x d
    std::vector<double> m_values;  // s x d
    std::vector<double> m_value_sq;
    double m_mu = 0.0;
    std::size_t m_s = 0;
    std::size_t m_d = 0;
    bool m_filled = false;
};

struct SubGenConfig {
    double delta = 0.25;
    std::size_t t = 1;
    std::size_t s = 1;
};

struct MemoryFootprint {
    std::uint64_t vectors_stored = 0;
    std::uint64_t scalars_stored = 0;
    std::uint64_t bytes_estimate = 0;
};

/**
 * @brief Sublinear streaming attention state.
 *
 * update() incorporates one (k, v) pair; query() answers with the current
 * sketch. process_token() does both in stream order, so the answer at step n
 * covers all n tokens including the newest.
 *
 * Not thread safe for writes. Concurrent const queries are fine.
 */
class SubGen {
public:
    SubGen(std::size_t d, SubGenConfig config, std::uint64_t seed);

    /// Restores a state from its parts; used by the snapshot reader.
    SubGen(SubGenConfig config, NormalizerDS normalizer, ValueSampler sampler, std::uint64_t n,
           CounterRng rng);

    void update(std::span<const double> k, std::span<const double> v);

    AttnVector query(std::span<const double> q) const;

    AttnVector process_token(const TokenTriplet& token);

    /// log of the partition-function estimate tau for @p q.
    double log_partition_estimate(std::span<const double> q) const;

    /// Query without the shared exponent shift. Only valid when raw exp does not overflow.
    AttnVector query_unshifted(std::span<const double> q) const;

    MemoryFootprint memory_footprint() const;

    std::size_t d() const { return m_d; }
    std::uint64_t n() const { return m_n; }
    std::size_t cluster_count() const { return m_normalizer.size(); }
    const SubGenConfig& config() const { return m_config; }
    const NormalizerDS& normalizer() const { return m_normalizer; }
    const ValueSampler& sampler() const { return m_sampler; }
    const CounterRng& rng() const { return m_rng; }

    NormalizerDS& mutable_normalizer() { return m_normalizer; }

private:
    AttnVector query_with_shift(std::span<const double> q, bool shifted) const;

    SubGenConfig m_config;
    NormalizerDS m_normalizer;
    ValueSampler m_sampler;
    std::uint64_t m_n = 0;
    std::size_t m_d = 0;
    CounterRng m_rng;
};

}  // namespace subgen
