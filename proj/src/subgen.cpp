// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/subgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subgen {

void AccuracyParams::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    }
    if (!(r > 0.0) || !(delta > 0.0) || !(n_max > 0.0)) {
        throw std::invalid_argument("r, delta and n_max must be positive");
    }
}

SketchSizes derive_sizes(const AccuracyParams& params, std::size_t d, SizeConstants constants) {
    params.validate();
    if (d == 0) {
        throw std::invalid_argument("dimension must be positive");
    }
    if (!(constants.c_t > 0.0) || !(constants.c_s > 0.0)) {
        throw std::invalid_argument("size constants must be positive");
    }
    if (params.delta * params.r > 300.0) {
        throw std::domain_error("clusterability regime violated");
    }
    const double inv_eps2 = 1.0 / (params.epsilon * params.epsilon);
    const double log_n = std::log(std::max(params.n_max, 2.0));
    const double t_real = constants.c_t * inv_eps2 * std::exp(2.0 * params.delta * params.r) * log_n;
    const double s_real = constants.c_s * inv_eps2 * static_cast<double>(d);

    const double t_cap = std::ceil(params.n_max);
    SketchSizes sizes;
    sizes.t = static_cast<std::size_t>(std::max(1.0, std::min(std::ceil(t_real), t_cap)));
    sizes.s = static_cast<std::size_t>(std::max(1.0, std::ceil(s_real)));
    return sizes;
}

// ---------------------------------------------------------------------------

NormalizerDS::NormalizerDS(double delta, std::size_t t, std::size_t d) : m_delta(delta), m_t(t), m_d(d) {
    if (!(delta > 0.0) || t == 0 || d == 0) {
        throw std::invalid_argument("NormalizerDS requires delta > 0, t >= 1, d >= 1");
    }
}

std::pair<std::size_t, double> NormalizerDS::nearest(std::span<const double> k) const {
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_clusters.size(); ++i) {
        const double sq = squared_distance(m_clusters[i].center, k);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, std::sqrt(best_sq)};
}

std::size_t NormalizerDS::update(std::span<const double> k, CounterRng& rng) {
    if (k.size() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!m_clusters.empty()) {
        const auto [index, dist] = nearest(k);
        if (dist <= m_delta) {
            ClusterSummary& cluster = m_clusters[index];
            ++cluster.count;
            const double p = 1.0 / static_cast<double>(cluster.count);
            for (std::size_t j = 0; j < m_t; ++j) {
                if (rng.bernoulli(p)) {
                    std::copy(k.begin(), k.end(), cluster.reservoir.begin() + static_cast<std::ptrdiff_t>(j * m_d));
                }
            }
            return index;
        }
    }
    ClusterSummary fresh;
    fresh.center.assign(k.begin(), k.end());
    fresh.reservoir.resize(m_t * m_d);
    for (std::size_t j = 0; j < m_t; ++j) {
        std::copy(k.begin(), k.end(), fresh.reservoir.begin() + static_cast<std::ptrdiff_t>(j * m_d));
    }
    fresh.count = 1;
    m_clusters.push_back(std::move(fresh));
    return m_clusters.size() - 1;
}

std::uint64_t NormalizerDS::total_count() const {
    std::uint64_t total = 0;
    for (const ClusterSummary& c : m_clusters) {
        total += c.count;
    }
    return total;
}

// ---------------------------------------------------------------------------

ValueSampler::ValueSampler(std::size_t s, std::size_t d)
    : m_keys(s * d, 0.0), m_values(s * d, 0.0), m_value_sq(s, 0.0), m_s(s), m_d(d) {
    if (s == 0 || d == 0) {
        throw std::invalid_argument("ValueSampler requires s >= 1, d >= 1");
    }
}

void ValueSampler::assign(std::size_t slot, std::span<const double> k, std::span<const double> v, double v_sq) {
    std::copy(k.begin(), k.end(), m_keys.begin() + static_cast<std::ptrdiff_t>(slot * m_d));
    std::copy(v.begin(), v.end(), m_values.begin() + static_cast<std::ptrdiff_t>(slot * m_d));
    m_value_sq[slot] = v_sq;
}

void ValueSampler::update(std::span<const double> k, std::span<const double> v, CounterRng& rng) {
    if (k.size() != m_d || v.size() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    const double v_sq = squared_norm(v);
    if (v_sq == 0.0) {
        return;
    }
    const double p = v_sq / (m_mu + v_sq);
    for (std::size_t slot = 0; slot < m_s; ++slot) {
        if (rng.bernoulli(p)) {
            assign(slot, k, v, v_sq);
        }
    }
    m_filled = true;
}

ValueSampler ValueSampler::restore(std::size_t s, std::size_t d, double mu, bool filled,
                                   std::vector<double> keys, std::vector<double> values) {
    ValueSampler sampler(s, d);
    if (keys.size() != s * d || values.size() != s * d) {
        throw std::invalid_argument("sampler payload size mismatch");
    }
    sampler.m_keys = std::move(keys);
    sampler.m_values = std::move(values);
    sampler.m_mu = mu;
    sampler.m_filled = filled;
    for (std::size_t slot = 0; slot < s; ++slot) {
        sampler.m_value_sq[slot] = squared_norm(sampler.value(slot));
    }
    return sampler;
}

// ---------------------------------------------------------------------------

SubGen::SubGen(std::size_t d, SubGenConfig config, std::uint64_t seed)
    : m_config(config),
      m_normalizer(config.delta, config.t, d),
      m_sampler(config.s, d),
      m_d(d),
      m_rng(seed) {}

SubGen::SubGen(SubGenConfig config, NormalizerDS normalizer, ValueSampler sampler, std::uint64_t n,
               CounterRng rng)
    : m_config(config),
      m_normalizer(std::move(normalizer)),
      m_sampler(std::move(sampler)),
      m_n(n),
      m_d(m_normalizer.d()),
      m_rng(rng) {
    if (m_sampler.d() != m_d || m_sampler.s() != config.s || m_normalizer.t() != config.t) {
        throw std::invalid_argument("inconsistent SubGen parts");
    }
}

void SubGen::update(std::span<const double> k, std::span<const double> v) {
    if (k.size() != m_d || v.size() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!all_finite(k) || !all_finite(v)) {
        throw std::invalid_argument("token contains non-finite entries");
    }
    m_normalizer.update(k, m_rng);
    m_sampler.update(k, v, m_rng);
    m_sampler.add_mass(squared_norm(v));
    ++m_n;
}

AttnVector SubGen::process_token(const TokenTriplet& token) {
    validate(token);
    if (token.dim() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    update(token.k, token.v);
    return query(token.q);
}

AttnVector SubGen::query(std::span<const double> q) const { return query_with_shift(q, true); }

AttnVector SubGen::query_unshifted(std::span<const double> q) const { return query_with_shift(q, false); }

AttnVector SubGen::query_with_shift(std::span<const double> q, bool shifted) const {
    if (m_n == 0) {
        throw std::logic_error("empty stream");
    }
    if (q.size() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    const std::size_t t = m_config.t;
    const std::size_t s = m_config.s;
    const auto& clusters = m_normalizer.clusters();

    std::vector<double> reservoir_logits(clusters.size() * t);
    std::vector<double> sampler_logits(m_sampler.filled() ? s : 0);
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t j = 0; j < t; ++j) {
            const double logit = dot(q, clusters[c].sample(j, m_d));
            reservoir_logits[c * t + j] = logit;
            shift = std::max(shift, logit);
        }
    }
    for (std::size_t slot = 0; slot < sampler_logits.size(); ++slot) {
        const double logit = dot(q, m_sampler.key(slot));
        sampler_logits[slot] = logit;
        shift = std::max(shift, logit);
    }
    if (!shifted) {
        shift = 0.0;
    }

    // tau = sum_c (n_c / t) * sum_j exp(<q, k_cj> - shift)
    double tau = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        double inner = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            inner += std::exp(reservoir_logits[c * t + j] - shift);
        }
        tau += static_cast<double>(clusters[c].count) * inner / static_cast<double>(t);
    }

    // z = (mu / s) * sum_slots exp(<q, k> - shift) / ||v||^2 * v
    AttnVector out{Vec(m_d, 0.0)};
    for (std::size_t slot = 0; slot < sampler_logits.size(); ++slot) {
        const double weight = std::exp(sampler_logits[slot] - shift) / m_sampler.value_squared_norm(slot);
        const auto v = m_sampler.value(slot);
        for (std::size_t i = 0; i < m_d; ++i) {
            out.z[i] += weight * v[i];
        }
    }
    const double scale = m_sampler.mu() / (static_cast<double>(s) * tau);
    for (double& x : out.z) {
        x *= scale;
    }
    return out;
}

double SubGen::log_partition_estimate(std::span<const double> q) const {
    if (m_n == 0) {
        throw std::logic_error("empty stream");
    }
    if (q.size() != m_d) {
        throw std::invalid_argument("dimension mismatch");
    }
    const std::size_t t = m_config.t;
    const auto& clusters = m_normalizer.clusters();
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& cluster : clusters) {
        for (std::size_t j = 0; j < t; ++j) {
            shift = std::max(shift, dot(q, cluster.sample(j, m_d)));
        }
    }
    double tau = 0.0;
    for (const auto& cluster : clusters) {
        double inner = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            inner += std::exp(dot(q, cluster.sample(j, m_d)) - shift);
        }
        tau += static_cast<double>(cluster.count) * inner / static_cast<double>(t);
    }
    return shift + std::log(tau);
}

MemoryFootprint SubGen::memory_footprint() const {
    MemoryFootprint fp;
    const std::uint64_t clusters = m_normalizer.size();
    fp.vectors_stored = clusters * (m_config.t + 1) + 2 * m_config.s;
    // One count per cluster, plus mu and n.
    fp.scalars_stored = clusters + 2;
    fp.bytes_estimate = fp.vectors_stored * m_d * sizeof(double) + fp.scalars_stored * sizeof(double);
    return fp;
}

}  // namespace subgen
