// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "subgen/attention.hpp"

namespace subgen {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::subgen_offline:
            return "subgen_offline";
        case PolicyKind::sink:
            return "sink";
        case PolicyKind::h2o_lite:
            return "h2o_lite";
        case PolicyKind::exact:
            return "exact";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
    for (PolicyKind kind : {PolicyKind::subgen_offline, PolicyKind::sink, PolicyKind::h2o_lite, PolicyKind::exact}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

void PolicyConfig::validate() const {
    switch (kind) {
        case PolicyKind::subgen_offline:
            if (recent_r + k_centers > budget) {
                throw std::invalid_argument("subgen_offline: recent_r + k_centers exceeds budget");
            }
            break;
        case PolicyKind::sink:
            if (sink_prefix + recent_r > budget) {
                throw std::invalid_argument("sink: sink_prefix + recent_r exceeds budget");
            }
            break;
        case PolicyKind::h2o_lite:
            if (recent_r > budget) {
                throw std::invalid_argument("h2o_lite: recent_r exceeds budget");
            }
            break;
        case PolicyKind::exact:
            break;
    }
}

std::vector<std::size_t> greedy_k_center(std::span<const Vec> points, std::size_t k) {
    if (points.empty()) {
        throw std::invalid_argument("greedy_k_center needs at least one point");
    }
    if (k > points.size()) {
        throw std::invalid_argument("greedy_k_center: k exceeds number of points");
    }
    std::vector<std::size_t> centers;
    if (k == 0) {
        return centers;
    }
    centers.reserve(k);
    centers.push_back(0);
    std::vector<double> nearest_sq(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        nearest_sq[i] = squared_distance(points[i], points[0]);
    }
    while (centers.size() < k) {
        std::size_t far = 0;
        double far_sq = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (nearest_sq[i] > far_sq) {
                far_sq = nearest_sq[i];
                far = i;
            }
        }
        // Once every point coincides with a center the farthest one is at
        // distance 0; fall back to the lowest unchosen index so the picks
        // stay distinct.
        if (far_sq == 0.0) {
            std::vector<bool> chosen(points.size(), false);
            for (std::size_t c : centers) {
                chosen[c] = true;
            }
            far = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        centers.push_back(far);
        for (std::size_t i = 0; i < points.size(); ++i) {
            nearest_sq[i] = std::min(nearest_sq[i], squared_distance(points[i], points[far]));
        }
    }
    return centers;
}

double covering_radius(std::span<const Vec> points, std::span<const std::size_t> centers) {
    if (centers.empty()) {
        throw std::invalid_argument("covering_radius needs at least one center");
    }
    double radius = 0.0;
    for (const Vec& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c : centers) {
            best = std::min(best, squared_distance(p, points[c]));
        }
        radius = std::max(radius, best);
    }
    return std::sqrt(radius);
}

namespace {

RetainedCache gather(const ExactCache& cache, std::vector<std::size_t> zero_based, std::size_t budget) {
    std::sort(zero_based.begin(), zero_based.end());
    zero_based.erase(std::unique(zero_based.begin(), zero_based.end()), zero_based.end());
    RetainedCache rc;
    rc.budget = budget;
    rc.cache = ExactCache(cache.d);
    rc.kept_indices.reserve(zero_based.size());
    for (std::size_t i : zero_based) {
        rc.kept_indices.push_back(i + 1);
        rc.cache.append(cache.keys[i], cache.values[i]);
    }
    return rc;
}

std::vector<std::size_t> keep_sink(std::size_t n, const PolicyConfig& cfg) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < std::min(cfg.sink_prefix, n); ++i) {
        kept.push_back(i);
    }
    for (std::size_t i = n - std::min(cfg.recent_r, n); i < n; ++i) {
        kept.push_back(i);
    }
    return kept;
}

std::vector<std::size_t> keep_subgen_offline(const ExactCache& cache, const PolicyConfig& cfg) {
    const std::size_t n = cache.size();
    const std::size_t window_start = n - std::min(cfg.recent_r, n);
    std::vector<std::size_t> kept;
    for (std::size_t i = window_start; i < n; ++i) {
        kept.push_back(i);
    }
    const std::size_t k = std::min(cfg.k_centers, window_start);
    if (k > 0) {
        std::span<const Vec> older(cache.keys.data(), window_start);
        for (std::size_t c : greedy_k_center(older, k)) {
            kept.push_back(c);
        }
    }
    return kept;
}

// Streams the cache through a heavy-hitter eviction loop. At step i the new
// token joins, q_i's softmax over the retained set is added to every
// retained token's score, then while over budget the lowest-scoring token
// outside the recent window is dropped (earliest on ties). Scores of
// dropped tokens are forgotten.
std::vector<std::size_t> keep_h2o_lite(const ExactCache& cache, const PolicyConfig& cfg,
                                       std::span<const Vec> queries) {
    const std::size_t n = cache.size();
    if (queries.size() != n) {
        throw std::invalid_argument("h2o_lite needs one query per cached token");
    }
    std::vector<std::size_t> retained;
    std::vector<double> scores;
    std::vector<double> logits;
    retained.reserve(cfg.budget + 1);
    scores.reserve(cfg.budget + 1);
    for (std::size_t i = 0; i < n; ++i) {
        retained.push_back(i);
        scores.push_back(0.0);

        logits.resize(retained.size());
        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < retained.size(); ++j) {
            logits[j] = dot(cache.keys[retained[j]], queries[i]);
            max_logit = std::max(max_logit, logits[j]);
        }
        double total = 0.0;
        for (double& l : logits) {
            l = std::exp(l - max_logit);
            total += l;
        }
        for (std::size_t j = 0; j < retained.size(); ++j) {
            scores[j] += logits[j] / total;
        }

        while (retained.size() > cfg.budget) {
            const std::size_t window_start = (i + 1) - std::min(cfg.recent_r, i + 1);
            std::size_t victim = retained.size();
            for (std::size_t j = 0; j < retained.size(); ++j) {
                if (retained[j] >= window_start) {
                    break;
                }
                if (victim == retained.size() || scores[j] < scores[victim]) {
                    victim = j;
                }
            }
            if (victim == retained.size()) {
                break;
            }
            retained.erase(retained.begin() + static_cast<std::ptrdiff_t>(victim));
            scores.erase(scores.begin() + static_cast<std::ptrdiff_t>(victim));
        }
    }
    return retained;
}

}  // namespace

RetainedCache compress(const ExactCache& cache, const PolicyConfig& cfg, std::span<const Vec> queries) {
    cfg.validate();
    const std::size_t n = cache.size();
    if (cfg.kind == PolicyKind::exact || n <= cfg.budget) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return gather(cache, std::move(all), std::max(cfg.budget, n));
    }
    switch (cfg.kind) {
        case PolicyKind::sink:
            return gather(cache, keep_sink(n, cfg), cfg.budget);
        case PolicyKind::subgen_offline:
            return gather(cache, keep_subgen_offline(cache, cfg), cfg.budget);
        case PolicyKind::h2o_lite:
            return gather(cache, keep_h2o_lite(cache, cfg, queries), cfg.budget);
        case PolicyKind::exact:
            break;
    }
    throw std::logic_error("unreachable policy kind");
}

AttnVector query_compressed(const RetainedCache& rc, std::span<const double> q) {
    if (rc.cache.empty()) {
        throw std::invalid_argument("no tokens");
    }
    return exact_attention(rc.cache, q);
}

}  // namespace subgen
