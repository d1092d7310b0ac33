// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace subgen {

using Vec = std::vector<double>;

/// One stream element. All three vectors share the dimension d.
struct TokenTriplet {
    Vec q;
    Vec k;
    Vec v;

    std::size_t dim() const { return k.size(); }
};

/// Full stacked key/value matrices, one row per token.
struct ExactCache {
    std::vector<Vec> keys;
    std::vector<Vec> values;
    std::size_t d = 0;

    ExactCache() = default;
    explicit ExactCache(std::size_t dim) : d(dim) {}

    std::size_t size() const { return keys.size(); }
    bool empty() const { return keys.empty(); }

    void append(std::span<const double> k, std::span<const double> v);
};

/// Estimated or exact attention output.
struct AttnVector {
    Vec z;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm2(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline bool all_finite(std::span<const double> a) {
    for (double x : a) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

/// Throws std::invalid_argument unless the triplet is well formed.
void validate(const TokenTriplet& token);

inline void ExactCache::append(std::span<const double> k, std::span<const double> v) {
    if (d == 0) {
        d = k.size();
    }
    if (k.size() != d || v.size() != d) {
        throw std::invalid_argument("dimension mismatch");
    }
    keys.emplace_back(k.begin(), k.end());
    values.emplace_back(v.begin(), v.end());
}

}  // namespace subgen
