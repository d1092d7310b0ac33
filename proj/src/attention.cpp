// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subgen {

void validate(const TokenTriplet& token) {
    const std::size_t d = token.k.size();
    if (d == 0) {
        throw std::invalid_argument("token dimension must be at least 1");
    }
    if (token.q.size() != d || token.v.size() != d) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!all_finite(token.q) || !all_finite(token.k) || !all_finite(token.v)) {
        throw std::invalid_argument("token contains non-finite entries");
    }
}

namespace {

void check_query(const ExactCache& cache, std::span<const double> q) {
    if (cache.empty()) {
        throw std::invalid_argument("no tokens");
    }
    if (q.size() != cache.d || cache.keys.size() != cache.values.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!all_finite(q)) {
        throw std::invalid_argument("query contains non-finite entries");
    }
}

}  // namespace

Vec softmax_vector(const ExactCache& cache, std::span<const double> q) {
    check_query(cache, q);
    Vec weights(cache.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cache.size(); ++i) {
        weights[i] = dot(cache.keys[i], q);
        max_logit = std::max(max_logit, weights[i]);
    }
    double total = 0.0;
    for (double& w : weights) {
        w = std::exp(w - max_logit);
        total += w;
    }
    for (double& w : weights) {
        w /= total;
    }
    return weights;
}

AttnVector exact_attention(const ExactCache& cache, std::span<const double> q) {
    const Vec weights = softmax_vector(cache, q);
    AttnVector out{Vec(cache.d, 0.0)};
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const Vec& v = cache.values[i];
        for (std::size_t j = 0; j < cache.d; ++j) {
            out.z[j] += weights[i] * v[j];
        }
    }
    return out;
}

double operator_norm(std::span<const Vec> rows, PowerIterationOptions options) {
    if (rows.empty()) {
        throw std::invalid_argument("operator_norm of an empty matrix");
    }
    const std::size_t d = rows.front().size();
    for (const Vec& row : rows) {
        if (row.size() != d) {
            throw std::invalid_argument("dimension mismatch");
        }
    }
    if (d == 0) {
        return 0.0;
    }

    // Gram matrix once; the iteration then costs O(d^2) instead of O(n d).
    std::vector<double> gram(d * d, 0.0);
    for (const Vec& row : rows) {
        for (std::size_t a = 0; a < d; ++a) {
            const double ra = row[a];
            if (ra == 0.0) {
                continue;
            }
            for (std::size_t b = a; b < d; ++b) {
                gram[a * d + b] += ra * row[b];
            }
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            gram[a * d + b] = gram[b * d + a];
        }
    }

    Vec x(d, 1.0 / std::sqrt(static_cast<double>(d)));
    Vec y(d);
    double lambda = 0.0;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) {
                acc += gram[a * d + b] * x[b];
            }
            y[a] = acc;
        }
        const double next_lambda = dot(x, y);
        const double ny = norm2(y);
        if (ny == 0.0) {
            // All-ones start vector is in the null space; restart on a basis vector.
            if (iter == 0) {
                bool restarted = false;
                for (std::size_t a = 0; a < d && !restarted; ++a) {
                    if (gram[a * d + a] > 0.0) {
                        std::fill(x.begin(), x.end(), 0.0);
                        x[a] = 1.0;
                        restarted = true;
                    }
                }
                if (restarted) {
                    continue;
                }
            }
            return 0.0;
        }
        for (std::size_t a = 0; a < d; ++a) {
            x[a] = y[a] / ny;
        }
        if (std::abs(next_lambda - lambda) <= options.tolerance * std::abs(next_lambda)) {
            lambda = next_lambda;
            break;
        }
        lambda = next_lambda;
    }
    // Final Rayleigh quotient with the converged vector.
    for (std::size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
            acc += gram[a * d + b] * x[b];
        }
        y[a] = acc;
    }
    lambda = std::max(lambda, dot(x, y));
    return std::sqrt(std::max(lambda, 0.0));
}

double spectral_error(std::span<const double> approx,
                      std::span<const double> exact,
                      double softmax_norm,
                      double values_operator_norm) {
    if (approx.size() != exact.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
    const double numerator = distance(approx, exact);
    const double denominator = softmax_norm * values_operator_norm;
    if (denominator == 0.0) {
        return numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return numerator / denominator;
}

double spectral_error(const AttnVector& approx, const ExactCache& cache, std::span<const double> q) {
    const Vec weights = softmax_vector(cache, q);
    const AttnVector exact = exact_attention(cache, q);
    return spectral_error(approx.z, exact.z, norm2(weights), operator_norm(cache.values));
}

}  // namespace subgen
