// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "subgen/types.hpp"

namespace subgen {

/// softmax(K q) over every cached key, with the max logit subtracted first.
Vec softmax_vector(const ExactCache& cache, std::span<const double> q);

/// softmax(K q)^T V. Throws "no tokens" on an empty cache.
AttnVector exact_attention(const ExactCache& cache, std::span<const double> q);

struct PowerIterationOptions {
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

/**
 * @brief Largest singular value of the matrix whose rows are @p rows.
 *
 * Power iteration on V^T V from the normalized all-ones vector. Stops when
 * the Rayleigh quotient changes by less than the relative tolerance.
 */
double operator_norm(std::span<const Vec> rows, PowerIterationOptions options = {});

/**
 * @brief ||z - Attn|| / (||softmax(K q)|| * ||V||_op).
 *
 * Returns 0 when both numerator and denominator vanish and +inf when only
 * the denominator does (all value rows zero but z is not).
 */
double spectral_error(const AttnVector& approx, const ExactCache& cache, std::span<const double> q);

/// Same quantity when the exact output, softmax norm and operator norm are already known.
double spectral_error(std::span<const double> approx,
                      std::span<const double> exact,
                      double softmax_norm,
                      double values_operator_norm);

}  // namespace subgen
