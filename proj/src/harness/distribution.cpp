// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/harness/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subgen/harness/config.hpp"
#include "subgen/rng.hpp"
#include "subgen/subgen.hpp"

namespace subgen::harness {

namespace {

double total_variation(std::span<const double> p, std::span<const double> q) {
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        tv += std::abs(p[i] - q[i]);
    }
    return tv / 2.0;
}

void check_trials(std::size_t trials) {
    if (trials < kMinDistributionTrials) {
        throw std::invalid_argument("distribution tests need at least 10000 trials");
    }
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return CounterRng(seed).split(trial).next_u64(); }

}  // namespace

std::string_view to_string(DistributionKind kind) {
    return kind == DistributionKind::sampler ? "sampler" : "reservoir";
}

DistributionReport sampler_distribution(std::span<const double> squared_norms, std::size_t trials,
                                        std::uint64_t seed, std::size_t slots) {
    check_trials(trials);
    if (squared_norms.empty() || slots == 0) {
        throw std::invalid_argument("sampler distribution needs tokens and slots");
    }
    double mass = 0.0;
    for (double w : squared_norms) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("squared norms must be nonnegative");
        }
        mass += w;
    }
    if (!(mass > 0.0)) {
        throw std::invalid_argument("sampler distribution needs positive total mass");
    }

    // Token i: k = (i, 0), v = (sqrt(w_i), 0). The key's first coordinate identifies the slot.
    const std::size_t n = squared_norms.size();
    std::vector<TokenTriplet> stream(n);
    for (std::size_t i = 0; i < n; ++i) {
        stream[i].k = {static_cast<double>(i), 0.0};
        stream[i].v = {std::sqrt(squared_norms[i]), 0.0};
    }

    DistributionReport report;
    report.kind = DistributionKind::sampler;
    report.trials = trials;
    report.target.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.target[i] = squared_norms[i] / mass;
    }
    std::vector<std::uint64_t> tally(n, 0);
    const SubGenConfig config{0.5, 1, slots};
    for (std::size_t trial = 0; trial < trials; ++trial) {
        SubGen state(2, config, trial_seed(seed, trial));
        for (const auto& token : stream) {
            state.update(token.k, token.v);
        }
        for (std::size_t slot = 0; slot < slots; ++slot) {
            ++tally[static_cast<std::size_t>(state.sampler().key(slot)[0])];
        }
    }
    report.draws = static_cast<std::uint64_t>(trials) * slots;
    report.empirical.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.empirical[i] = static_cast<double>(tally[i]) / static_cast<double>(report.draws);
    }
    report.total_variation = total_variation(report.empirical, report.target);
    return report;
}

DistributionReport reservoir_distribution(std::span<const Vec> keys, double delta, std::size_t trials,
                                          std::uint64_t seed, std::size_t slots) {
    check_trials(trials);
    if (keys.empty() || slots == 0) {
        throw std::invalid_argument("reservoir distribution needs keys and slots");
    }
    const std::size_t d = keys.front().size();
    for (const Vec& k : keys) {
        if (k.size() != d || distance(k, keys.front()) > delta) {
            throw std::invalid_argument("all keys must fall in the first key's cluster");
        }
    }
    std::vector<Vec> distinct;
    std::vector<double> multiplicity;
    for (const Vec& k : keys) {
        const auto it = std::find(distinct.begin(), distinct.end(), k);
        if (it == distinct.end()) {
            distinct.push_back(k);
            multiplicity.push_back(1.0);
        } else {
            multiplicity[static_cast<std::size_t>(it - distinct.begin())] += 1.0;
        }
    }

    DistributionReport report;
    report.kind = DistributionKind::reservoir;
    report.trials = trials;
    for (double c : multiplicity) {
        report.target.push_back(c / static_cast<double>(keys.size()));
    }
    std::vector<std::uint64_t> tally(distinct.size(), 0);
    const SubGenConfig config{delta, slots, 1};
    const Vec value(d, 1.0);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        SubGen state(d, config, trial_seed(seed, trial));
        for (const Vec& k : keys) {
            state.update(k, value);
        }
        const ClusterSummary& cluster = state.normalizer().clusters().front();
        for (std::size_t j = 0; j < slots; ++j) {
            const auto sample = cluster.sample(j, d);
            for (std::size_t i = 0; i < distinct.size(); ++i) {
                if (std::equal(sample.begin(), sample.end(), distinct[i].begin())) {
                    ++tally[i];
                    break;
                }
            }
        }
    }
    report.draws = static_cast<std::uint64_t>(trials) * slots;
    for (std::uint64_t c : tally) {
        report.empirical.push_back(static_cast<double>(c) / static_cast<double>(report.draws));
    }
    report.total_variation = total_variation(report.empirical, report.target);
    return report;
}

DistributionReport distribution_test(DistributionKind kind, std::size_t trials, std::uint64_t seed) {
    if (kind == DistributionKind::sampler) {
        const double weights[] = {1.0, 2.0, 3.0, 4.0};
        return sampler_distribution(weights, trials, seed);
    }
    const std::vector<Vec> keys = {{0.0, 0.0}, {0.0, 0.0}, {0.1, 0.0}};
    return reservoir_distribution(keys, 1.0, trials, seed);
}

}  // namespace subgen::harness
