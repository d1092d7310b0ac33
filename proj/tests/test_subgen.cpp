// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "subgen/attention.hpp"
#include "subgen/snapshot.hpp"
#include "subgen/streamgen.hpp"
#include "subgen/subgen.hpp"

namespace subgen {
namespace {

double relative_distance(const Vec& a, const Vec& b) {
    Vec diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
    }
    return norm2(diff) / norm2(b);
}

// ---------------------------------------------------------------- sizing

TEST(DeriveSizes, AllFactorsCollapseToOne) {
    const AccuracyParams params{1.0, 1.0, 1e-300, std::numbers::e};
    const auto sizes = derive_sizes(params, 4, {1.0, 1.0});
    EXPECT_EQ(sizes.t, 1u);
    EXPECT_EQ(sizes.s, 4u);
}

TEST(DeriveSizes, FormulaWithUnitConstants) {
    // 4 * e * ln 4096 = 90.44..., 4 * 16 = 64
    const AccuracyParams params{0.5, 2.0, 0.25, 4096};
    const auto sizes = derive_sizes(params, 16, {1.0, 1.0});
    EXPECT_EQ(sizes.t, 91u);
    EXPECT_EQ(sizes.s, 64u);
}

TEST(DeriveSizes, DefaultConstantsScaleSampler) {
    const AccuracyParams params{0.5, 2.0, 0.25, 4096};
    const auto sizes = derive_sizes(params, 16);
    EXPECT_EQ(sizes.t, 91u);
    EXPECT_EQ(sizes.s, 64u);
    EXPECT_EQ(derive_sizes(params, 16, {1.0, 4.0}).s, 256u);
}

TEST(DeriveSizes, ReservoirCappedAtStreamLength) {
    const AccuracyParams params{0.1, 1.0, 0.5, 10};
    EXPECT_EQ(derive_sizes(params, 2).t, 10u);
}

TEST(DeriveSizes, RejectsOverflowingRegime) {
    const AccuracyParams params{0.5, 20.0, 20.0, 4096};  // delta * r = 400
    try {
        derive_sizes(params, 4);
        FAIL() << "expected an exception";
    } catch (const std::domain_error& e) {
        EXPECT_STREQ(e.what(), "clusterability regime violated");
    }
    EXPECT_THROW(derive_sizes({1.5, 1.0, 1.0, 10}, 4), std::invalid_argument);
    EXPECT_THROW(derive_sizes({0.5, 1.0, 0.0, 10}, 4), std::invalid_argument);
}

// ---------------------------------------------------------------- normalizer

TEST(NormalizerDS, FirstKeyOpensCluster) {
    NormalizerDS ds(1.0, 5, 2);
    CounterRng rng(1);
    ds.update(Vec{0.0, 0.0}, rng);
    ASSERT_EQ(ds.size(), 1u);
    const auto& c = ds.clusters()[0];
    EXPECT_EQ(c.center, (Vec{0.0, 0.0}));
    EXPECT_EQ(c.count, 1u);
    EXPECT_EQ(c.reservoir, std::vector<double>(10, 0.0));
}

TEST(NormalizerDS, JoinReplacesEachSlotWithProbabilityOneOverCount) {
    const std::size_t t = 20000;
    NormalizerDS ds(1.0, t, 2);
    CounterRng rng(2);
    ds.update(Vec{0.0, 0.0}, rng);
    EXPECT_EQ(ds.update(Vec{0.5, 0.0}, rng), 0u);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds.clusters()[0].count, 2u);
    std::size_t replaced = 0;
    for (std::size_t j = 0; j < t; ++j) {
        const auto s = ds.clusters()[0].sample(j, 2);
        replaced += (s[0] == 0.5) ? 1 : 0;
    }
    // binomial(20000, 1/2): sd ~ 0.0035
    EXPECT_NEAR(static_cast<double>(replaced) / t, 0.5, 0.02);
}

TEST(NormalizerDS, FarKeyOpensNewCluster) {
    NormalizerDS ds(1.0, 3, 2);
    CounterRng rng(3);
    ds.update(Vec{0.0, 0.0}, rng);
    ds.update(Vec{3.0, 0.0}, rng);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_DOUBLE_EQ(distance(ds.clusters()[0].center, ds.clusters()[1].center), 3.0);
}

TEST(NormalizerDS, TiesGoToLowestIndex) {
    NormalizerDS ds(1.5, 1, 1);
    CounterRng rng(4);
    ds.update(Vec{-1.0}, rng);
    ds.update(Vec{1.0}, rng);  // 2 > 1.5 apart: second cluster
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.update(Vec{0.0}, rng), 0u);
    EXPECT_EQ(ds.clusters()[0].count, 2u);
}

// ---------------------------------------------------------------- sampler

TEST(ValueSampler, FirstTokenFillsEverySlot) {
    ValueSampler sampler(6, 2);
    CounterRng rng(5);
    sampler.update(Vec{1.0, 2.0}, Vec{0.5, 0.5}, rng);
    for (std::size_t slot = 0; slot < 6; ++slot) {
        EXPECT_EQ(Vec(sampler.key(slot).begin(), sampler.key(slot).end()), (Vec{1.0, 2.0}));
    }
    EXPECT_EQ(sampler.mu(), 0.0);  // mass is added by the caller
}

TEST(ValueSampler, SecondTokenTakesSlotsByMass) {
    const std::size_t s = 20000;
    ValueSampler sampler(s, 1);
    CounterRng rng(6);
    sampler.update(Vec{1.0}, Vec{1.0}, rng);
    sampler.add_mass(1.0);
    sampler.update(Vec{2.0}, Vec{std::sqrt(3.0)}, rng);
    sampler.add_mass(3.0);
    std::size_t second = 0;
    for (std::size_t slot = 0; slot < s; ++slot) {
        second += sampler.key(slot)[0] == 2.0 ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(second) / s, 0.75, 0.02);
}

TEST(ValueSampler, ZeroValueLeavesSamplerUnchanged) {
    ValueSampler sampler(4, 2);
    CounterRng rng(7);
    sampler.update(Vec{1.0, 1.0}, Vec{0.0, 0.0}, rng);
    EXPECT_FALSE(sampler.filled());
    sampler.update(Vec{1.0, 1.0}, Vec{1.0, 0.0}, rng);
    sampler.add_mass(1.0);
    const auto before = rng;
    sampler.update(Vec{5.0, 5.0}, Vec{0.0, 0.0}, rng);
    EXPECT_EQ(rng, before);
    EXPECT_EQ(sampler.mu(), 1.0);
    for (std::size_t slot = 0; slot < 4; ++slot) {
        EXPECT_EQ(sampler.key(slot)[0], 1.0);
    }
}

// ---------------------------------------------------------------- SubGen

TEST(SubGen, FirstTokenOutputIsItsValue) {
    SubGen sketch(3, {0.5, 4, 8}, 1);
    const TokenTriplet token{{0.1, 0.2, 0.3}, {1.0, -1.0, 0.5}, {2.0, 3.0, -4.0}};
    const auto z = sketch.process_token(token);
    EXPECT_LE(relative_distance(z.z, token.v), 1e-12);
    EXPECT_EQ(sketch.n(), 1u);
}

TEST(SubGen, IdenticalTripletsReturnValue) {
    SubGen sketch(2, {0.5, 3, 5}, 2);
    const TokenTriplet token{{0.7, -0.2}, {1.0, 2.0}, {-1.0, 0.5}};
    for (int i = 0; i < 100; ++i) {
        const auto z = sketch.process_token(token);
        ASSERT_LE(relative_distance(z.z, token.v), 1e-12) << "step " << i;
    }
}

TEST(SubGen, EqualValuesGiveOutputAlongValue) {
    // With every sampled value equal to v the output is v scaled by the
    // ratio of the sampler's and the clusters' partition estimates.
    const std::size_t s = 6;
    const std::size_t t = 4;
    SubGen sketch(2, {0.3, t, s}, 3);
    CounterRng rng(30);
    const Vec v{1.5, -0.5};
    for (int i = 0; i < 40; ++i) {
        sketch.update(oracle::gaussian_vec(2, rng), v);
    }
    const Vec q{0.4, -0.3};
    const Vec z = sketch.query(q).z;
    // Independent recomputation of the scale factor.
    double sampler_sum = 0.0;
    for (std::size_t slot = 0; slot < s; ++slot) {
        sampler_sum += std::exp(dot(q, sketch.sampler().key(slot)));
    }
    const double z_scalar = static_cast<double>(sketch.n()) / s * sampler_sum;
    double tau = 0.0;
    for (const auto& c : sketch.normalizer().clusters()) {
        double inner = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            inner += std::exp(dot(q, c.sample(j, 2)));
        }
        tau += static_cast<double>(c.count) / t * inner;
    }
    const Vec want{v[0] * z_scalar / tau, v[1] * z_scalar / tau};
    EXPECT_LE(relative_distance(z, want), 1e-12);
}

TEST(SubGen, QueryBeforeAnyTokenThrows) {
    SubGen sketch(2, {0.5, 2, 2}, 4);
    try {
        sketch.query(Vec{1.0, 0.0});
        FAIL() << "expected an exception";
    } catch (const std::logic_error& e) {
        EXPECT_STREQ(e.what(), "empty stream");
    }
}

TEST(SubGen, RejectsMalformedTokens) {
    SubGen sketch(2, {0.5, 2, 2}, 4);
    EXPECT_THROW(sketch.update(Vec{1.0}, Vec{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(sketch.update(Vec{NAN, 1.0}, Vec{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(sketch.process_token({{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}), std::invalid_argument);
}

TEST(SubGen, AllZeroValuesGiveZeroOutput) {
    SubGen sketch(2, {0.5, 2, 3}, 5);
    const auto z = sketch.process_token({{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}});
    EXPECT_EQ(z.z, (Vec{0.0, 0.0}));
    EXPECT_EQ(sketch.cluster_count(), 1u);
}

TEST(SubGen, TwoClusterStreamMeetsErrorBoundAtMostSteps) {
    StreamSpec spec;
    spec.n = 256;
    spec.d = 8;
    spec.m = 2;
    spec.delta = 0.25;
    spec.r = 1.0;
    spec.center_separation = 2.0;
    spec.seed = 11;
    const auto stream = generate(spec);
    const AccuracyParams params{0.5, spec.r, spec.delta, static_cast<double>(spec.n)};
    const auto sizes = derive_sizes(params, spec.d, {1.0, 4.0});
    SubGen sketch(spec.d, {spec.delta, sizes.t, sizes.s}, 99);
    ExactCache cache(spec.d);
    std::size_t within = 0;
    for (const auto& token : stream) {
        const auto z = sketch.process_token(token);
        cache.append(token.k, token.v);
        within += spectral_error(z, cache, token.q) <= params.epsilon ? 1 : 0;
    }
    EXPECT_GE(static_cast<double>(within) / spec.n, 0.95);
}

TEST(SubGen, InvariantsHoldOnEveryStep) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        StreamSpec spec;
        spec.n = 400;
        spec.d = 4;
        spec.m = 5;
        spec.delta = 0.3;
        spec.center_separation = 1.0;
        spec.value_profile = ValueNormProfile::powerlaw;
        spec.seed = seed;
        const auto stream = generate(spec);
        SubGen sketch(spec.d, {spec.delta, 7, 9}, seed);
        double shadow_mass = 0.0;
        for (const auto& token : stream) {
            sketch.update(token.k, token.v);
            shadow_mass += squared_norm(token.v);
            ASSERT_LE(std::abs(sketch.sampler().mu() - shadow_mass), 1e-6 * shadow_mass);
            ASSERT_EQ(sketch.normalizer().total_count(), sketch.n());
            const auto& clusters = sketch.normalizer().clusters();
            for (std::size_t a = 0; a < clusters.size(); ++a) {
                for (std::size_t j = 0; j < 7; ++j) {
                    ASSERT_LE(distance(clusters[a].sample(j, spec.d), clusters[a].center), spec.delta + 1e-9);
                }
                for (std::size_t b = 0; b < a; ++b) {
                    ASSERT_GT(distance(clusters[a].center, clusters[b].center), spec.delta - 1e-9);
                }
            }
            ASSERT_LE(clusters.size(), spec.m);
        }
    }
}

TEST(SubGen, SameSeedIsBitIdentical) {
    StreamSpec spec;
    spec.n = 300;
    spec.d = 6;
    spec.m = 4;
    spec.seed = 21;
    const auto stream = generate(spec);
    SubGen a(spec.d, {spec.delta, 5, 7}, 1234);
    SubGen b(spec.d, {spec.delta, 5, 7}, 1234);
    for (const auto& token : stream) {
        const auto za = a.process_token(token);
        const auto zb = b.process_token(token);
        ASSERT_EQ(za.z, zb.z);
    }
    EXPECT_EQ(encode_snapshot(a), encode_snapshot(b));
}

TEST(SubGen, StabilizationDoesNotChangeAnswer) {
    StreamSpec spec;
    spec.n = 500;
    spec.d = 8;
    spec.m = 3;
    spec.r = 2.0;
    spec.center_separation = 3.0;
    spec.seed = 3;
    const auto stream = generate(spec);
    SubGen sketch(spec.d, {spec.delta, 10, 20}, 77);
    for (const auto& token : stream) {
        sketch.update(token.k, token.v);
        const Vec shifted = sketch.query(token.q).z;
        const Vec raw = sketch.query_unshifted(token.q).z;
        ASSERT_LE(relative_distance(shifted, raw), 1e-9);
    }
}

TEST(SubGen, LargeLogitsStayFinite) {
    SubGen sketch(1, {0.1, 2, 2}, 8);
    sketch.update(Vec{1000.0}, Vec{1.0});
    sketch.update(Vec{-1000.0}, Vec{2.0});
    const auto z = sketch.query(Vec{1.0});
    EXPECT_TRUE(all_finite(z.z));
    EXPECT_TRUE(std::isfinite(sketch.log_partition_estimate(Vec{1.0})));
}

// ---------------------------------------------------------------- memory

TEST(MemoryFootprint, CountsStoredVectors) {
    const std::size_t t = 5;
    const std::size_t s = 7;
    SubGen sketch(4, {0.5, t, s}, 1);
    sketch.update(Vec{0.0, 0.0, 0.0, 0.0}, Vec{1.0, 0.0, 0.0, 0.0});
    const auto fp = sketch.memory_footprint();
    EXPECT_EQ(fp.vectors_stored, (t + 1) + 2 * s);
    EXPECT_EQ(fp.scalars_stored, 3u);
    EXPECT_EQ(fp.bytes_estimate, fp.vectors_stored * 4 * 8 + fp.scalars_stored * 8);
}

TEST(MemoryFootprint, BoundedOnClusterableStreams) {
    StreamSpec spec;
    spec.n = 2000;
    spec.d = 4;
    spec.m = 6;
    spec.delta = 0.2;
    spec.center_separation = 1.0;
    spec.seed = 5;
    const std::size_t t = 9;
    const std::size_t s = 11;
    SubGen sketch(spec.d, {spec.delta, t, s}, 5);
    for (const auto& token : generate(spec)) {
        sketch.update(token.k, token.v);
        ASSERT_LE(sketch.memory_footprint().vectors_stored, spec.m * (t + 1) + 2 * s);
    }
}

TEST(MemoryFootprint, IndependentOfStreamLength) {
    const auto run = [](std::size_t n) {
        StreamSpec spec;
        spec.n = n;
        spec.d = 4;
        spec.m = 8;
        spec.delta = 0.25;
        spec.center_separation = 1.0;
        spec.seed = 17;
        SubGen sketch(spec.d, {spec.delta, 12, 16}, 17);
        for (const auto& token : generate(spec)) {
            sketch.update(token.k, token.v);
        }
        return sketch.memory_footprint().vectors_stored;
    };
    EXPECT_EQ(run(1u << 12), run(1u << 16));
}

}  // namespace
}  // namespace subgen
