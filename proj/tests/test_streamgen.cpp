// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "subgen/streamgen.hpp"
#include "subgen/subgen.hpp"

namespace subgen {
namespace {

StreamSpec base_spec(std::uint64_t seed) {
    StreamSpec spec;
    spec.n = 800;
    spec.d = 6;
    spec.m = 5;
    spec.delta = 0.4;
    spec.r = 1.5;
    spec.center_separation = 1.2;
    spec.seed = seed;
    return spec;
}

std::vector<Vec> keys_of(const std::vector<TokenTriplet>& stream) {
    std::vector<Vec> keys;
    for (const auto& token : stream) {
        keys.push_back(token.k);
    }
    return keys;
}

TEST(Generate, SingleClusterWithZeroRadius) {
    StreamSpec spec;
    spec.n = 20;
    spec.d = 3;
    spec.m = 1;
    spec.delta = 0.0;
    spec.seed = 1;
    const auto stream = generate(spec);
    ASSERT_EQ(stream.size(), 20u);
    for (const auto& token : stream) {
        EXPECT_EQ(token.k, stream[0].k);
    }
    EXPECT_TRUE(verify_clusterable(keys_of(stream), 1, 1e-12));
}

TEST(Generate, ClusterDiameterWithinDelta) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto spec = base_spec(seed);
        const auto stream = generate(spec);
        for (std::size_t a = 0; a < stream.size(); ++a) {
            for (std::size_t b = a + spec.m; b < stream.size(); b += spec.m) {
                ASSERT_LE(distance(stream[a].k, stream[b].k), spec.delta + 1e-12);
            }
        }
    }
}

TEST(Generate, CentersAreSeparated) {
    const auto spec = base_spec(2);
    const auto centers = generate_centers(spec);
    ASSERT_EQ(centers.size(), spec.m);
    for (std::size_t a = 0; a < centers.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            EXPECT_GE(distance(centers[a], centers[b]), spec.center_separation);
        }
    }
}

TEST(Generate, QueryNormsBounded) {
    auto spec = base_spec(3);
    spec.query_scale = 2.0;
    for (const auto& token : generate(spec)) {
        ASSERT_LE(norm2(token.q), spec.r * spec.query_scale + 1e-12);
    }
}

TEST(Generate, OnlineClusteringFindsExactlyM) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto spec = base_spec(seed);
        const auto stream = generate(spec);
        SubGen sketch(spec.d, {spec.delta, 2, 2}, seed);
        for (const auto& token : stream) {
            sketch.update(token.k, token.v);
        }
        EXPECT_EQ(sketch.cluster_count(), spec.m);
        EXPECT_TRUE(verify_clusterable(keys_of(stream), spec.m, spec.delta));
    }
}

TEST(Generate, ValueProfiles) {
    auto spec = base_spec(4);
    for (const auto& token : generate(spec)) {
        ASSERT_NEAR(norm2(token.v), 1.0, 1e-12);
    }

    spec.value_profile = ValueNormProfile::powerlaw;
    std::vector<double> norms;
    for (const auto& token : generate(spec)) {
        norms.push_back(norm2(token.v));
    }
    std::sort(norms.begin(), norms.end(), std::greater<>());
    for (std::size_t i = 0; i < norms.size(); ++i) {
        ASSERT_NEAR(norms[i], std::pow(static_cast<double>(i + 1), -spec.alpha), 1e-12);
    }

    spec.value_profile = ValueNormProfile::spiky;
    spec.spike_probability = 0.1;
    std::size_t spikes = 0;
    for (const auto& token : generate(spec)) {
        const double norm = norm2(token.v);
        ASSERT_TRUE(std::abs(norm - 1.0) < 1e-12 || std::abs(norm - spec.spike_norm) < 1e-9);
        spikes += norm > 1.5 ? 1 : 0;
    }
    // binomial(800, 0.1): mean 80, sd ~8.5
    EXPECT_GT(spikes, 40u);
    EXPECT_LT(spikes, 120u);
}

TEST(Generate, SeedDeterminesStream) {
    const auto a = generate(base_spec(9));
    const auto b = generate(base_spec(9));
    const auto c = generate(base_spec(10));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].k, b[i].k);
        ASSERT_EQ(a[i].q, b[i].q);
        ASSERT_EQ(a[i].v, b[i].v);
    }
    EXPECT_NE(a[0].k, c[0].k);
}

TEST(Generate, DriftMovesCentersButKeepsSeparation) {
    auto spec = base_spec(5);
    spec.n = 4000;
    spec.drift = 1e-3;
    const auto stream = generate(spec);
    // first and last key of cluster 0 sit about n / m * drift apart
    const double moved = distance(stream[0].k, stream[spec.n - spec.m].k);
    EXPECT_GT(moved, 0.75 * static_cast<double>(spec.n / spec.m - 1) * spec.drift - spec.delta);
    // keys from any one window of m consecutive tokens are still separated clusters
    for (std::size_t start = 0; start + spec.m <= stream.size(); start += 97) {
        for (std::size_t a = start; a < start + spec.m; ++a) {
            for (std::size_t b = start; b < a; ++b) {
                ASSERT_GT(distance(stream[a].k, stream[b].k), spec.center_separation - spec.delta - 2 * spec.drift * spec.m);
            }
        }
    }
}

TEST(Generate, RejectsBadSpecs) {
    auto spec = base_spec(1);
    spec.m = 0;
    EXPECT_THROW(generate(spec), std::invalid_argument);
    spec = base_spec(1);
    spec.m = spec.n + 1;
    EXPECT_THROW(generate(spec), std::invalid_argument);
    spec = base_spec(1);
    spec.center_separation = spec.delta;
    EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(Generate, InfeasibleSeparationIsReported) {
    // A circle in one dimension holds only two points.
    StreamSpec spec;
    spec.n = 10;
    spec.d = 1;
    spec.m = 3;
    spec.delta = 0.1;
    spec.seed = 1;
    try {
        generate(spec);
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "infeasible center separation");
    }
}

// ---------------------------------------------------------------- adversarial

TEST(Adversarial, KeysAreDistinctAndSpread) {
    const auto stream = generate_adversarial(300, 3, 7);
    std::set<Vec> keys;
    for (const auto& token : stream) {
        keys.insert(token.k);
        ASSERT_LE(norm2(token.q), 1.0 + 1e-12);
        ASSERT_NEAR(norm2(token.v), 1.0, 1e-12);
    }
    EXPECT_EQ(keys.size(), 300u);
    for (std::size_t a = 0; a < 60; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            ASSERT_GE(distance(stream[a].k, stream[b].k), 2.5 - 1e-12);
        }
    }
}

TEST(Adversarial, SparseLatticeBranch) {
    const auto stream = generate_adversarial(50, 16, 3);
    std::set<Vec> keys;
    for (const auto& token : stream) {
        keys.insert(token.k);
    }
    EXPECT_EQ(keys.size(), 50u);
}

TEST(Adversarial, EveryKeyOpensACluster) {
    const std::size_t n = 200;
    const auto stream = generate_adversarial(n, 4, 11);
    SubGen sketch(4, {1.0, 3, 5}, 11);
    for (const auto& token : stream) {
        sketch.update(token.k, token.v);
    }
    EXPECT_EQ(sketch.cluster_count(), n);
    // Singleton clusters make the normalizer exact.
    for (std::size_t i = 0; i < 10; ++i) {
        const Vec& q = stream[i].q;
        long double partition = 0.0L;
        for (const auto& token : stream) {
            partition += std::exp(static_cast<long double>(dot(q, token.k)));
        }
        EXPECT_NEAR(sketch.log_partition_estimate(q), static_cast<double>(std::log(partition)), 1e-9);
    }
}

// ---------------------------------------------------------------- files

TEST(StreamFile, RoundTrip) {
    const auto stream = generate(base_spec(12));
    std::stringstream buffer;
    write_stream(buffer, stream);
    const auto back = read_stream(buffer);
    ASSERT_EQ(back.size(), stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        ASSERT_EQ(back[i].q, stream[i].q);
        ASSERT_EQ(back[i].k, stream[i].k);
        ASSERT_EQ(back[i].v, stream[i].v);
    }
}

TEST(StreamFile, RejectsGarbage) {
    std::stringstream buffer("not a stream");
    EXPECT_THROW(read_stream(buffer), std::runtime_error);
}

TEST(ValueProfile, NamesRoundTrip) {
    for (auto p : {ValueNormProfile::uniform, ValueNormProfile::powerlaw, ValueNormProfile::spiky}) {
        EXPECT_EQ(parse_value_norm_profile(to_string(p)), p);
    }
    EXPECT_FALSE(parse_value_norm_profile("gaussian").has_value());
}

}  // namespace
}  // namespace subgen
