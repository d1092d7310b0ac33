// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/snapshot.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "subgen/byteio.hpp"

namespace subgen {

namespace {
constexpr std::array<std::uint8_t, 4> kMagic = {'S', 'B', 'G', 'N'};
// Sanity bound on header-declared sizes so corrupt input fails before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
}  // namespace

std::vector<std::uint8_t> encode_snapshot(const SubGen& state) {
    const NormalizerDS& normalizer = state.normalizer();
    const ValueSampler& sampler = state.sampler();
    const std::size_t d = state.d();

    byteio::Writer w;
    w.raw(kMagic);
    w.u32(kSnapshotVersion);
    w.u64(d);
    w.u64(state.config().t);
    w.u64(state.config().s);
    w.u64(normalizer.size());
    w.u64(state.n());
    w.f64(state.config().delta);
    w.f64(sampler.mu());
    for (const auto& c : normalizer.clusters()) {
        w.f64s(c.center);
    }
    for (const auto& c : normalizer.clusters()) {
        w.f64(static_cast<double>(c.count));
    }
    for (const auto& c : normalizer.clusters()) {
        w.f64s(c.reservoir);
    }
    for (std::size_t slot = 0; slot < sampler.s(); ++slot) {
        w.f64s(sampler.key(slot));
        w.f64s(sampler.value(slot));
    }
    w.u64(state.rng().key());
    w.u64(state.rng().counter());
    return std::move(w.buffer());
}

SubGen decode_snapshot(std::span<const std::uint8_t> bytes) {
    byteio::Reader r(bytes);
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw std::runtime_error("not a SubGen snapshot");
    }
    const std::uint32_t version = r.u32();
    if (version != kSnapshotVersion) {
        throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
    }
    const std::uint64_t d = r.u64();
    const std::uint64_t t = r.u64();
    const std::uint64_t s = r.u64();
    const std::uint64_t m = r.u64();
    const std::uint64_t n = r.u64();
    const double delta = r.f64();
    const double mu = r.f64();
    if (d == 0 || t == 0 || s == 0 || d > kMaxElements || t > kMaxElements || s > kMaxElements ||
        m > kMaxElements || (m + 1) * (t + 1) * d > kMaxElements) {
        throw std::runtime_error("snapshot header out of range");
    }

    SubGenConfig config{delta, static_cast<std::size_t>(t), static_cast<std::size_t>(s)};
    NormalizerDS normalizer(delta, config.t, static_cast<std::size_t>(d));
    auto& clusters = normalizer.mutable_clusters();
    clusters.resize(m);
    for (auto& c : clusters) {
        c.center.resize(d);
        r.f64s(c.center);
    }
    for (auto& c : clusters) {
        c.count = static_cast<std::uint64_t>(r.f64());
    }
    for (auto& c : clusters) {
        c.reservoir.resize(t * d);
        r.f64s(c.reservoir);
    }
    std::vector<double> keys(s * d);
    std::vector<double> values(s * d);
    for (std::uint64_t slot = 0; slot < s; ++slot) {
        r.f64s(std::span<double>(keys.data() + slot * d, d));
        r.f64s(std::span<double>(values.data() + slot * d, d));
    }
    const std::uint64_t rng_key = r.u64();
    const std::uint64_t rng_counter = r.u64();
    if (r.remaining() != 0) {
        throw std::runtime_error("trailing bytes after snapshot");
    }
    ValueSampler sampler = ValueSampler::restore(config.s, static_cast<std::size_t>(d), mu, mu > 0.0,
                                                 std::move(keys), std::move(values));
    return SubGen(config, std::move(normalizer), std::move(sampler), n, CounterRng(rng_key, rng_counter));
}

void write_snapshot(std::ostream& out, const SubGen& state) {
    const auto bytes = encode_snapshot(state);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("failed to write snapshot");
    }
}

SubGen read_snapshot(std::istream& in) {
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_snapshot(bytes);
}

}  // namespace subgen
