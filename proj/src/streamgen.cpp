// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/streamgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "subgen/byteio.hpp"
#include "subgen/rng.hpp"

namespace subgen {

namespace {

constexpr int kMaxRejectionRounds = 10000;
constexpr std::array<std::uint8_t, 4> kStreamMagic = {'S', 'B', 'S', 'T'};
constexpr std::uint32_t kStreamVersion = 1;

// Child stream ids, fixed so streams stay reproducible across versions.
enum StreamId : std::uint64_t { kCenters = 1, kKeys = 2, kQueries = 3, kValues = 4, kDrift = 5, kLattice = 6 };

Vec random_direction(std::size_t d, CounterRng& rng) {
    Vec x(d);
    for (;;) {
        for (double& xi : x) {
            xi = rng.normal();
        }
        const double nx = norm2(x);
        if (nx > 1e-12) {
            for (double& xi : x) {
                xi /= nx;
            }
            return x;
        }
    }
}

Vec random_in_ball(std::size_t d, double radius, CounterRng& rng) {
    Vec x = random_direction(d, rng);
    const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    for (double& xi : x) {
        xi *= scale;
    }
    return x;
}

bool separated_from_all(const std::vector<Vec>& centers, std::size_t skip, std::span<const double> candidate,
                        double separation) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
        if (j != skip && distance(centers[j], candidate) < separation) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string_view to_string(ValueNormProfile profile) {
    switch (profile) {
        case ValueNormProfile::uniform:
            return "uniform";
        case ValueNormProfile::powerlaw:
            return "powerlaw";
        case ValueNormProfile::spiky:
            return "spiky";
    }
    return "unknown";
}

std::optional<ValueNormProfile> parse_value_norm_profile(std::string_view name) {
    for (auto p : {ValueNormProfile::uniform, ValueNormProfile::powerlaw, ValueNormProfile::spiky}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    return std::nullopt;
}

void StreamSpec::validate() const {
    if (n == 0 || d == 0 || m == 0) {
        throw std::invalid_argument("stream spec needs n, d, m >= 1");
    }
    if (m > n) {
        throw std::invalid_argument("stream spec needs m <= n");
    }
    if (!(r > 0.0) || !(delta >= 0.0) || !(drift >= 0.0) || !(query_scale > 0.0)) {
        throw std::invalid_argument("stream spec needs r > 0, delta >= 0, drift >= 0, query_scale > 0");
    }
    if (m > 1 && !(center_separation > delta)) {
        throw std::invalid_argument("stream spec needs center_separation > delta");
    }
    if (!(alpha >= 0.0) || !(spike_probability >= 0.0 && spike_probability <= 1.0) || !(spike_norm > 0.0)) {
        throw std::invalid_argument("invalid value norm profile parameters");
    }
}

std::vector<Vec> generate_centers(const StreamSpec& spec) {
    spec.validate();
    CounterRng rng = CounterRng(spec.seed).split(kCenters);
    double radius = std::max(spec.center_separation, 1e-12);
    int rounds = 0;
    std::vector<Vec> centers;
    while (centers.size() < spec.m) {
        int misses = 0;
        centers.clear();
        while (centers.size() < spec.m && misses < 100) {
            if (++rounds > kMaxRejectionRounds) {
                throw std::runtime_error("infeasible center separation");
            }
            Vec c = random_direction(spec.d, rng);
            for (double& x : c) {
                x *= radius;
            }
            if (separated_from_all(centers, centers.size(), c, spec.center_separation)) {
                centers.push_back(std::move(c));
                misses = 0;
            } else {
                ++misses;
            }
        }
        if (centers.size() < spec.m) {
            radius *= 1.5;
        }
    }
    return centers;
}

std::vector<TokenTriplet> generate(const StreamSpec& spec) {
    std::vector<Vec> centers = generate_centers(spec);
    const CounterRng root(spec.seed);
    CounterRng key_rng = root.split(kKeys);
    CounterRng query_rng = root.split(kQueries);
    CounterRng value_rng = root.split(kValues);
    CounterRng drift_rng = root.split(kDrift);

    std::vector<double> value_norms(spec.n, 1.0);
    switch (spec.value_profile) {
        case ValueNormProfile::uniform:
            break;
        case ValueNormProfile::powerlaw: {
            // Ranks are a seeded permutation so heavy values land anywhere in the stream.
            std::vector<std::size_t> ranks(spec.n);
            std::iota(ranks.begin(), ranks.end(), std::size_t{1});
            for (std::size_t i = spec.n; i > 1; --i) {
                std::swap(ranks[i - 1], ranks[value_rng.below(i)]);
            }
            for (std::size_t i = 0; i < spec.n; ++i) {
                value_norms[i] = std::pow(static_cast<double>(ranks[i]), -spec.alpha);
            }
            break;
        }
        case ValueNormProfile::spiky:
            for (double& norm : value_norms) {
                norm = value_rng.bernoulli(spec.spike_probability) ? spec.spike_norm : 1.0;
            }
            break;
    }

    std::vector<Vec> velocities;
    if (spec.drift > 0.0) {
        for (std::size_t c = 0; c < spec.m; ++c) {
            Vec dir = random_direction(spec.d, drift_rng);
            for (double& x : dir) {
                x *= spec.drift;
            }
            velocities.push_back(std::move(dir));
        }
    }

    std::vector<TokenTriplet> stream;
    stream.reserve(spec.n);
    Vec moved(spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const Vec& center = centers[i % spec.m];
        TokenTriplet token;
        token.k = center;
        if (spec.delta > 0.0) {
            const Vec offset = random_in_ball(spec.d, spec.delta / 2.0, key_rng);
            for (std::size_t j = 0; j < spec.d; ++j) {
                token.k[j] += offset[j];
            }
        }
        token.q = random_in_ball(spec.d, spec.r, query_rng);
        for (double& x : token.q) {
            x *= spec.query_scale;
        }
        token.v = random_direction(spec.d, value_rng);
        for (double& x : token.v) {
            x *= value_norms[i];
        }
        stream.push_back(std::move(token));

        for (std::size_t c = 0; c < velocities.size(); ++c) {
            for (std::size_t j = 0; j < spec.d; ++j) {
                moved[j] = centers[c][j] + velocities[c][j];
            }
            if (separated_from_all(centers, c, moved, spec.center_separation)) {
                centers[c] = moved;
            }
        }
    }
    return stream;
}

bool verify_clusterable(std::span<const Vec> keys, std::size_t m, double delta) {
    std::vector<const Vec*> centers;
    for (const Vec& k : keys) {
        bool joined = false;
        for (const Vec* c : centers) {
            if (distance(*c, k) <= delta) {
                joined = true;
                break;
            }
        }
        if (!joined) {
            centers.push_back(&k);
            if (centers.size() > m) {
                return false;
            }
        }
    }
    return true;
}

std::vector<TokenTriplet> generate_adversarial(std::size_t n, std::size_t d, std::uint64_t seed, double spacing,
                                               double r) {
    if (n == 0 || d == 0) {
        throw std::invalid_argument("adversarial stream needs n, d >= 1");
    }
    if (!(spacing > 0.0) || !(r > 0.0)) {
        throw std::invalid_argument("adversarial stream needs spacing > 0 and r > 0");
    }
    const CounterRng root(seed);
    CounterRng lattice_rng = root.split(kLattice);
    CounterRng query_rng = root.split(kQueries);
    CounterRng value_rng = root.split(kValues);

    // Smallest side length L with L^d >= n.
    std::uint64_t side = 1;
    while (std::pow(static_cast<double>(side), static_cast<double>(d)) < static_cast<double>(n)) {
        ++side;
    }
    const double cells = std::pow(static_cast<double>(side), static_cast<double>(d));

    std::vector<std::vector<std::uint64_t>> coords;
    coords.reserve(n);
    if (cells <= 8.0 * static_cast<double>(n)) {
        // Small lattice: partial Fisher-Yates over all cell indices.
        std::vector<std::uint64_t> cell_ids(static_cast<std::size_t>(cells));
        std::iota(cell_ids.begin(), cell_ids.end(), std::uint64_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(lattice_rng.below(cell_ids.size() - i));
            std::swap(cell_ids[i], cell_ids[j]);
            std::vector<std::uint64_t> c(d);
            std::uint64_t id = cell_ids[i];
            for (std::size_t a = 0; a < d; ++a) {
                c[a] = id % side;
                id /= side;
            }
            coords.push_back(std::move(c));
        }
    } else {
        std::set<std::vector<std::uint64_t>> seen;
        while (coords.size() < n) {
            std::vector<std::uint64_t> c(d);
            for (auto& x : c) {
                x = lattice_rng.below(side);
            }
            if (seen.insert(c).second) {
                coords.push_back(std::move(c));
            }
        }
    }

    const double middle = (static_cast<double>(side) - 1.0) / 2.0;
    std::vector<TokenTriplet> stream;
    stream.reserve(n);
    for (const auto& c : coords) {
        TokenTriplet token;
        token.k.resize(d);
        for (std::size_t a = 0; a < d; ++a) {
            token.k[a] = (static_cast<double>(c[a]) - middle) * spacing;
        }
        token.q = random_in_ball(d, r, query_rng);
        token.v = random_direction(d, value_rng);
        stream.push_back(std::move(token));
    }
    return stream;
}

void write_stream(std::ostream& out, std::span<const TokenTriplet> stream) {
    byteio::Writer w;
    w.raw(kStreamMagic);
    w.u32(kStreamVersion);
    const std::size_t d = stream.empty() ? 0 : stream.front().dim();
    w.u64(stream.size());
    w.u64(d);
    for (const auto& token : stream) {
        if (token.q.size() != d || token.k.size() != d || token.v.size() != d) {
            throw std::invalid_argument("dimension mismatch");
        }
        w.f64s(token.q);
        w.f64s(token.k);
        w.f64s(token.v);
    }
    const auto& bytes = w.buffer();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("failed to write stream");
    }
}

std::vector<TokenTriplet> read_stream(std::istream& in) {
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    byteio::Reader r(bytes);
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kStreamMagic.begin())) {
        throw std::runtime_error("not a stream file");
    }
    if (r.u32() != kStreamVersion) {
        throw std::runtime_error("unsupported stream version");
    }
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    if (n != 0 && (d == 0 || r.remaining() / 24 / d < n)) {
        throw std::runtime_error("truncated stream file");
    }
    std::vector<TokenTriplet> stream(n);
    for (auto& token : stream) {
        token.q.resize(d);
        token.k.resize(d);
        token.v.resize(d);
        r.f64s(token.q);
        r.f64s(token.k);
        r.f64s(token.v);
    }
    if (r.remaining() != 0) {
        throw std::runtime_error("trailing bytes after stream");
    }
    return stream;
}

}  // namespace subgen
