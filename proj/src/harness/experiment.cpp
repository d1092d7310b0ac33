// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>
#include <tuple>

#include "subgen/attention.hpp"
#include "subgen/compressors.hpp"
#include "subgen/rng.hpp"
#include "subgen/streamgen.hpp"

namespace subgen::harness {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point start) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
}

PolicyConfig matched_policy(PolicyKind kind, std::size_t budget, const RunConfig& cfg) {
    PolicyConfig p;
    p.kind = kind;
    p.budget = budget;
    const auto recent = static_cast<std::size_t>(std::floor(static_cast<double>(budget) * cfg.recent_fraction));
    switch (kind) {
        case PolicyKind::sink:
            p.sink_prefix = std::min(cfg.sink_prefix, budget);
            p.recent_r = budget - p.sink_prefix;
            break;
        case PolicyKind::h2o_lite:
            p.recent_r = recent;
            break;
        case PolicyKind::subgen_offline:
            p.recent_r = recent;
            p.k_centers = budget - recent;
            break;
        case PolicyKind::exact:
            break;
    }
    return p;
}

struct SeedOutput {
    std::vector<MetricRow> rows;
    std::vector<MetricRow> timings;
    AuditReport audit;
};

SeedOutput run_seed(const RunConfig& cfg, const SketchSizes& sizes, std::uint64_t seed) {
    const std::vector<TokenTriplet> stream = stream_for_seed(cfg, seed);
    const std::size_t d = cfg.stream.d;
    SubGen sketch(d, SubGenConfig{cfg.stream.delta, sizes.t, sizes.s}, sketch_seed(seed));

    std::optional<std::size_t> cluster_bound;
    if (!cfg.adversarial && cfg.stream.drift == 0.0 && cfg.stream.center_separation > 2.0 * cfg.stream.delta) {
        cluster_bound = cfg.stream.m;
    }
    const bool auditing = cfg.audit != AuditLevel::off;
    InvariantAuditor auditor(cluster_bound);

    ExactCache cache(d);
    std::vector<Vec> queries;
    queries.reserve(stream.size());
    const auto schedule = step_schedule(stream.size());
    auto next_step = schedule.begin();

    SeedOutput out;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const TokenTriplet& token = stream[i];
        const std::uint64_t step = i + 1;
        const auto t0 = Clock::now();
        sketch.update(token.k, token.v);
        if (auditing) {
            auditor.observe(sketch, token.v);
        }
        cache.append(token.k, token.v);
        queries.push_back(token.q);
        if (next_step == schedule.end() || *next_step != step) {
            continue;
        }
        ++next_step;

        const AttnVector approx = sketch.query(token.q);
        const std::uint64_t sketch_ns = elapsed_ns(t0);

        const Vec weights = softmax_vector(cache, token.q);
        const AttnVector exact = exact_attention(cache, token.q);
        const double softmax_norm = norm2(weights);
        const double op_norm = operator_norm(cache.values);
        const auto score = [&](const AttnVector& z) { return spectral_error(z.z, exact.z, softmax_norm, op_norm); };

        const std::uint64_t subgen_vectors = sketch.memory_footprint().vectors_stored;
        const std::uint64_t m_prime = sketch.cluster_count();
        const auto emit = [&](std::string policy, double error, std::uint64_t vectors, std::uint64_t ns) {
            MetricRow row{seed, step, std::move(policy), error, vectors, m_prime, ns};
            out.timings.push_back(row);
            if (!cfg.record_wall_time) {
                row.wall_time_ns = 0;
            }
            out.rows.push_back(std::move(row));
        };
        emit(std::string(kSubGenPolicy), score(approx), subgen_vectors, sketch_ns);

        const std::size_t budget = static_cast<std::size_t>(subgen_vectors / 2);
        for (PolicyKind kind : cfg.policies) {
            const auto t1 = Clock::now();
            const PolicyConfig policy = matched_policy(kind, budget, cfg);
            const RetainedCache retained = compress(cache, policy, queries);
            const AttnVector z = query_compressed(retained, token.q);
            const std::uint64_t ns = elapsed_ns(t1);
            emit(std::string(to_string(kind)), score(z), 2 * retained.kept_indices.size(), ns);
        }
    }
    out.audit = auditor.report();
    return out;
}

void sort_rows(std::vector<MetricRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
        return std::tie(a.seed, a.step) < std::tie(b.seed, b.step);
    });
}

}  // namespace

std::vector<std::uint64_t> step_schedule(std::uint64_t n) {
    std::vector<std::uint64_t> steps;
    for (std::uint64_t p = 1; p <= n; p *= 2) {
        steps.push_back(p);
        if (p > n / 2) {
            break;
        }
    }
    if (n > 0 && steps.back() != n) {
        steps.push_back(n);
    }
    return steps;
}

std::vector<TokenTriplet> stream_for_seed(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.adversarial) {
        return generate_adversarial(cfg.stream.n, cfg.stream.d, seed, cfg.adversarial_spacing, cfg.stream.r);
    }
    StreamSpec spec = cfg.stream;
    spec.seed = seed;
    return generate(spec);
}

std::uint64_t sketch_seed(std::uint64_t seed) { return CounterRng(seed).split(0x5eed).next_u64(); }

bool ExperimentResult::audits_pass() const {
    return std::all_of(audits.begin(), audits.end(), [](const SeedAudit& a) { return a.report.pass(); });
}

bool ExperimentResult::distributions_pass() const {
    return std::all_of(distributions.begin(), distributions.end(), [](const auto& d) { return d.pass(); });
}

ExperimentResult run_experiment(const RunConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    const AccuracyParams accuracy = cfg.resolved_accuracy();
    result.sizes = derive_sizes(accuracy, cfg.stream.d, cfg.constants);

    std::vector<SeedOutput> outputs(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
            outputs[i] = run_seed(cfg, result.sizes, cfg.seeds[i]);
        }
    };
    const std::size_t jobs = std::min(cfg.jobs, cfg.seeds.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    for (std::size_t i = 0; i < outputs.size(); ++i) {
        auto& o = outputs[i];
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        result.timings.insert(result.timings.end(), o.timings.begin(), o.timings.end());
        if (cfg.audit != AuditLevel::off) {
            result.audits.push_back({cfg.seeds[i], std::move(o.audit)});
        }
    }
    sort_rows(result.rows);
    sort_rows(result.timings);
    std::stable_sort(result.audits.begin(), result.audits.end(),
                     [](const SeedAudit& a, const SeedAudit& b) { return a.seed < b.seed; });

    if (cfg.audit == AuditLevel::distributions) {
        const std::uint64_t seed = cfg.seeds.front();
        result.distributions.push_back(distribution_test(DistributionKind::sampler, cfg.trials, seed));
        result.distributions.push_back(distribution_test(DistributionKind::reservoir, cfg.trials, seed));
    }

    result.summary = summarize(result.rows, cfg.thresholds, accuracy.epsilon, result.sizes.t);
    return result;
}

nlohmann::json audit_json(const ExperimentResult& result) {
    nlohmann::json j;
    j["pass"] = result.audits_pass() && result.distributions_pass();
    j["seeds"] = nlohmann::json::array();
    for (const auto& a : result.audits) {
        nlohmann::json violations = nlohmann::json::array();
        for (const auto& v : a.report.first_violations) {
            violations.push_back({{"step", v.step}, {"invariant", v.invariant}, {"detail", v.detail}});
        }
        j["seeds"].push_back({{"seed", a.seed},
                              {"steps_checked", a.report.steps_checked},
                              {"violation_count", a.report.violation_count},
                              {"max_clusters", a.report.max_clusters},
                              {"first_violations", violations}});
    }
    j["distributions"] = nlohmann::json::array();
    for (const auto& d : result.distributions) {
        j["distributions"].push_back({{"kind", to_string(d.kind)},
                                      {"trials", d.trials},
                                      {"target", d.target},
                                      {"empirical", d.empirical},
                                      {"total_variation", d.total_variation},
                                      {"tolerance", d.tolerance},
                                      {"pass", d.pass()}});
    }
    return j;
}

void write_outputs(const ExperimentResult& result, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto write = [&](const fs::path& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        out << body;
        if (!out) {
            throw std::runtime_error("failed to write " + path.string());
        }
    };
    write(dir / "metrics.csv", to_csv(result.rows));
    write(dir / "timings.csv", to_csv(result.timings));

    nlohmann::json summary = to_json(result.summary);
    summary["sizes"] = {{"t", result.sizes.t}, {"s", result.sizes.s}};
    summary["epsilon"] = cfg.resolved_accuracy().epsilon;
    write(dir / "summary.json", summary.dump(2) + "\n");
    if (cfg.audit != AuditLevel::off) {
        write(dir / "audit.json", audit_json(result).dump(2) + "\n");
    }
}

}  // namespace subgen::harness
