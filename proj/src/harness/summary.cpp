// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/harness/summary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subgen::harness {

namespace {

constexpr std::string_view kHeader = "seed,step,policy,spectral_error,vectors_stored,m_prime,wall_time_ns";

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("bad integer in CSV: " + std::string(s));
    }
    return out;
}

double parse_double(std::string_view s) {
    const std::string copy(s);
    char* end = nullptr;
    const double out = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size()) {
        throw std::runtime_error("bad number in CSV: " + copy);
    }
    return out;
}

}  // namespace

std::string to_csv(std::span<const MetricRow> rows) {
    std::string out(kHeader);
    out += '\n';
    for (const auto& row : rows) {
        out += std::to_string(row.seed);
        out += ',';
        out += std::to_string(row.step);
        out += ',';
        out += row.policy;
        out += ',';
        out += format_double(row.spectral_error);
        out += ',';
        out += std::to_string(row.vectors_stored);
        out += ',';
        out += std::to_string(row.m_prime);
        out += ',';
        out += std::to_string(row.wall_time_ns);
        out += '\n';
    }
    return out;
}

std::vector<MetricRow> parse_csv(std::string_view text) {
    std::vector<MetricRow> rows;
    bool header = true;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        if (header) {
            if (line != kHeader) {
                throw std::runtime_error("unexpected CSV header");
            }
            header = false;
            continue;
        }
        std::vector<std::string_view> fields;
        while (true) {
            const auto comma = line.find(',');
            fields.push_back(line.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            line.remove_prefix(comma + 1);
        }
        if (fields.size() != 7) {
            throw std::runtime_error("CSV row does not have 7 fields");
        }
        MetricRow row;
        row.seed = parse_u64(fields[0]);
        row.step = parse_u64(fields[1]);
        row.policy = std::string(fields[2]);
        row.spectral_error = parse_double(fields[3]);
        row.vectors_stored = parse_u64(fields[4]);
        row.m_prime = parse_u64(fields[5]);
        row.wall_time_ns = parse_u64(fields[6]);
        rows.push_back(std::move(row));
    }
    return rows;
}

Quantiles quantiles(std::vector<double> values) {
    Quantiles q;
    q.count = values.size();
    if (values.empty()) {
        return q;
    }
    std::sort(values.begin(), values.end());
    const auto at = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    q.p50 = at(0.5);
    q.p90 = at(0.9);
    q.p99 = at(0.99);
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    q.mean = sum / static_cast<double>(values.size());
    q.max = values.back();
    return q;
}

Summary summarize(std::span<const MetricRow> rows, const Thresholds& thresholds, double epsilon,
                  std::size_t reservoir_size) {
    // policy -> seed -> (last step, error, vectors)
    struct Final {
        std::uint64_t step = 0;
        double error = 0.0;
        std::uint64_t vectors = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, std::map<std::uint64_t, Final>> finals;
    std::map<std::string, std::vector<double>> all_errors;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> subgen_vectors;

    for (const auto& row : rows) {
        if (!finals.count(row.policy)) {
            order.push_back(row.policy);
        }
        auto& f = finals[row.policy][row.seed];
        if (row.step >= f.step) {
            f = {row.step, row.spectral_error, row.vectors_stored};
        }
        all_errors[row.policy].push_back(row.spectral_error);
        if (row.policy == kSubGenPolicy) {
            subgen_vectors[{row.seed, row.step}] = row.vectors_stored;
        }
    }

    Summary summary;
    std::map<std::string, std::vector<double>> final_errors;
    for (const auto& policy : order) {
        PolicySummary ps;
        ps.policy = policy;
        std::vector<double> errors;
        for (const auto& [seed, f] : finals[policy]) {
            errors.push_back(f.error);
            ps.final_vectors_stored_max = std::max(ps.final_vectors_stored_max, f.vectors);
        }
        final_errors[policy] = errors;
        ps.final_step = quantiles(errors);
        ps.all_steps = quantiles(all_errors[policy]);
        summary.policies.push_back(std::move(ps));
    }

    if (thresholds.error_bound) {
        CheckResult check{"error_bound", false, {}};
        const auto& errors = final_errors[std::string(kSubGenPolicy)];
        const auto within = static_cast<std::size_t>(
            std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= epsilon; }));
        const double fraction = errors.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(errors.size());
        check.pass = !errors.empty() && fraction >= thresholds.error_bound_fraction;
        std::ostringstream os;
        os << within << "/" << errors.size() << " seeds with final error <= " << epsilon << " (need fraction >= "
           << thresholds.error_bound_fraction << ")";
        check.detail = os.str();
        summary.checks.push_back(std::move(check));
    }

    for (auto kind : thresholds.ordering_against) {
        const std::string other(to_string(kind));
        CheckResult check{"ordering_vs_" + other, false, {}};
        const Quantiles ours = quantiles(final_errors[std::string(kSubGenPolicy)]);
        const Quantiles theirs = quantiles(final_errors[other]);
        check.pass = ours.count > 0 && theirs.count > 0 && ours.p50 < theirs.p50;
        std::ostringstream os;
        os << "median subgen " << ours.p50 << " vs " << other << " " << theirs.p50;
        check.detail = os.str();
        summary.checks.push_back(std::move(check));
    }

    if (thresholds.budget_match) {
        CheckResult check{"budget_match", true, {}};
        std::uint64_t mismatched = 0;
        std::uint64_t compared = 0;
        for (const auto& row : rows) {
            if (row.policy == kSubGenPolicy || row.policy == to_string(PolicyKind::exact)) {
                continue;
            }
            const auto it = subgen_vectors.find({row.seed, row.step});
            if (it == subgen_vectors.end()) {
                continue;
            }
            const auto gap = row.vectors_stored > it->second ? row.vectors_stored - it->second
                                                             : it->second - row.vectors_stored;
            if (gap <= reservoir_size + 1) {
                ++compared;
            } else if (row.vectors_stored == 2 * row.step) {
                // The policy already holds the full prefix; the budget cannot be matched.
                ++summary.budget_infeasible_rows;
            } else {
                ++mismatched;
            }
        }
        check.pass = mismatched == 0;
        std::ostringstream os;
        os << compared << " rows matched, " << mismatched << " mismatched, " << summary.budget_infeasible_rows
           << " infeasible (budget exceeds prefix)";
        check.detail = os.str();
        summary.checks.push_back(std::move(check));
    }

    summary.pass = std::all_of(summary.checks.begin(), summary.checks.end(), [](const auto& c) { return c.pass; });
    return summary;
}

namespace {
nlohmann::json quantiles_json(const Quantiles& q) {
    return {{"count", q.count}, {"p50", q.p50}, {"p90", q.p90}, {"p99", q.p99}, {"mean", q.mean}, {"max", q.max}};
}
}  // namespace

nlohmann::json to_json(const Summary& summary) {
    nlohmann::json j;
    j["pass"] = summary.pass;
    j["budget_infeasible_rows"] = summary.budget_infeasible_rows;
    j["policies"] = nlohmann::json::object();
    for (const auto& p : summary.policies) {
        j["policies"][p.policy] = {{"final_step", quantiles_json(p.final_step)},
                                   {"all_steps", quantiles_json(p.all_steps)},
                                   {"final_vectors_stored_max", p.final_vectors_stored_max}};
    }
    j["checks"] = nlohmann::json::object();
    for (const auto& c : summary.checks) {
        j["checks"][c.name] = {{"pass", c.pass}, {"detail", c.detail}};
    }
    return j;
}

}  // namespace subgen::harness
