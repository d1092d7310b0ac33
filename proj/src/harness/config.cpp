// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "subgen/harness/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <fstream>
#include <sstream>

namespace subgen::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        if (!item.empty()) {
            out.push_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("invalid integer for '" + std::string(key) + "': " + std::string(value));
    }
    return out;
}

double to_double(std::string_view key, std::string_view value) {
    const std::string copy(value);
    char* end = nullptr;
    errno = 0;
    const double out = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size() || errno == ERANGE) {
        throw ConfigError("invalid number for '" + std::string(key) + "': " + copy);
    }
    return out;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError("invalid boolean for '" + std::string(key) + "': " + std::string(value));
}

std::vector<PolicyKind> to_policies(std::string_view key, std::string_view value) {
    std::vector<PolicyKind> out;
    for (auto name : split_list(value)) {
        const auto kind = parse_policy_kind(name);
        if (!kind) {
            throw ConfigError("unknown policy in '" + std::string(key) + "': " + std::string(name));
        }
        if (std::find(out.begin(), out.end(), *kind) == out.end()) {
            out.push_back(*kind);
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(AuditLevel level) {
    switch (level) {
        case AuditLevel::off:
            return "off";
        case AuditLevel::invariants:
            return "invariants";
        case AuditLevel::distributions:
            return "distributions";
    }
    return "unknown";
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    for (auto item : split_list(text)) {
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) {
            seeds.push_back(to_u64("seeds", item));
            continue;
        }
        const auto lo = to_u64("seeds", trim(item.substr(0, dash)));
        const auto hi = to_u64("seeds", trim(item.substr(dash + 1)));
        if (hi < lo || hi - lo > 1000000) {
            throw ConfigError("invalid seed range: " + std::string(item));
        }
        for (auto s = lo; s <= hi; ++s) {
            seeds.push_back(s);
        }
    }
    if (seeds.empty()) {
        throw ConfigError("seed list is empty");
    }
    return seeds;
}

void set_key(RunConfig& cfg, std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    StreamSpec& st = cfg.stream;
    if (key == "n") {
        st.n = to_u64(key, value);
    } else if (key == "d") {
        st.d = to_u64(key, value);
    } else if (key == "m") {
        st.m = to_u64(key, value);
    } else if (key == "delta") {
        st.delta = to_double(key, value);
        cfg.accuracy.delta = st.delta;
    } else if (key == "r") {
        st.r = to_double(key, value);
        cfg.accuracy.r = st.r;
    } else if (key == "value_profile") {
        const auto profile = parse_value_norm_profile(value);
        if (!profile) {
            throw ConfigError("unknown value_profile: " + std::string(value));
        }
        st.value_profile = *profile;
    } else if (key == "alpha") {
        st.alpha = to_double(key, value);
    } else if (key == "spike_probability") {
        st.spike_probability = to_double(key, value);
    } else if (key == "spike_norm") {
        st.spike_norm = to_double(key, value);
    } else if (key == "center_separation") {
        st.center_separation = to_double(key, value);
    } else if (key == "drift") {
        st.drift = to_double(key, value);
    } else if (key == "query_scale") {
        st.query_scale = to_double(key, value);
    } else if (key == "adversarial") {
        cfg.adversarial = to_bool(key, value);
    } else if (key == "adversarial_spacing") {
        cfg.adversarial_spacing = to_double(key, value);
    } else if (key == "epsilon") {
        cfg.accuracy.epsilon = to_double(key, value);
    } else if (key == "n_max") {
        cfg.accuracy.n_max = to_double(key, value);
    } else if (key == "c_t") {
        cfg.constants.c_t = to_double(key, value);
    } else if (key == "c_s") {
        cfg.constants.c_s = to_double(key, value);
    } else if (key == "policies") {
        cfg.policies = to_policies(key, value);
    } else if (key == "sink_prefix") {
        cfg.sink_prefix = to_u64(key, value);
    } else if (key == "recent_fraction") {
        cfg.recent_fraction = to_double(key, value);
    } else if (key == "audit") {
        if (value == "off") {
            cfg.audit = AuditLevel::off;
        } else if (value == "invariants") {
            cfg.audit = AuditLevel::invariants;
        } else if (value == "distributions") {
            cfg.audit = AuditLevel::distributions;
        } else {
            throw ConfigError("unknown audit level: " + std::string(value));
        }
    } else if (key == "trials") {
        cfg.trials = to_u64(key, value);
    } else if (key == "out") {
        cfg.output_dir = std::string(value);
    } else if (key == "seeds" || key == "seed") {
        cfg.seeds = parse_seed_list(value);
    } else if (key == "jobs") {
        cfg.jobs = to_u64(key, value);
    } else if (key == "wall_time") {
        cfg.record_wall_time = to_bool(key, value);
    } else if (key == "check.error_bound") {
        cfg.thresholds.error_bound = to_bool(key, value);
    } else if (key == "check.error_bound_fraction") {
        cfg.thresholds.error_bound_fraction = to_double(key, value);
    } else if (key == "check.ordering") {
        cfg.thresholds.ordering_against = to_policies(key, value);
    } else if (key == "check.budget_match") {
        cfg.thresholds.budget_match = to_bool(key, value);
    } else {
        throw ConfigError("unknown config key: " + std::string(key));
    }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        try {
            set_key(base, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

AccuracyParams RunConfig::resolved_accuracy() const {
    AccuracyParams out = accuracy;
    out.delta = stream.delta;
    out.r = stream.r * stream.query_scale;
    if (!(out.n_max > 0.0)) {
        out.n_max = static_cast<double>(stream.n);
    }
    return out;
}

void RunConfig::validate() const {
    try {
        if (adversarial) {
            if (stream.n == 0 || stream.d == 0 || !(adversarial_spacing > 0.0) || !(stream.r > 0.0)) {
                throw ConfigError("adversarial stream needs n, d >= 1 and positive spacing and r");
            }
            if (!(stream.delta > 0.0)) {
                throw ConfigError("delta must be positive");
            }
        } else {
            stream.validate();
        }
        const AccuracyParams acc = resolved_accuracy();
        acc.validate();
        derive_sizes(acc, stream.d, constants);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (seeds.empty()) {
        throw ConfigError("seed list is empty");
    }
    if (jobs == 0) {
        throw ConfigError("jobs must be at least 1");
    }
    if (!(recent_fraction >= 0.0 && recent_fraction <= 1.0)) {
        throw ConfigError("recent_fraction must lie in [0, 1]");
    }
    if (audit == AuditLevel::distributions && trials < kMinDistributionTrials) {
        throw ConfigError("distribution audits need at least 10000 trials");
    }
    if (!(thresholds.error_bound_fraction >= 0.0 && thresholds.error_bound_fraction <= 1.0)) {
        throw ConfigError("check.error_bound_fraction must lie in [0, 1]");
    }
    for (auto kind : thresholds.ordering_against) {
        if (std::find(policies.begin(), policies.end(), kind) == policies.end()) {
            throw ConfigError("check.ordering names a policy that is not run: " + std::string(to_string(kind)));
        }
    }
}

}  // namespace subgen::harness
