#pragma once

// The outer loop: deliberate -> settle for `steps` steps under one seed,
// plus the file emitters (metrics.csv, events.csv, final_state.json,
// available.csv) and the two-run policy comparison that produces report.json.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polisim/deliberation.hpp"
#include "polisim/errors.hpp"
#include "polisim/metrics.hpp"
#include "polisim/scenario.hpp"
#include "polisim/world.hpp"

namespace polisim {

struct AvailabilityRecord {
    std::int64_t step = 0;
    std::string agent_id;
    std::vector<std::string> actions;
};

struct RunOutputs {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    std::vector<StepMetrics> series;
    std::vector<AvailabilityRecord> availability;  // filled when requested
    WorldState world{0};                           // state after the final settlement
};

// Metrics are recorded at the top of each step (so row 0 describes the
// freshly generated population), then every agent deliberates against the
// frozen world, then settle advances it.
inline RunOutputs run_scenario(const ScenarioConfig& config, bool log_available = false) {
    RunOutputs out;
    out.scenario_name = config.name;
    out.seed = config.seed;
    out.steps = config.steps;
    out.world = build_world(config);
    MetricsRecorder recorder(config.metrics);
    for (std::int64_t t = 0; t < config.steps; ++t) {
        recorder.record_step(out.world);
        std::map<std::string, std::string> chosen;
        for (const auto& agent : out.world.agents) {
            const auto available = available_actions(agent, out.world);
            if (log_available) {
                out.availability.push_back({out.world.step, agent.id, available});
            }
            chosen[agent.id] = select_action(agent, available, out.world.catalog, out.world.sat);
        }
        settle(out.world, chosen);
    }
    out.series = recorder.series();
    return out;
}

namespace io_detail {

inline std::string fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write output file: " + path);
    return out;
}

}  // namespace io_detail

inline void write_metrics_csv(const std::vector<StepMetrics>& series, const std::string& path) {
    auto out = io_detail::open_out(path);
    out << "step,gini_wealth,poverty_line,headcount_ratio,deprivation_index";
    if (!series.empty()) {
        for (const auto& [need, mean] : series.front().mean_nsl) out << ",mean_nsl_" << need;
    }
    out << "\n";
    for (const auto& row : series) {
        out << row.step << ',' << io_detail::fixed6(row.gini_wealth) << ','
            << io_detail::fixed6(row.poverty_line) << ',' << io_detail::fixed6(row.headcount_ratio)
            << ',' << io_detail::fixed6(row.deprivation_index);
        for (const auto& [need, mean] : row.mean_nsl) out << ',' << io_detail::fixed6(mean);
        out << "\n";
    }
}

inline void write_events_csv(const std::vector<Event>& events, const std::string& path) {
    auto out = io_detail::open_out(path);
    out << "step,agent_id,event_kind,detail\n";
    for (const auto& e : events) {
        out << e.step << ',' << e.agent_id << ',' << to_string(e.kind) << ',' << e.detail << "\n";
    }
}

inline void write_available_csv(const std::vector<AvailabilityRecord>& records,
                                const std::string& path) {
    auto out = io_detail::open_out(path);
    out << "step,agent_id,actions\n";
    for (const auto& r : records) {
        out << r.step << ',' << r.agent_id << ',';
        for (std::size_t i = 0; i < r.actions.size(); ++i) {
            if (i > 0) out << ';';
            out << r.actions[i];
        }
        out << "\n";
    }
}

inline nlohmann::json agent_to_json(const AgentState& agent) {
    nlohmann::json j;
    j["id"] = agent.id;
    j["profile"] = {
        {"age", agent.profile.age},
        {"gender", agent.profile.gender},
        {"address", agent.profile.address ? nlohmann::json(*agent.profile.address)
                                          : nlohmann::json(nullptr)},
        {"income", agent.profile.income},
        {"status", to_string(agent.profile.status)},
        {"residency", agent.profile.residency},
        {"has_bank_account", agent.profile.has_bank_account},
    };
    j["wealth"] = agent.wealth;
    j["location"] = agent.location;
    j["last_action"] =
        agent.last_action ? nlohmann::json(*agent.last_action) : nlohmann::json(nullptr);
    j["needs"] = {{"nsl", agent.needs.nsl}, {"importance", agent.needs.importance}};
    return j;
}

inline void write_final_state_json(const WorldState& world, const std::string& path) {
    nlohmann::json j;
    j["step"] = world.step;
    j["agents"] = nlohmann::json::array();
    for (const auto& agent : world.agents) j["agents"].push_back(agent_to_json(agent));
    j["locations"] = nlohmann::json::array();
    for (const auto& loc : world.locations) {
        nlohmann::json l = {{"id", loc.id}, {"kind", to_string(loc.kind)}};
        l["capacity"] = loc.capacity ? nlohmann::json(*loc.capacity) : nlohmann::json(nullptr);
        j["locations"].push_back(l);
    }
    j["active_norms"] = nlohmann::json::array();
    for (const auto& norm : world.norms) {
        if (norm.active) j["active_norms"].push_back(norm.id);
    }
    auto out = io_detail::open_out(path);
    out << j.dump(2) << "\n";
}

// Writes the standard output set into `out_dir`.
inline void write_run_outputs(const RunOutputs& run, const std::string& out_dir,
                              bool log_available = false) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_metrics_csv(run.series, (dir / "metrics.csv").string());
    write_events_csv(run.world.events, (dir / "events.csv").string());
    write_final_state_json(run.world, (dir / "final_state.json").string());
    if (log_available) {
        write_available_csv(run.availability, (dir / "available.csv").string());
    }
}

namespace compare_detail {

// First path (dot/bracket notation) at which two JSON documents differ.
inline std::optional<std::string> first_difference(const nlohmann::json& a, const nlohmann::json& b,
                                                   const std::string& path) {
    if (a.type() != b.type()) return path;
    if (a.is_object()) {
        std::set<std::string> keys;
        for (auto it = a.begin(); it != a.end(); ++it) keys.insert(it.key());
        for (auto it = b.begin(); it != b.end(); ++it) keys.insert(it.key());
        for (const auto& key : keys) {
            const std::string child = path.empty() ? key : path + "." + key;
            if (!a.contains(key) || !b.contains(key)) return child;
            if (auto diff = first_difference(a.at(key), b.at(key), child)) return diff;
        }
        return std::nullopt;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return path;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (auto diff = first_difference(a[i], b[i], path + "[" + std::to_string(i) + "]")) {
                return diff;
            }
        }
        return std::nullopt;
    }
    if (a != b) return path;
    return std::nullopt;
}

inline nlohmann::json series_to_json(const std::vector<StepMetrics>& series) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& m : series) {
        nlohmann::json row;
        row["step"] = m.step;
        row["gini_wealth"] = m.gini_wealth;
        row["poverty_line"] = m.poverty_line;
        row["headcount_ratio"] = m.headcount_ratio;
        row["deprivation_index"] = m.deprivation_index;
        nlohmann::json nsl;
        for (const auto& [need, mean] : m.mean_nsl) nsl[need] = mean;
        row["mean_nsl"] = nsl;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace compare_detail

// Both scenarios must be identical apart from which norms are active: the
// configuration files modulo `active_norms` and the norm definitions modulo
// `active` flags. Anything else is refused, naming the offending field, so
// reported metric deltas are attributable to the policy change alone.
inline void enforce_comparable(const ScenarioConfig& baseline, const ScenarioConfig& variant) {
    nlohmann::json a = baseline.raw;
    nlohmann::json b = variant.raw;
    a.erase("active_norms");
    b.erase("active_norms");
    if (auto diff = compare_detail::first_difference(a, b, "")) {
        throw ValidationError("scenarios differ outside active_norms at field: " + *diff);
    }
    auto neutral = [](std::vector<NormStatement> norms) {
        for (auto& n : norms) n.active = true;
        return canonicalize(norms);
    };
    if (neutral(baseline.norms) != neutral(variant.norms)) {
        throw ValidationError("scenarios differ outside active_norms: norm definitions differ");
    }
}

struct ComparisonOutcome {
    RunOutputs baseline;
    RunOutputs variant;
    nlohmann::json report;
};

inline ComparisonOutcome compare_scenarios(const ScenarioConfig& baseline_config,
                                           const ScenarioConfig& variant_config) {
    enforce_comparable(baseline_config, variant_config);

    ComparisonOutcome outcome;
    outcome.baseline = run_scenario(baseline_config);
    outcome.variant = run_scenario(variant_config);

    nlohmann::json report;
    report["baseline"] = {{"name", baseline_config.name}, {"path", baseline_config.source_path}};
    report["variant"] = {{"name", variant_config.name}, {"path", variant_config.source_path}};
    report["seed"] = baseline_config.seed;
    report["steps"] = baseline_config.steps;

    std::map<std::string, const NormStatement*> baseline_norms;
    for (const auto& n : baseline_config.norms) baseline_norms[n.id] = &n;
    nlohmann::json changes = nlohmann::json::array();
    for (const auto& variant_norm : variant_config.norms) {
        const NormStatement* base_norm = baseline_norms.at(variant_norm.id);
        if (base_norm->active == variant_norm.active) continue;
        changes.push_back({
            {"id", variant_norm.id},
            {"change", variant_norm.active ? "activated" : "deactivated"},
            {"jurisdiction", to_string(variant_norm.jurisdiction)},
            {"character", to_string(variant_norm.character)},
            {"degree", variant_norm.degree},
        });
    }
    report["norm_changes"] = changes;

    const StepMetrics& base_last = outcome.baseline.series.back();
    const StepMetrics& var_last = outcome.variant.series.back();
    nlohmann::json deltas;
    deltas["gini_wealth"] = var_last.gini_wealth - base_last.gini_wealth;
    deltas["poverty_line"] = var_last.poverty_line - base_last.poverty_line;
    deltas["headcount_ratio"] = var_last.headcount_ratio - base_last.headcount_ratio;
    deltas["deprivation_index"] = var_last.deprivation_index - base_last.deprivation_index;
    nlohmann::json nsl_deltas;
    for (std::size_t i = 0; i < base_last.mean_nsl.size(); ++i) {
        nsl_deltas[base_last.mean_nsl[i].first] =
            var_last.mean_nsl[i].second - base_last.mean_nsl[i].second;
    }
    deltas["mean_nsl"] = nsl_deltas;
    report["final_step_deltas"] = deltas;

    report["baseline_series"] = compare_detail::series_to_json(outcome.baseline.series);
    report["variant_series"] = compare_detail::series_to_json(outcome.variant.series);
    outcome.report = std::move(report);
    return outcome;
}

inline void write_report_json(const nlohmann::json& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto out = io_detail::open_out((std::filesystem::path(out_dir) / "report.json").string());
    out << report.dump(2) << "\n";
}

}  // namespace polisim
