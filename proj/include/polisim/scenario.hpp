#pragma once

// Scenario configuration: a JSON file describing one simulated society
// (population quotas, need catalog, locations, actions, satisfaction matrix,
// metrics thresholds) plus a norm DSL file next to it. load_scenario performs
// full schema and cross-reference validation so that everything downstream
// can assume a coherent world.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "polisim/agent.hpp"
#include "polisim/deliberation.hpp"
#include "polisim/errors.hpp"
#include "polisim/metrics.hpp"
#include "polisim/norm_parser.hpp"
#include "polisim/norms.hpp"
#include "polisim/population.hpp"
#include "polisim/rng.hpp"
#include "polisim/world.hpp"

namespace polisim {

struct ScenarioConfig {
    std::string name;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    PopulationSpec population;
    NeedCatalog catalog;
    std::vector<Location> locations;
    std::vector<ActionDef> actions;
    SatMatrix sat;
    std::string norms_path;
    std::vector<NormStatement> norms;  // active flags already resolved
    std::optional<std::vector<std::string>> active_norms;
    MetricsConfig metrics;

    std::string source_path;
    nlohmann::json raw;  // as loaded, for compare's strict-equality check
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ValidationError(path + ": " + msg);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path,
                           const std::string& ctx) {
    if (!obj.is_object()) fail(path, ctx + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing field " + ctx + "." + key);
    return *it;
}

inline std::string require_string(const json& obj, const std::string& key, const std::string& path,
                                  const std::string& ctx) {
    const json& v = require(obj, key, path, ctx);
    if (!v.is_string()) fail(path, "field " + ctx + "." + key + " must be a string");
    return v.get<std::string>();
}

inline std::int64_t require_int(const json& obj, const std::string& key, const std::string& path,
                                const std::string& ctx) {
    const json& v = require(obj, key, path, ctx);
    if (!v.is_number_integer()) fail(path, "field " + ctx + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

inline double require_number(const json& obj, const std::string& key, const std::string& path,
                             const std::string& ctx) {
    const json& v = require(obj, key, path, ctx);
    if (!v.is_number()) fail(path, "field " + ctx + "." + key + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const std::string& key, double fallback,
                        const std::string& path, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return require_number(obj, key, path, ctx);
}

inline std::int64_t int_or(const json& obj, const std::string& key, std::int64_t fallback,
                           const std::string& path, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return require_int(obj, key, path, ctx);
}

inline std::string string_or(const json& obj, const std::string& key, const std::string& fallback,
                             const std::string& path, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return require_string(obj, key, path, ctx);
}

inline bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& path,
                    const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(path, "field " + ctx + "." + key + " must be a boolean");
    return v.get<bool>();
}

inline std::pair<double, double> require_range(const json& v, const std::string& path,
                                               const std::string& ctx) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(path, "field " + ctx + " must be a [low, high] number pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline void check_unit(double value, const std::string& path, const std::string& ctx) {
    if (value < 0.0 || value > 1.0) fail(path, "field " + ctx + " must lie in [0,1]");
}

inline PopulationSpec parse_population(const json& j, const std::string& path) {
    const std::string ctx = "population";
    PopulationSpec spec;
    spec.size = require_int(j, "size", path, ctx);
    const json& statuses = require(j, "status_shares", path, ctx);
    if (!statuses.is_object()) fail(path, "field population.status_shares must be an object");
    for (auto it = statuses.begin(); it != statuses.end(); ++it) {
        auto status = parse_status(it.key());
        if (!status) fail(path, "population.status_shares: unknown status '" + it.key() + "'");
        if (!it.value().is_number()) fail(path, "population.status_shares." + it.key() + " must be a number");
        spec.status_shares[*status] = it.value().get<double>();
    }
    spec.homeless_share = require_number(j, "homeless_share", path, ctx);
    const json& brackets = require(j, "income_brackets", path, ctx);
    if (!brackets.is_array()) fail(path, "field population.income_brackets must be an array");
    for (const auto& b : brackets) {
        IncomeBracket bracket;
        bracket.fraction = require_number(b, "fraction", path, "income_brackets[]");
        bracket.min = require_int(b, "min", path, "income_brackets[]");
        bracket.max = require_int(b, "max", path, "income_brackets[]");
        spec.income_brackets.push_back(bracket);
    }
    const auto age = require_range(require(j, "age_range", path, ctx), path, "population.age_range");
    spec.age_range = {static_cast<int>(age.first), static_cast<int>(age.second)};
    const json& genders = require(j, "gender_shares", path, ctx);
    if (!genders.is_object()) fail(path, "field population.gender_shares must be an object");
    for (auto it = genders.begin(); it != genders.end(); ++it) {
        if (!it.value().is_number()) fail(path, "population.gender_shares." + it.key() + " must be a number");
        spec.gender_shares[it.key()] = it.value().get<double>();
    }
    spec.residency_share = require_number(j, "residency_share", path, ctx);
    spec.bank_account_share = require_number(j, "bank_account_share", path, ctx);
    spec.home_location = string_or(j, "home_location", spec.home_location, path, ctx);
    spec.homeless_start_location =
        string_or(j, "homeless_start_location", spec.homeless_start_location, path, ctx);
    try {
        validate_population_spec(spec);
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    return spec;
}

inline NeedCatalog parse_catalog(const json& j, const std::string& path) {
    const std::string ctx = "need_catalog";
    NeedCatalog catalog;
    const json& categories = require(j, "categories", path, ctx);
    if (!categories.is_array() || categories.empty()) {
        fail(path, "field need_catalog.categories must be a non-empty array");
    }
    std::set<std::string> seen_needs;
    std::set<std::string> seen_categories;
    for (const auto& c : categories) {
        NeedCategory category;
        category.name = require_string(c, "name", path, "categories[]");
        if (!seen_categories.insert(category.name).second) {
            fail(path, "need_catalog: duplicate category '" + category.name + "'");
        }
        const json& needs = require(c, "needs", path, "categories[]");
        if (!needs.is_array() || needs.empty()) {
            fail(path, "need_catalog: category '" + category.name + "' must list at least one need");
        }
        for (const auto& n : needs) {
            if (!n.is_string()) fail(path, "need_catalog: needs must be strings");
            const std::string need = n.get<std::string>();
            if (!seen_needs.insert(need).second) {
                fail(path, "need_catalog: need '" + need + "' appears in more than one category");
            }
            category.needs.push_back(need);
        }
        catalog.categories.push_back(std::move(category));
    }
    if (j.contains("decay")) {
        const json& decay = j.at("decay");
        if (!decay.is_object()) fail(path, "field need_catalog.decay must be an object");
        for (auto it = decay.begin(); it != decay.end(); ++it) {
            if (!catalog.has_need(it.key())) {
                fail(path, "need_catalog.decay: unknown need '" + it.key() + "'");
            }
            if (!it.value().is_number()) fail(path, "need_catalog.decay." + it.key() + " must be a number");
            const double rate = it.value().get<double>();
            check_unit(rate, path, "need_catalog.decay." + it.key());
            catalog.decay[it.key()] = rate;
        }
    }
    catalog.deprivation_threshold =
        number_or(j, "deprivation_threshold", catalog.deprivation_threshold, path, ctx);
    check_unit(catalog.deprivation_threshold, path, "need_catalog.deprivation_threshold");
    if (j.contains("initial_nsl_default")) {
        catalog.initial_nsl_default =
            require_range(j.at("initial_nsl_default"), path, "need_catalog.initial_nsl_default");
    }
    if (j.contains("initial_nsl")) {
        const json& init = j.at("initial_nsl");
        if (!init.is_object()) fail(path, "field need_catalog.initial_nsl must be an object");
        for (auto it = init.begin(); it != init.end(); ++it) {
            if (!catalog.has_need(it.key())) {
                fail(path, "need_catalog.initial_nsl: unknown need '" + it.key() + "'");
            }
            catalog.initial_nsl[it.key()] =
                require_range(it.value(), path, "need_catalog.initial_nsl." + it.key());
        }
    }
    const auto check_range = [&](const std::pair<double, double>& r, const std::string& label) {
        if (r.first < 0.0 || r.second > 1.0 || r.first > r.second) {
            fail(path, label + " must satisfy 0 <= low <= high <= 1");
        }
    };
    check_range(catalog.initial_nsl_default, "need_catalog.initial_nsl_default");
    for (const auto& [need, range] : catalog.initial_nsl) {
        check_range(range, "need_catalog.initial_nsl." + need);
    }
    const json& importance = require(j, "importance", path, ctx);
    if (!importance.is_object()) fail(path, "field need_catalog.importance must be an object");
    for (auto it = importance.begin(); it != importance.end(); ++it) {
        if (!catalog.find_category(it.key())) {
            fail(path, "need_catalog.importance: unknown category '" + it.key() + "'");
        }
        if (!it.value().is_number()) fail(path, "need_catalog.importance." + it.key() + " must be a number");
        const double weight = it.value().get<double>();
        check_unit(weight, path, "need_catalog.importance." + it.key());
        catalog.importance[it.key()] = weight;
    }
    for (const auto& category : catalog.categories) {
        if (!catalog.importance.count(category.name)) {
            fail(path, "need_catalog.importance missing category '" + category.name + "'");
        }
    }
    if (j.contains("importance_overrides")) {
        const json& overrides = j.at("importance_overrides");
        if (!overrides.is_object()) fail(path, "field need_catalog.importance_overrides must be an object");
        for (auto it = overrides.begin(); it != overrides.end(); ++it) {
            auto status = parse_status(it.key());
            if (!status) {
                fail(path, "need_catalog.importance_overrides: unknown status '" + it.key() + "'");
            }
            if (!it.value().is_object()) {
                fail(path, "need_catalog.importance_overrides." + it.key() + " must be an object");
            }
            for (auto ov = it.value().begin(); ov != it.value().end(); ++ov) {
                if (!catalog.find_category(ov.key())) {
                    fail(path, "need_catalog.importance_overrides: unknown category '" + ov.key() + "'");
                }
                if (!ov.value().is_number()) {
                    fail(path, "need_catalog.importance_overrides." + it.key() + "." + ov.key() +
                                   " must be a number");
                }
                const double weight = ov.value().get<double>();
                check_unit(weight, path, "need_catalog.importance_overrides." + it.key() + "." + ov.key());
                catalog.importance_overrides[*status][ov.key()] = weight;
            }
        }
    }
    catalog.financial_reference_buffer = int_or(j, "financial_reference_buffer",
                                                catalog.financial_reference_buffer, path, ctx);
    if (catalog.has_need(kFinancialSecurityNeed) && catalog.financial_reference_buffer <= 0) {
        fail(path, "need_catalog.financial_reference_buffer must be positive when the catalog "
                   "contains financial_security");
    }
    return catalog;
}

inline std::vector<Location> parse_locations(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "field locations must be a non-empty array");
    std::vector<Location> locations;
    std::set<std::string> seen;
    for (const auto& l : j) {
        Location loc;
        loc.id = require_string(l, "id", path, "locations[]");
        if (!seen.insert(loc.id).second) fail(path, "locations: duplicate id '" + loc.id + "'");
        const std::string kind = require_string(l, "kind", path, "locations[]");
        auto parsed = parse_location_kind(kind);
        if (!parsed) fail(path, "locations." + loc.id + ": unknown kind '" + kind + "'");
        loc.kind = *parsed;
        if (l.contains("capacity")) {
            const std::int64_t cap = require_int(l, "capacity", path, "locations." + loc.id);
            if (cap < 1) fail(path, "locations." + loc.id + ".capacity must be positive");
            loc.capacity = cap;
        }
        locations.push_back(std::move(loc));
    }
    std::sort(locations.begin(), locations.end(),
              [](const Location& a, const Location& b) { return a.id < b.id; });
    return locations;
}

inline std::optional<LocationKind> parse_kind_field(const json& obj, const std::string& key,
                                                    const std::string& path, const std::string& ctx) {
    if (!obj.contains(key)) return std::nullopt;
    const std::string kind = require_string(obj, key, path, ctx);
    auto parsed = parse_location_kind(kind);
    if (!parsed) fail(path, ctx + "." + key + ": unknown location kind '" + kind + "'");
    return parsed;
}

inline std::vector<ActionDef> parse_actions(const json& j, const NeedCatalog& catalog,
                                            const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "field actions must be a non-empty array");
    std::vector<ActionDef> actions;
    std::set<std::string> seen;
    for (const auto& a : j) {
        ActionDef action;
        action.id = require_string(a, "id", path, "actions[]");
        const std::string ctx = "actions." + action.id;
        if (!seen.insert(action.id).second) fail(path, "actions: duplicate id '" + action.id + "'");
        action.required_location = parse_kind_field(a, "required_location", path, ctx);
        action.moves_to = parse_kind_field(a, "moves_to", path, ctx);
        if (a.contains("required_status")) {
            const json& statuses = a.at("required_status");
            if (!statuses.is_array() || statuses.empty()) {
                fail(path, ctx + ".required_status must be a non-empty array");
            }
            std::set<Status> set;
            for (const auto& s : statuses) {
                if (!s.is_string()) fail(path, ctx + ".required_status entries must be strings");
                auto status = parse_status(s.get<std::string>());
                if (!status) fail(path, ctx + ".required_status: unknown status '" + s.get<std::string>() + "'");
                set.insert(*status);
            }
            action.required_status = std::move(set);
        }
        action.cost = int_or(a, "cost", 0, path, ctx);
        action.wage = int_or(a, "wage", 0, path, ctx);
        if (action.cost < 0) fail(path, ctx + ".cost must be non-negative");
        if (action.wage < 0) fail(path, ctx + ".wage must be non-negative");
        if (a.contains("refills")) {
            const json& refills = a.at("refills");
            if (!refills.is_object()) fail(path, ctx + ".refills must be an object");
            for (auto it = refills.begin(); it != refills.end(); ++it) {
                if (!catalog.has_need(it.key())) {
                    fail(path, ctx + ".refills: unknown need '" + it.key() + "'");
                }
                if (!it.value().is_number()) fail(path, ctx + ".refills." + it.key() + " must be a number");
                const double refill = it.value().get<double>();
                if (refill < 0.0) fail(path, ctx + ".refills." + it.key() + " must be non-negative");
                action.refills[it.key()] = refill;
            }
        }
        action.capacity_limited = bool_or(a, "capacity_limited", false, path, ctx);
        action.requires_permission = bool_or(a, "requires_permission", false, path, ctx);
        if (action.capacity_limited && (action.cost != 0 || action.wage != 0)) {
            fail(path, ctx + ": capacity-limited actions must be cost- and wage-free");
        }
        actions.push_back(std::move(action));
    }
    return actions;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

}  // namespace config_detail

inline ScenarioConfig load_scenario(const std::string& path) {
    using config_detail::fail;
    using nlohmann::json;

    ScenarioConfig config;
    config.source_path = path;
    config.raw = config_detail::load_json_file(path);
    const json& j = config.raw;
    if (!j.is_object()) fail(path, "scenario must be a JSON object");

    config.name = config_detail::require_string(j, "name", path, "scenario");
    if (config.name.empty()) fail(path, "field scenario.name must be non-empty");
    config.steps = config_detail::require_int(j, "steps", path, "scenario");
    if (config.steps < 1) fail(path, "field scenario.steps must be a positive integer");
    {
        const json& seed = config_detail::require(j, "seed", path, "scenario");
        const bool non_negative_integer =
            seed.is_number_unsigned() ||
            (seed.is_number_integer() && seed.get<std::int64_t>() >= 0);
        if (!non_negative_integer) {
            fail(path, "field scenario.seed must be a non-negative integer");
        }
        config.seed = seed.get<std::uint64_t>();
    }

    config.population = config_detail::parse_population(
        config_detail::require(j, "population", path, "scenario"), path);
    config.catalog =
        config_detail::parse_catalog(config_detail::require(j, "need_catalog", path, "scenario"), path);
    config.locations =
        config_detail::parse_locations(config_detail::require(j, "locations", path, "scenario"), path);
    config.actions = config_detail::parse_actions(
        config_detail::require(j, "actions", path, "scenario"), config.catalog, path);

    std::set<std::string> action_ids{"idle"};
    for (const auto& a : config.actions) action_ids.insert(a.id);
    std::set<std::string> location_ids;
    std::map<LocationKind, int> kind_counts;
    for (const auto& l : config.locations) {
        location_ids.insert(l.id);
        kind_counts[l.kind] += 1;
    }

    // Declared idle must stay a true no-op so the fallback guarantee holds.
    for (const auto& a : config.actions) {
        if (a.id != "idle") continue;
        if (a.cost != 0 || a.wage != 0 || !a.refills.empty() || a.moves_to || a.capacity_limited ||
            a.requires_permission || a.required_location || a.required_status) {
            fail(path, "actions.idle must be the unconstrained zero-cost, zero-refill fallback");
        }
    }
    // Movement to any concrete kind needs a destination; `home` resolves per
    // agent and is checked against the population's home location below.
    for (const auto& a : config.actions) {
        if (a.moves_to && *a.moves_to != LocationKind::home && !kind_counts.count(*a.moves_to)) {
            fail(path, "actions." + a.id + ".moves_to: no location of kind '" + to_string(*a.moves_to) + "'");
        }
    }
    if (!location_ids.count(config.population.home_location)) {
        fail(path, "population.home_location '" + config.population.home_location +
                       "' is not a declared location");
    }
    if (!location_ids.count(config.population.homeless_start_location)) {
        fail(path, "population.homeless_start_location '" + config.population.homeless_start_location +
                       "' is not a declared location");
    }

    const json& sat = config_detail::require(j, "sat_matrix", path, "scenario");
    if (!sat.is_array()) fail(path, "field sat_matrix must be an array");
    for (const auto& entry : sat) {
        const std::string need = config_detail::require_string(entry, "need", path, "sat_matrix[]");
        const std::string action = config_detail::require_string(entry, "action", path, "sat_matrix[]");
        const double value = config_detail::require_number(entry, "value", path, "sat_matrix[]");
        if (!config.catalog.has_need(need)) {
            fail(path, "sat_matrix entry (need=" + need + ", action=" + action +
                           "): need is not declared in need_catalog");
        }
        if (!action_ids.count(action)) {
            fail(path, "sat_matrix entry (need=" + need + ", action=" + action +
                           "): action is not declared in actions");
        }
        config_detail::check_unit(value, path, "sat_matrix value for (" + need + ", " + action + ")");
        config.sat.set(need, action, value);
    }

    const std::string norms_file = config_detail::require_string(j, "norms_file", path, "scenario");
    config.norms_path =
        (std::filesystem::path(path).parent_path() / norms_file).lexically_normal().string();
    config.norms = parse_norms_file(config.norms_path);
    for (const auto& norm : config.norms) {
        if (norm.aim.is_action && !action_ids.count(norm.aim.action)) {
            fail(path, "norm \"" + norm.id + "\" aims at undeclared action '" + norm.aim.action + "'");
        }
    }

    if (j.contains("active_norms")) {
        const json& active = j.at("active_norms");
        if (!active.is_array()) fail(path, "field active_norms must be an array of norm ids");
        std::vector<std::string> ids;
        std::set<std::string> known;
        for (const auto& n : config.norms) known.insert(n.id);
        for (const auto& id : active) {
            if (!id.is_string()) fail(path, "field active_norms must contain strings");
            const std::string norm_id = id.get<std::string>();
            if (!known.count(norm_id)) {
                fail(path, "active_norms references unknown norm '" + norm_id + "'");
            }
            ids.push_back(norm_id);
        }
        config.active_norms = ids;
        const std::set<std::string> on(ids.begin(), ids.end());
        for (auto& norm : config.norms) norm.active = on.count(norm.id) > 0;
    }

    if (j.contains("metrics")) {
        const json& metrics = j.at("metrics");
        config.metrics.line_fraction = config_detail::number_or(
            metrics, "line_fraction", config.metrics.line_fraction, path, "metrics");
        config.metrics.income_window =
            config_detail::int_or(metrics, "income_window", config.metrics.income_window, path, "metrics");
        config.metrics.basic_category = config_detail::string_or(
            metrics, "basic_category", config.metrics.basic_category, path, "metrics");
    }
    if (config.metrics.line_fraction <= 0.0 || config.metrics.line_fraction > 1.0) {
        fail(path, "metrics.line_fraction must lie in (0,1]");
    }
    if (config.metrics.income_window < 1) {
        fail(path, "metrics.income_window must be a positive integer");
    }

    return config;
}

// Materializes the starting world: population from the seed's first derived
// stream, the world's own stream from the second, so reruns and population
// inspection stay independent.
inline WorldState build_world(const ScenarioConfig& config) {
    WorldState world(derive_seed(config.seed, 2));
    world.agents = generate_population(config.population, config.catalog, derive_seed(config.seed, 1));
    world.locations = config.locations;
    for (const auto& action : config.actions) {
        world.actions[action.id] = action;
    }
    if (!world.actions.count("idle")) {
        ActionDef idle;
        idle.id = "idle";
        world.actions["idle"] = idle;
    }
    world.norms = config.norms;
    world.catalog = config.catalog;
    world.sat = config.sat;
    return world;
}

}  // namespace polisim
