#pragma once

// The physical environment and the synchronized settlement phase. A step has
// two halves: deliberation (callers read a frozen world and pick one action
// per agent) and settle(), which executes every chosen action, resolves
// capacity contention, applies norm consequences, recomputes need
// satisfaction, and advances the clock by exactly one.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polisim/agent.hpp"
#include "polisim/deliberation.hpp"
#include "polisim/errors.hpp"
#include "polisim/norms.hpp"
#include "polisim/rng.hpp"

namespace polisim {

enum class LocationKind { home, workplace, school, shelter, shop, clinic, public_space };

inline std::string to_string(LocationKind k) {
    switch (k) {
        case LocationKind::home: return "home";
        case LocationKind::workplace: return "workplace";
        case LocationKind::school: return "school";
        case LocationKind::shelter: return "shelter";
        case LocationKind::shop: return "shop";
        case LocationKind::clinic: return "clinic";
        case LocationKind::public_space: return "public_space";
    }
    return "?";
}

inline std::optional<LocationKind> parse_location_kind(const std::string& token) {
    if (token == "home") return LocationKind::home;
    if (token == "workplace") return LocationKind::workplace;
    if (token == "school") return LocationKind::school;
    if (token == "shelter") return LocationKind::shelter;
    if (token == "shop") return LocationKind::shop;
    if (token == "clinic") return LocationKind::clinic;
    if (token == "public_space") return LocationKind::public_space;
    return std::nullopt;
}

struct Location {
    std::string id;
    LocationKind kind = LocationKind::public_space;
    std::optional<std::int64_t> capacity;  // absent = unbounded
};

// One executable action. Movement actions carry a target location kind;
// `home` resolves to the agent's own address. Capacity-limited actions are
// cost- and wage-free: when a grant is denied only the refill is withheld.
struct ActionDef {
    std::string id;
    std::optional<LocationKind> required_location;
    std::optional<std::set<Status>> required_status;
    std::optional<LocationKind> moves_to;
    Currency cost = 0;
    Currency wage = 0;
    std::map<std::string, double> refills;  // need -> realized refill on success
    bool capacity_limited = false;
    bool requires_permission = false;  // reachable only via an active permission norm
};

enum class EventKind { action, moved, paid, earned, granted, denied, fined, unpaid_fine, transfer };

inline std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::action: return "action";
        case EventKind::moved: return "moved";
        case EventKind::paid: return "paid";
        case EventKind::earned: return "earned";
        case EventKind::granted: return "granted";
        case EventKind::denied: return "denied";
        case EventKind::fined: return "fined";
        case EventKind::unpaid_fine: return "unpaid_fine";
        case EventKind::transfer: return "transfer";
    }
    return "?";
}

struct Event {
    std::int64_t step = 0;
    std::string agent_id;
    EventKind kind = EventKind::action;
    std::string detail;
};

struct WorldState {
    std::int64_t step = 0;
    std::vector<AgentState> agents;      // sorted by id
    std::vector<Location> locations;     // sorted by id
    std::map<std::string, ActionDef> actions;
    std::vector<NormStatement> norms;
    NeedCatalog catalog;
    SatMatrix sat;
    RngStream rng;
    std::vector<Event> events;  // append-only

    explicit WorldState(std::uint64_t rng_seed = 0) : rng(rng_seed) {}

    const Location* find_location(const std::string& id) const {
        auto it = std::lower_bound(locations.begin(), locations.end(), id,
                                   [](const Location& l, const std::string& key) { return l.id < key; });
        if (it == locations.end() || it->id != id) return nullptr;
        return &*it;
    }

    const AgentState* find_agent(const std::string& id) const {
        auto it = std::lower_bound(agents.begin(), agents.end(), id,
                                   [](const AgentState& a, const std::string& key) { return a.id < key; });
        if (it == agents.end() || it->id != id) return nullptr;
        return &*it;
    }

    std::optional<LocationKind> kind_of(const std::string& location_id) const {
        const Location* loc = find_location(location_id);
        if (!loc) return std::nullopt;
        return loc->kind;
    }

    // Lexicographically first location of the given kind, if any.
    const Location* first_of_kind(LocationKind kind) const {
        for (const auto& loc : locations) {
            if (loc.kind == kind) return &loc;
        }
        return nullptr;
    }
};

// Destination of a movement action: `home` goes to the agent's own address,
// any other kind to the lexicographically first location of that kind.
// Empty optional means the movement cannot be satisfied (no address / no
// such location), which excludes the action from availability.
inline std::optional<std::string> resolve_movement(const AgentState& agent, LocationKind target,
                                                   const WorldState& world) {
    if (target == LocationKind::home) {
        if (!agent.profile.address) return std::nullopt;
        if (!world.find_location(*agent.profile.address)) return std::nullopt;
        return agent.profile.address;
    }
    const Location* loc = world.first_of_kind(target);
    if (!loc) return std::nullopt;
    return loc->id;
}

// Applies active norms to a base action set: permissions whose attribute and
// condition hold add their aim; removal-mode prohibitions whose attribute and
// condition hold remove theirs. Sanction-mode prohibitions leave availability
// untouched (their or-else fires at settlement instead). Pure; evaluation
// reads the agent's last settled action as the `performed` context.
inline std::vector<std::string> gate_actions(const std::vector<std::string>& base,
                                             const std::vector<NormStatement>& norms,
                                             const AgentState& agent, const WorldState&) {
    std::set<std::string> result(base.begin(), base.end());
    for (const auto& norm : norms) {
        if (!norm.active || !norm.aim.is_action) continue;
        if (norm.deontic == Deontic::obligation) continue;
        if (norm.deontic == Deontic::prohibition && norm.enforcement != Enforcement::removal) continue;
        if (!evaluate_predicate(norm.attribute, agent, agent.last_action) ||
            !evaluate_predicate(norm.condition, agent, agent.last_action)) {
            continue;
        }
        if (norm.deontic == Deontic::permission) {
            result.insert(norm.aim.action);
        } else {
            result.erase(norm.aim.action);
        }
    }
    return {result.begin(), result.end()};
}

namespace detail {

inline bool movement_ok(const AgentState& agent, const ActionDef& action, const WorldState& world) {
    if (!action.moves_to) return true;
    return resolve_movement(agent, *action.moves_to, world).has_value();
}

}  // namespace detail

// Every action the agent could execute this step, lexicographically sorted
// and never empty: base definitions filtered by status, current location
// kind, movement resolvability, and affordability; then norm gating; then
// the idle fallback. Permission-granted actions skip the status/location
// filters but must still be affordable and movement-resolvable.
inline std::vector<std::string> available_actions(const AgentState& agent, const WorldState& world) {
    std::vector<std::string> base;
    for (const auto& [id, action] : world.actions) {
        if (action.requires_permission) continue;
        if (action.required_status && !action.required_status->count(agent.profile.status)) continue;
        if (action.required_location) {
            auto here = world.kind_of(agent.location);
            if (!here || *here != *action.required_location) continue;
        }
        if (!detail::movement_ok(agent, action, world)) continue;
        if (action.cost > agent.wealth) continue;
        base.push_back(id);
    }
    std::set<std::string> result;
    for (const auto& id : gate_actions(base, world.norms, agent, world)) {
        auto it = world.actions.find(id);
        if (it == world.actions.end()) continue;
        if (it->second.cost > agent.wealth) continue;
        if (!detail::movement_ok(agent, it->second, world)) continue;
        result.insert(id);
    }
    result.insert("idle");
    return {result.begin(), result.end()};
}

// Grants every requester when they fit, otherwise exactly `capacity` of them
// chosen by a seeded uniform permutation. Only the contended case consumes
// randomness, so uncontended steps leave the stream untouched.
inline std::set<std::string> resolve_capacity(const std::vector<std::string>& requests,
                                              std::int64_t capacity, RngStream& rng) {
    if (capacity < 1) {
        throw ContractViolation("resolve_capacity: capacity must be >= 1");
    }
    if (static_cast<std::int64_t>(requests.size()) <= capacity) {
        return {requests.begin(), requests.end()};
    }
    std::vector<std::string> order = requests;
    rng.shuffle(order);
    return {order.begin(), order.begin() + capacity};
}

namespace detail {

struct CapacityRequest {
    std::string agent_id;
    std::string action_id;
};

inline std::string money_detail(const std::string& label, Currency amount) {
    return label + ":" + std::to_string(amount);
}

}  // namespace detail

// Executes one synchronized settlement:
//   (0) every agent's choice is validated against its available set before
//       any mutation;
//   (1) agents run in a seeded uniform permutation: move, pay cost, collect
//       wage, mark last_action;
//   (2) capacity-limited actions are resolved per location; denied agents
//       forfeit the refill only;
//   (3) norm consequences apply per agent (fines debit, floored at zero
//       wealth with the shortfall logged; transfers credit);
//   (4) every need updates via decay + realized refill, with
//       financial_security recomputed from post-settlement wealth;
//   (5) the step counter advances by one.
// All events are logged with the pre-settlement step number.
inline void settle(WorldState& world, const std::map<std::string, std::string>& chosen) {
    const std::int64_t t = world.step;
    const auto fail = [&](const std::string& msg) -> ContractViolation {
        return ContractViolation("step " + std::to_string(t) + ": " + msg);
    };

    if (chosen.size() != world.agents.size()) {
        throw fail("settle expects exactly one chosen action per agent (got " +
                   std::to_string(chosen.size()) + " for " + std::to_string(world.agents.size()) +
                   " agents)");
    }
    for (const auto& agent : world.agents) {
        auto it = chosen.find(agent.id);
        if (it == chosen.end()) {
            throw fail("agent " + agent.id + " has no chosen action");
        }
        const auto available = available_actions(agent, world);
        if (!std::binary_search(available.begin(), available.end(), it->second)) {
            throw fail("agent " + agent.id + " chose unavailable action " + it->second);
        }
    }

    const std::vector<std::size_t> order = world.rng.permutation(world.agents.size());
    const auto log = [&](const std::string& agent_id, EventKind kind, std::string detail) {
        world.events.push_back(Event{t, agent_id, kind, std::move(detail)});
    };

    // (1) movement, costs, wages, last_action; collect capacity requests and
    // the refills that are unconditional.
    std::map<std::string, std::vector<detail::CapacityRequest>> requests_by_location;
    std::map<std::string, std::map<std::string, double>> realized;  // agent -> need -> refill
    for (std::size_t idx : order) {
        AgentState& agent = world.agents[idx];
        const ActionDef& action = world.actions.at(chosen.at(agent.id));
        log(agent.id, EventKind::action, action.id);
        if (action.moves_to) {
            const auto dest = resolve_movement(agent, *action.moves_to, world);
            if (!dest) {
                throw fail("agent " + agent.id + " cannot resolve movement for " + action.id);
            }
            if (*dest != agent.location) {
                agent.location = *dest;
                log(agent.id, EventKind::moved, *dest);
            }
        }
        if (action.cost > 0) {
            if (action.cost > agent.wealth) {
                throw fail("agent " + agent.id + " cannot afford " + action.id);
            }
            agent.wealth -= action.cost;
            log(agent.id, EventKind::paid, detail::money_detail(action.id, action.cost));
        }
        if (action.wage > 0) {
            agent.wealth += action.wage;
            log(agent.id, EventKind::earned, detail::money_detail(action.id, action.wage));
        }
        agent.last_action = action.id;
        if (action.capacity_limited) {
            requests_by_location[agent.location].push_back({agent.id, action.id});
        } else {
            for (const auto& [need, refill] : action.refills) {
                realized[agent.id][need] += refill;
            }
        }
    }

    // (2) capacity resolution, locations in id order, requests in execution
    // order. Unbounded locations grant everyone without touching the stream.
    for (const auto& [location_id, requests] : requests_by_location) {
        const Location* loc = world.find_location(location_id);
        std::set<std::string> granted;
        if (!loc || !loc->capacity) {
            for (const auto& r : requests) granted.insert(r.agent_id);
        } else {
            std::vector<std::string> ids;
            ids.reserve(requests.size());
            for (const auto& r : requests) ids.push_back(r.agent_id);
            granted = resolve_capacity(ids, *loc->capacity, world.rng);
        }
        for (const auto& r : requests) {
            if (granted.count(r.agent_id)) {
                log(r.agent_id, EventKind::granted, r.action_id + ":" + location_id);
                for (const auto& [need, refill] : world.actions.at(r.action_id).refills) {
                    realized[r.agent_id][need] += refill;
                }
            } else {
                log(r.agent_id, EventKind::denied, r.action_id + ":" + location_id);
            }
        }
    }

    // (3) consequences. One stream draw per agent regardless of norm matches,
    // so inactive norms cannot shift later randomness.
    for (std::size_t idx : order) {
        AgentState& agent = world.agents[idx];
        const double draw = world.rng.next_unit();
        for (const auto& ev : consequences_for(world.norms, agent, agent.last_action, draw)) {
            if (ev.kind == ConsequenceSpec::Kind::fine) {
                const Currency assessed = ev.amount;
                const Currency collected = std::min(assessed, agent.wealth);
                agent.wealth -= collected;
                log(agent.id, EventKind::fined, detail::money_detail(ev.norm_id, assessed));
                if (collected < assessed) {
                    log(agent.id, EventKind::unpaid_fine,
                        detail::money_detail(ev.norm_id, assessed - collected));
                }
            } else if (ev.kind == ConsequenceSpec::Kind::transfer) {
                agent.wealth += ev.amount;
                log(agent.id, EventKind::transfer, detail::money_detail(ev.norm_id, ev.amount));
            }
        }
    }

    // (4) needs update in catalog order; financial security tracks wealth.
    for (AgentState& agent : world.agents) {
        const auto& mine = realized[agent.id];
        for (const auto& category : world.catalog.categories) {
            for (const auto& need : category.needs) {
                double& nsl = agent.needs.nsl.at(need);
                if (need == kFinancialSecurityNeed) {
                    nsl = financial_security_nsl(agent.wealth, world.catalog.financial_reference_buffer);
                } else {
                    auto it = mine.find(need);
                    const double refill = it == mine.end() ? 0.0 : it->second;
                    nsl = update_need(nsl, world.catalog.decay_of(need), refill);
                }
            }
        }
    }

    // (5)
    world.step = t + 1;
}

}  // namespace polisim
