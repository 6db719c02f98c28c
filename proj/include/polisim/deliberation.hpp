#pragma once

#include <map>
#include <string>
#include <vector>

#include "polisim/agent.hpp"
#include "polisim/errors.hpp"

namespace polisim {

// Expected satisfaction Sat(n, a) per (need, action) pair. Sparse: pairs
// without an entry read as exactly 0.
class SatMatrix {
public:
    void set(const std::string& need, const std::string& action, double value) {
        by_action_[action][need] = value;
    }

    double get(const std::string& need, const std::string& action) const {
        auto a = by_action_.find(action);
        if (a == by_action_.end()) return 0.0;
        auto n = a->second.find(need);
        return n == a->second.end() ? 0.0 : n->second;
    }

    // Sorted (need, action, value) triples.
    std::vector<std::tuple<std::string, std::string, double>> entries() const {
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& [action, needs] : by_action_) {
            for (const auto& [need, value] : needs) {
                out.emplace_back(need, action, value);
            }
        }
        return out;
    }

    bool empty() const { return by_action_.empty(); }

private:
    // Keyed action-first so scoring one action touches a single inner map.
    std::map<std::string, std::map<std::string, double>> by_action_;
};

struct ActionScore {
    std::string action;
    double score = 0.0;
};

// Deliberation score of one candidate action:
//
//   sum over categories c of Imp(c) * sum over needs n in c of Sat(n,a) * Urg(n)
//
// Summation runs in catalog order (categories, then needs within each) so the
// floating-point result is identical on every evaluation. Unknown actions are
// legal and score through the sparse-zero Sat entries.
inline double score_action(const NeedsState& needs, const NeedCatalog& catalog,
                           const SatMatrix& sat, const std::string& action) {
    double total = 0.0;
    for (const auto& category : catalog.categories) {
        auto imp = needs.importance.find(category.name);
        if (imp == needs.importance.end()) {
            throw ContractViolation("score_action: no importance weight for category '" +
                                    category.name + "'");
        }
        double category_sum = 0.0;
        for (const auto& need : category.needs) {
            auto nsl = needs.nsl.find(need);
            if (nsl == needs.nsl.end()) {
                throw ContractViolation("score_action: needs state missing need '" + need + "'");
            }
            category_sum += sat.get(need, action) * urgency(nsl->second);
        }
        total += category_sum * imp->second;
    }
    return total;
}

inline std::vector<ActionScore> score_actions(const NeedsState& needs, const NeedCatalog& catalog,
                                              const SatMatrix& sat,
                                              const std::vector<std::string>& actions) {
    std::vector<ActionScore> out;
    out.reserve(actions.size());
    for (const auto& action : actions) {
        out.push_back({action, score_action(needs, catalog, sat, action)});
    }
    return out;
}

// Greedy selection: the available action with the largest score wins, ties
// broken by lexicographically smallest action identifier.
inline std::string select_action(const AgentState& agent, const std::vector<std::string>& available,
                                 const NeedCatalog& catalog, const SatMatrix& sat) {
    if (available.empty()) {
        throw ContractViolation("select_action: agent '" + agent.id +
                                "' has an empty available action set");
    }
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& action : available) {
        const double score = score_action(agent.needs, catalog, sat, action);
        if (best == nullptr || score > best_score || (score == best_score && action < *best)) {
            best = &action;
            best_score = score;
        }
    }
    return *best;
}

}  // namespace polisim
