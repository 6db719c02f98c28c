#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polisim/errors.hpp"

namespace polisim {

// Whole currency units throughout, so money bookkeeping is exact.
using Currency = std::int64_t;

enum class Status { student, employed, unemployed, retired };

inline const std::vector<Status>& all_statuses() {
    static const std::vector<Status> statuses{Status::student, Status::employed,
                                              Status::unemployed, Status::retired};
    return statuses;
}

inline std::string to_string(Status s) {
    switch (s) {
        case Status::student: return "student";
        case Status::employed: return "employed";
        case Status::unemployed: return "unemployed";
        case Status::retired: return "retired";
    }
    return "?";
}

inline std::optional<Status> parse_status(const std::string& token) {
    for (Status s : all_statuses()) {
        if (to_string(s) == token) return s;
    }
    return std::nullopt;
}

// Demographic and socio-economic features of one agent. An absent address
// means the agent is homeless.
struct Profile {
    int age = 0;
    std::string gender;
    std::optional<std::string> address;
    Currency income = 0;
    Status status = Status::unemployed;
    bool residency = false;
    bool has_bank_account = false;
};

// The need that is recomputed from wealth instead of decaying.
inline constexpr const char* kFinancialSecurityNeed = "financial_security";

struct NeedCategory {
    std::string name;
    std::vector<std::string> needs;
};

// Needs grouped into ordered categories, plus the per-need parameters that a
// scenario configures. Iteration order (categories, then needs within each)
// fixes the summation order everywhere, so results are bit-stable.
struct NeedCatalog {
    std::vector<NeedCategory> categories;
    std::map<std::string, double> decay;                // need -> rate per step, default 0
    double deprivation_threshold = 0.3;

    // Initialization and weighting defaults, read from scenario config.
    std::pair<double, double> initial_nsl_default{0.5, 0.9};
    std::map<std::string, std::pair<double, double>> initial_nsl;  // per-need override
    std::map<std::string, double> importance;                      // category -> weight
    std::map<Status, std::map<std::string, double>> importance_overrides;
    Currency financial_reference_buffer = 900;

    std::vector<std::string> all_needs() const {
        std::vector<std::string> out;
        for (const auto& cat : categories) {
            out.insert(out.end(), cat.needs.begin(), cat.needs.end());
        }
        return out;
    }

    bool has_need(const std::string& need) const {
        for (const auto& cat : categories) {
            if (std::find(cat.needs.begin(), cat.needs.end(), need) != cat.needs.end()) {
                return true;
            }
        }
        return false;
    }

    double decay_of(const std::string& need) const {
        auto it = decay.find(need);
        return it == decay.end() ? 0.0 : it->second;
    }

    std::pair<double, double> initial_range_of(const std::string& need) const {
        auto it = initial_nsl.find(need);
        return it == initial_nsl.end() ? initial_nsl_default : it->second;
    }

    double importance_of(const std::string& category) const {
        auto it = importance.find(category);
        return it == importance.end() ? 1.0 : it->second;
    }

    const NeedCategory* find_category(const std::string& name) const {
        for (const auto& cat : categories) {
            if (cat.name == name) return &cat;
        }
        return nullptr;
    }

    // food/financial_security/shelter/clothing/health/education as basic
    // needs, recognition/belonging as social needs.
    static NeedCatalog default_catalog() {
        NeedCatalog c;
        c.categories = {
            {"basic",
             {"food", kFinancialSecurityNeed, "shelter", "clothing", "health", "education"}},
            {"social", {"recognition", "belonging"}},
        };
        c.importance = {{"basic", 1.0}, {"social", 0.6}};
        return c;
    }
};

// Per-agent needs state: satisfaction level per need and importance weight
// per category, both in [0, 1].
struct NeedsState {
    std::map<std::string, double> nsl;
    std::map<std::string, double> importance;
};

struct AgentState {
    std::string id;
    Profile profile;
    Currency wealth = 0;
    NeedsState needs;
    std::string location;
    std::optional<std::string> last_action;
};

// Urg(n) = 1 - NSL(n).
inline double urgency(double nsl_value) {
    if (!(nsl_value >= 0.0 && nsl_value <= 1.0)) {
        throw ContractViolation("urgency: nsl value outside [0,1]");
    }
    return 1.0 - nsl_value;
}

// One per-need update per settlement: decay always applies, realized refill
// is added, and the result is clamped into [0, 1].
inline double update_need(double nsl_value, double decay_rate, double realized_refill) {
    if (!(nsl_value >= 0.0 && nsl_value <= 1.0)) {
        throw ContractViolation("update_need: nsl value outside [0,1]");
    }
    if (!(decay_rate >= 0.0 && decay_rate <= 1.0)) {
        throw ContractViolation("update_need: decay rate outside [0,1]");
    }
    if (!(realized_refill >= 0.0)) {
        throw ContractViolation("update_need: negative refill");
    }
    return std::clamp(nsl_value - decay_rate + realized_refill, 0.0, 1.0);
}

// financial_security is derived from wealth each settlement rather than
// decaying: linear up to a reference buffer, saturating at 1.
inline double financial_security_nsl(Currency wealth, Currency reference_buffer) {
    if (reference_buffer <= 0) {
        throw ContractViolation("financial_security_nsl: reference buffer must be positive");
    }
    if (wealth < 0) {
        throw ContractViolation("financial_security_nsl: negative wealth");
    }
    return std::min(1.0, static_cast<double>(wealth) / static_cast<double>(reference_buffer));
}

}  // namespace polisim
