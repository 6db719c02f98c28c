#pragma once

// Deterministic quota-based population synthesis. Category counts are exact
// (largest-remainder rounding), attribute assignment runs over seeded
// permutations, and the whole generation is a pure function of (spec,
// catalog, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polisim/agent.hpp"
#include "polisim/errors.hpp"
#include "polisim/rng.hpp"

namespace polisim {

struct IncomeBracket {
    double fraction = 0.0;
    Currency min = 0;
    Currency max = 0;
};

struct PopulationSpec {
    std::int64_t size = 0;
    std::map<Status, double> status_shares;
    double homeless_share = 0.0;
    std::vector<IncomeBracket> income_brackets;
    std::pair<int, int> age_range{18, 90};
    std::map<std::string, double> gender_shares;
    double residency_share = 1.0;
    double bank_account_share = 1.0;
    std::string home_location = "home";
    std::string homeless_start_location = "street";
};

namespace detail {

inline bool sums_to_one(double total) { return std::abs(total - 1.0) <= 1e-9; }

}  // namespace detail

inline void validate_population_spec(const PopulationSpec& spec) {
    const auto fail = [](const std::string& msg) -> ValidationError {
        return ValidationError("population spec: " + msg);
    };
    if (spec.size < 1) throw fail("size must be positive");
    double status_total = 0.0;
    for (const auto& [status, share] : spec.status_shares) {
        if (share < 0.0 || share > 1.0) throw fail("status share for " + to_string(status) + " outside [0,1]");
        status_total += share;
    }
    if (!detail::sums_to_one(status_total)) throw fail("status shares must sum to 1");
    if (spec.homeless_share < 0.0 || spec.homeless_share > 1.0) throw fail("homeless share outside [0,1]");
    if (spec.income_brackets.empty()) throw fail("at least one income bracket required");
    double bracket_total = 0.0;
    for (const auto& b : spec.income_brackets) {
        if (b.fraction < 0.0 || b.fraction > 1.0) throw fail("bracket fraction outside [0,1]");
        if (b.min < 0 || b.max < b.min) throw fail("bracket bounds must satisfy 0 <= min <= max");
        bracket_total += b.fraction;
    }
    if (!detail::sums_to_one(bracket_total)) throw fail("income bracket fractions must sum to 1");
    if (spec.age_range.first < 0 || spec.age_range.second < spec.age_range.first) {
        throw fail("age range must satisfy 0 <= min <= max");
    }
    if (spec.gender_shares.empty()) throw fail("at least one gender share required");
    double gender_total = 0.0;
    for (const auto& [token, share] : spec.gender_shares) {
        if (token.empty()) throw fail("gender tokens must be non-empty");
        if (share < 0.0 || share > 1.0) throw fail("gender share for " + token + " outside [0,1]");
        gender_total += share;
    }
    if (!detail::sums_to_one(gender_total)) throw fail("gender shares must sum to 1");
    if (spec.residency_share < 0.0 || spec.residency_share > 1.0) throw fail("residency share outside [0,1]");
    if (spec.bank_account_share < 0.0 || spec.bank_account_share > 1.0) {
        throw fail("bank account share outside [0,1]");
    }
}

// Largest-remainder apportionment: floor every quota, then hand the leftover
// units to the largest fractional remainders (ties: larger share first, then
// earlier position). Counts always sum to `size` and each differs from
// size*share by less than 1.
inline std::vector<std::int64_t> largest_remainder(const std::vector<double>& shares,
                                                   std::int64_t size) {
    std::vector<std::int64_t> counts(shares.size(), 0);
    std::vector<double> remainders(shares.size(), 0.0);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const double raw = static_cast<double>(size) * shares[i];
        counts[i] = static_cast<std::int64_t>(std::floor(raw));
        remainders[i] = raw - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(shares.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
        return shares[a] > shares[b];
    });
    for (std::size_t k = 0; assigned < size; ++k) {
        counts[order[k % order.size()]] += 1;
        assigned += 1;
    }
    return counts;
}

namespace detail {

// Count for a single binary share, consistent with largest_remainder on
// {share, 1 - share}.
inline std::int64_t binary_quota(double share, std::int64_t size) {
    return largest_remainder({share, 1.0 - share}, size)[0];
}

// First `count` positions of a seeded permutation of [0, size).
inline std::vector<bool> pick_flags(std::int64_t size, std::int64_t count, RngStream& rng) {
    std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(size));
    std::vector<bool> flags(static_cast<std::size_t>(size), false);
    for (std::int64_t i = 0; i < count; ++i) flags[perm[static_cast<std::size_t>(i)]] = true;
    return flags;
}

}  // namespace detail

// Synthesizes `spec.size` agents. Quotas are exact per largest_remainder;
// every assignment ordering comes from the seeded stream. Homeless agents get
// an absent address, zero wealth, and are never status employed (their
// bracket draw still fills the income profile field). Initial need levels are
// drawn uniformly from the catalog's ranges, except financial security, which
// is computed from starting wealth.
inline std::vector<AgentState> generate_population(const PopulationSpec& spec,
                                                   const NeedCatalog& catalog, std::uint64_t seed) {
    validate_population_spec(spec);
    const std::int64_t size = spec.size;
    const std::size_t n = static_cast<std::size_t>(size);
    RngStream rng(seed);

    const std::int64_t homeless_count = detail::binary_quota(spec.homeless_share, size);
    std::vector<double> status_share_list;
    std::vector<Status> status_order;
    for (Status s : all_statuses()) {
        auto it = spec.status_shares.find(s);
        status_order.push_back(s);
        status_share_list.push_back(it == spec.status_shares.end() ? 0.0 : it->second);
    }
    const std::vector<std::int64_t> status_counts = largest_remainder(status_share_list, size);
    std::int64_t employed_count = 0;
    for (std::size_t i = 0; i < status_order.size(); ++i) {
        if (status_order[i] == Status::employed) employed_count = status_counts[i];
    }
    if (employed_count > size - homeless_count) {
        throw ValidationError("population spec infeasible: " + std::to_string(employed_count) +
                              " employed agents but only " + std::to_string(size - homeless_count) +
                              " housed agents (homeless agents are never employed)");
    }

    const std::vector<bool> homeless = detail::pick_flags(size, homeless_count, rng);

    // Status tokens are dealt along a seeded agent permutation. Homeless
    // agents pick first so the non-employed tokens they are restricted to are
    // still unconsumed; the feasibility check above guarantees enough exist.
    std::vector<Status> status_tokens;
    for (std::size_t i = 0; i < status_order.size(); ++i) {
        status_tokens.insert(status_tokens.end(), static_cast<std::size_t>(status_counts[i]),
                             status_order[i]);
    }
    rng.shuffle(status_tokens);
    std::vector<Status> status_of(n, Status::unemployed);
    {
        const std::vector<std::size_t> deal_order = rng.permutation(n);
        std::vector<bool> consumed(status_tokens.size(), false);
        auto deal = [&](bool to_homeless) {
            for (std::size_t idx : deal_order) {
                if (homeless[idx] != to_homeless) continue;
                for (std::size_t k = 0; k < status_tokens.size(); ++k) {
                    if (consumed[k]) continue;
                    if (to_homeless && status_tokens[k] == Status::employed) continue;
                    consumed[k] = true;
                    status_of[idx] = status_tokens[k];
                    break;
                }
            }
        };
        deal(true);
        deal(false);
    }

    std::vector<double> gender_share_list;
    std::vector<std::string> gender_order;
    for (const auto& [token, share] : spec.gender_shares) {
        gender_order.push_back(token);
        gender_share_list.push_back(share);
    }
    const std::vector<std::int64_t> gender_counts = largest_remainder(gender_share_list, size);
    std::vector<std::string> gender_tokens;
    for (std::size_t i = 0; i < gender_order.size(); ++i) {
        gender_tokens.insert(gender_tokens.end(), static_cast<std::size_t>(gender_counts[i]),
                             gender_order[i]);
    }
    rng.shuffle(gender_tokens);

    std::vector<double> bracket_share_list;
    for (const auto& b : spec.income_brackets) bracket_share_list.push_back(b.fraction);
    const std::vector<std::int64_t> bracket_counts = largest_remainder(bracket_share_list, size);
    std::vector<std::size_t> bracket_of;
    for (std::size_t i = 0; i < bracket_counts.size(); ++i) {
        bracket_of.insert(bracket_of.end(), static_cast<std::size_t>(bracket_counts[i]), i);
    }
    rng.shuffle(bracket_of);

    const std::vector<bool> resident = detail::pick_flags(size, detail::binary_quota(spec.residency_share, size), rng);
    const std::vector<bool> banked =
        detail::pick_flags(size, detail::binary_quota(spec.bank_account_share, size), rng);

    std::vector<AgentState> agents;
    agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        AgentState agent;
        char id[32];
        std::snprintf(id, sizeof(id), "a%05zu", i);
        agent.id = id;
        agent.profile.age = static_cast<int>(
            rng.next_int(spec.age_range.first, spec.age_range.second));
        agent.profile.gender = gender_tokens[i];
        agent.profile.status = status_of[i];
        agent.profile.residency = resident[i];
        agent.profile.has_bank_account = banked[i];
        const IncomeBracket& bracket = spec.income_brackets[bracket_of[i]];
        const Currency drawn = rng.next_int(bracket.min, bracket.max);
        agent.profile.income = drawn;
        if (homeless[i]) {
            agent.profile.address = std::nullopt;
            agent.wealth = 0;
            agent.location = spec.homeless_start_location;
        } else {
            agent.profile.address = spec.home_location;
            agent.wealth = drawn;
            agent.location = spec.home_location;
        }
        for (const auto& category : catalog.categories) {
            for (const auto& need : category.needs) {
                if (need == kFinancialSecurityNeed) {
                    agent.needs.nsl[need] =
                        financial_security_nsl(agent.wealth, catalog.financial_reference_buffer);
                } else {
                    const auto [lo, hi] = catalog.initial_range_of(need);
                    agent.needs.nsl[need] = rng.next_in(lo, hi);
                }
            }
            const double base = catalog.importance_of(category.name);
            agent.needs.importance[category.name] = base;
        }
        auto override_it = catalog.importance_overrides.find(agent.profile.status);
        if (override_it != catalog.importance_overrides.end()) {
            for (const auto& [category, weight] : override_it->second) {
                agent.needs.importance[category] = weight;
            }
        }
        agents.push_back(std::move(agent));
    }
    return agents;
}

}  // namespace polisim
