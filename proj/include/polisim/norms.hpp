#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polisim/agent.hpp"
#include "polisim/errors.hpp"

namespace polisim {

enum class Jurisdiction { supranational, national, regional, local };
enum class Deontic { permission, obligation, prohibition };
enum class Character { discriminatory, distributive, neutral };

// How an active prohibition is enforced: `removal` drops the action from the
// available set, `sanction` leaves it choosable and fires the or-else when it
// is performed.
enum class Enforcement { removal, sanction };

inline std::string to_string(Jurisdiction j) {
    switch (j) {
        case Jurisdiction::supranational: return "supranational";
        case Jurisdiction::national: return "national";
        case Jurisdiction::regional: return "regional";
        case Jurisdiction::local: return "local";
    }
    return "?";
}

inline std::optional<Jurisdiction> parse_jurisdiction(const std::string& token) {
    for (Jurisdiction j : {Jurisdiction::supranational, Jurisdiction::national,
                           Jurisdiction::regional, Jurisdiction::local}) {
        if (to_string(j) == token) return j;
    }
    return std::nullopt;
}

inline std::string to_string(Deontic d) {
    switch (d) {
        case Deontic::permission: return "permission";
        case Deontic::obligation: return "obligation";
        case Deontic::prohibition: return "prohibition";
    }
    return "?";
}

inline std::optional<Deontic> parse_deontic(const std::string& token) {
    for (Deontic d : {Deontic::permission, Deontic::obligation, Deontic::prohibition}) {
        if (to_string(d) == token) return d;
    }
    return std::nullopt;
}

inline std::string to_string(Character c) {
    switch (c) {
        case Character::discriminatory: return "discriminatory";
        case Character::distributive: return "distributive";
        case Character::neutral: return "neutral";
    }
    return "?";
}

inline std::optional<Character> parse_character(const std::string& token) {
    for (Character c : {Character::discriminatory, Character::distributive, Character::neutral}) {
        if (to_string(c) == token) return c;
    }
    return std::nullopt;
}

inline std::string to_string(Enforcement e) {
    return e == Enforcement::removal ? "removal" : "sanction";
}

inline std::optional<Enforcement> parse_enforcement(const std::string& token) {
    if (token == "removal") return Enforcement::removal;
    if (token == "sanction") return Enforcement::sanction;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Predicates

// Closed vocabulary of agent fields a predicate may test.
enum class PredField { age, income, wealth, status, residency, has_bank_account, address };

inline std::string to_string(PredField f) {
    switch (f) {
        case PredField::age: return "age";
        case PredField::income: return "income";
        case PredField::wealth: return "wealth";
        case PredField::status: return "status";
        case PredField::residency: return "residency";
        case PredField::has_bank_account: return "has_bank_account";
        case PredField::address: return "address";
    }
    return "?";
}

inline std::optional<PredField> parse_pred_field(const std::string& token) {
    for (PredField f : {PredField::age, PredField::income, PredField::wealth, PredField::status,
                        PredField::residency, PredField::has_bank_account, PredField::address}) {
        if (to_string(f) == token) return f;
    }
    return std::nullopt;
}

enum class CompareOp { eq, ne, lt, le, gt, ge };

inline std::string to_string(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "==";
        case CompareOp::ne: return "!=";
        case CompareOp::lt: return "<";
        case CompareOp::le: return "<=";
        case CompareOp::gt: return ">";
        case CompareOp::ge: return ">=";
    }
    return "?";
}

struct PredLiteral {
    enum class Kind { number, status, boolean, null };
    Kind kind = Kind::number;
    double number = 0.0;
    Status status = Status::unemployed;
    bool boolean = false;

    friend bool operator==(const PredLiteral& a, const PredLiteral& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::number: return a.number == b.number;
            case Kind::status: return a.status == b.status;
            case Kind::boolean: return a.boolean == b.boolean;
            case Kind::null: return true;
        }
        return false;
    }
};

// Boolean expression tree over the closed atom vocabulary. Evaluation is
// total: every well-formed predicate yields true or false for every agent.
struct Predicate {
    enum class Kind { always, compare, performed, negation, conjunction, disjunction };

    Kind kind = Kind::always;
    PredField field = PredField::age;  // compare
    CompareOp op = CompareOp::eq;      // compare
    PredLiteral literal;               // compare
    std::string action;                // performed
    std::vector<Predicate> children;   // negation (1), conjunction/disjunction (2+)

    static Predicate always() { return Predicate{}; }

    static Predicate compare(PredField f, CompareOp o, PredLiteral lit) {
        Predicate p;
        p.kind = Kind::compare;
        p.field = f;
        p.op = o;
        p.literal = lit;
        return p;
    }

    static Predicate performed(std::string action_id) {
        Predicate p;
        p.kind = Kind::performed;
        p.action = std::move(action_id);
        return p;
    }

    static Predicate negation(Predicate child) {
        Predicate p;
        p.kind = Kind::negation;
        p.children.push_back(std::move(child));
        return p;
    }

    static Predicate conjunction(std::vector<Predicate> children) {
        Predicate p;
        p.kind = Kind::conjunction;
        p.children = std::move(children);
        return p;
    }

    static Predicate disjunction(std::vector<Predicate> children) {
        Predicate p;
        p.kind = Kind::disjunction;
        p.children = std::move(children);
        return p;
    }

    friend bool operator==(const Predicate& a, const Predicate& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::always: return true;
            case Kind::compare:
                return a.field == b.field && a.op == b.op && a.literal == b.literal;
            case Kind::performed: return a.action == b.action;
            case Kind::negation:
            case Kind::conjunction:
            case Kind::disjunction: return a.children == b.children;
        }
        return false;
    }
};

namespace detail {

template <typename T>
bool compare_ordered(const T& lhs, CompareOp op, const T& rhs) {
    switch (op) {
        case CompareOp::eq: return lhs == rhs;
        case CompareOp::ne: return lhs != rhs;
        case CompareOp::lt: return lhs < rhs;
        case CompareOp::le: return lhs <= rhs;
        case CompareOp::gt: return lhs > rhs;
        case CompareOp::ge: return lhs >= rhs;
    }
    return false;
}

}  // namespace detail

// `performed` is the action the agent executed in the step under evaluation:
// the current step's action when instantiating consequences, the previous
// step's when gating availability.
inline bool evaluate_predicate(const Predicate& expr, const AgentState& agent,
                               const std::optional<std::string>& performed) {
    switch (expr.kind) {
        case Predicate::Kind::always: return true;
        case Predicate::Kind::performed: return performed && *performed == expr.action;
        case Predicate::Kind::negation: return !evaluate_predicate(expr.children[0], agent, performed);
        case Predicate::Kind::conjunction:
            for (const auto& child : expr.children) {
                if (!evaluate_predicate(child, agent, performed)) return false;
            }
            return true;
        case Predicate::Kind::disjunction:
            for (const auto& child : expr.children) {
                if (evaluate_predicate(child, agent, performed)) return true;
            }
            return false;
        case Predicate::Kind::compare: break;
    }
    switch (expr.field) {
        case PredField::age:
            return detail::compare_ordered<double>(agent.profile.age, expr.op, expr.literal.number);
        case PredField::income:
            return detail::compare_ordered<double>(static_cast<double>(agent.profile.income),
                                                   expr.op, expr.literal.number);
        case PredField::wealth:
            return detail::compare_ordered<double>(static_cast<double>(agent.wealth), expr.op,
                                                   expr.literal.number);
        case PredField::status: {
            const bool same = agent.profile.status == expr.literal.status;
            return expr.op == CompareOp::eq ? same : !same;
        }
        case PredField::residency: {
            const bool same = agent.profile.residency == expr.literal.boolean;
            return expr.op == CompareOp::eq ? same : !same;
        }
        case PredField::has_bank_account: {
            const bool same = agent.profile.has_bank_account == expr.literal.boolean;
            return expr.op == CompareOp::eq ? same : !same;
        }
        case PredField::address: {
            // address == null <=> homeless; address != null <=> housed
            const bool absent = !agent.profile.address.has_value();
            return expr.op == CompareOp::eq ? absent : !absent;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Statements

struct ConsequenceSpec {
    enum class Kind { fine, transfer, none };
    Kind kind = Kind::none;
    Currency fine_min = 0;
    Currency fine_max = 0;
    Currency amount = 0;  // transfer

    static ConsequenceSpec none() { return ConsequenceSpec{}; }

    static ConsequenceSpec fine(Currency min, Currency max) {
        ConsequenceSpec c;
        c.kind = Kind::fine;
        c.fine_min = min;
        c.fine_max = max;
        return c;
    }

    static ConsequenceSpec transfer(Currency amount) {
        ConsequenceSpec c;
        c.kind = Kind::transfer;
        c.amount = amount;
        return c;
    }

    friend bool operator==(const ConsequenceSpec& a, const ConsequenceSpec& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::fine: return a.fine_min == b.fine_min && a.fine_max == b.fine_max;
            case Kind::transfer: return a.amount == b.amount;
            case Kind::none: return true;
        }
        return false;
    }
};

// The aIm of a statement: either an action the deontic applies to, or a
// consequence applied directly (the shape obligations use).
struct NormAim {
    bool is_action = false;
    std::string action;
    ConsequenceSpec consequence;

    static NormAim action_ref(std::string id) {
        NormAim a;
        a.is_action = true;
        a.action = std::move(id);
        return a;
    }

    static NormAim consequence_of(ConsequenceSpec c) {
        NormAim a;
        a.consequence = c;
        return a;
    }

    friend bool operator==(const NormAim& a, const NormAim& b) {
        if (a.is_action != b.is_action) return false;
        return a.is_action ? a.action == b.action : a.consequence == b.consequence;
    }
};

// One institutional statement in ADICO form (Attribute, Deontic, aIm,
// Condition, Or-Else) plus jurisdiction/source/character annotations.
struct NormStatement {
    std::string id;
    std::string source;
    Jurisdiction jurisdiction = Jurisdiction::local;
    Predicate attribute;  // defaults to `anyone`
    Deontic deontic = Deontic::permission;
    NormAim aim;
    Predicate condition;  // defaults to `always`
    ConsequenceSpec or_else;
    Character character = Character::neutral;
    double degree = 0.0;
    bool active = true;
    Enforcement enforcement = Enforcement::removal;

    friend bool operator==(const NormStatement& a, const NormStatement& b) {
        return a.id == b.id && a.source == b.source && a.jurisdiction == b.jurisdiction &&
               a.attribute == b.attribute && a.deontic == b.deontic && a.aim == b.aim &&
               a.condition == b.condition && a.or_else == b.or_else &&
               a.character == b.character && a.degree == b.degree && a.active == b.active &&
               a.enforcement == b.enforcement;
    }
};

// Deontic/aim shape rules; violations cite the norm id.
inline void validate_norm(const NormStatement& norm) {
    const std::string where = "norm \"" + norm.id + "\": ";
    switch (norm.deontic) {
        case Deontic::permission:
            if (!norm.aim.is_action) {
                throw ValidationError(where + "a permission's aim must be an action(...)");
            }
            break;
        case Deontic::obligation:
            if (norm.aim.is_action) {
                throw ValidationError(where +
                                      "an obligation's aim must be a consequence (fine/transfer/none)");
            }
            break;
        case Deontic::prohibition:
            if (!norm.aim.is_action) {
                throw ValidationError(where + "a prohibition's aim must be an action(...)");
            }
            break;
    }
    if (!(norm.degree >= 0.0 && norm.degree <= 1.0)) {
        throw ValidationError(where + "degree must lie in [0,1]");
    }
    auto check_consequence = [&](const ConsequenceSpec& c, const char* what) {
        if (c.kind == ConsequenceSpec::Kind::fine) {
            if (c.fine_min < 0 || c.fine_min > c.fine_max) {
                throw ValidationError(where + std::string(what) +
                                      ": fine requires 0 <= min <= max");
            }
        } else if (c.kind == ConsequenceSpec::Kind::transfer && c.amount < 0) {
            throw ValidationError(where + std::string(what) + ": transfer amount must be >= 0");
        }
    };
    if (!norm.aim.is_action) check_consequence(norm.aim.consequence, "aim");
    check_consequence(norm.or_else, "or_else");
}

inline void validate_norms(const std::vector<NormStatement>& norms) {
    std::set<std::string> seen;
    for (const auto& norm : norms) {
        if (!seen.insert(norm.id).second) {
            throw ValidationError("duplicate norm id \"" + norm.id + "\"");
        }
        validate_norm(norm);
    }
}

// A consequence with its fine already instantiated to a concrete amount.
struct ConsequenceEvent {
    std::string norm_id;
    ConsequenceSpec::Kind kind = ConsequenceSpec::Kind::none;
    Currency amount = 0;
};

// Consequences triggered by the agent's executed action this step. Detection
// is certain (rules are perfectly implemented), so every matching obligation
// and every performed sanction-mode prohibition fires. A fine(min, max)
// instantiates to min + draw * (max - min), rounded to whole currency units.
inline std::vector<ConsequenceEvent> consequences_for(const std::vector<NormStatement>& norms,
                                                      const AgentState& agent,
                                                      const std::optional<std::string>& performed,
                                                      double rng_draw) {
    const std::optional<std::string>& performed_opt = performed;
    auto instantiate = [&](const std::string& norm_id,
                           const ConsequenceSpec& spec) -> std::optional<ConsequenceEvent> {
        switch (spec.kind) {
            case ConsequenceSpec::Kind::fine: {
                const double span = static_cast<double>(spec.fine_max - spec.fine_min);
                const Currency amount =
                    spec.fine_min + static_cast<Currency>(std::llround(rng_draw * span));
                return ConsequenceEvent{norm_id, spec.kind, amount};
            }
            case ConsequenceSpec::Kind::transfer:
                return ConsequenceEvent{norm_id, spec.kind, spec.amount};
            case ConsequenceSpec::Kind::none: return std::nullopt;
        }
        return std::nullopt;
    };

    std::vector<ConsequenceEvent> out;
    for (const auto& norm : norms) {
        if (!norm.active) continue;
        if (norm.deontic == Deontic::obligation) {
            if (evaluate_predicate(norm.attribute, agent, performed_opt) &&
                evaluate_predicate(norm.condition, agent, performed_opt)) {
                if (auto ev = instantiate(norm.id, norm.aim.consequence)) out.push_back(*ev);
            }
        } else if (norm.deontic == Deontic::prohibition &&
                   norm.enforcement == Enforcement::sanction) {
            if (performed && *performed == norm.aim.action &&
                evaluate_predicate(norm.attribute, agent, performed_opt) &&
                evaluate_predicate(norm.condition, agent, performed_opt)) {
                if (auto ev = instantiate(norm.id, norm.or_else)) out.push_back(*ev);
            }
        }
    }
    return out;
}

}  // namespace polisim
