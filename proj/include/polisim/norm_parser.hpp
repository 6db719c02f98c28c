#pragma once

// Parser and canonical serializer for the norm DSL:
//
//   document   := { norm } ;
//   norm       := "norm" STRING "{" { field } "}" ;
//   field      := KEY ":" value ;
//   KEY        in { jurisdiction, source, attribute, deontic, aim, condition,
//                   or_else, character, degree, active, enforcement }
//   deontic    := "permission" | "obligation" | "prohibition" ;
//   aim        := "action" "(" IDENT ")" | consequence ;
//   consequence:= "fine" "(" NUMBER "," NUMBER ")" | "transfer" "(" NUMBER ")" | "none" ;
//   predicate  := "anyone" | "always" | disjunction ;
//   disjunction:= conjunction { "or" conjunction } ;
//   conjunction:= unary { "and" unary } ;
//   unary      := [ "not" ] atom ;
//   atom       := FIELDPATH CMP literal | "performed" "(" IDENT ")" | "(" predicate ")" ;
//   CMP        := "==" | "!=" | "<" | "<=" | ">" | ">=" ;
//
// `#` starts a comment running to end of line. Strings are double-quoted and
// may not contain quotes or newlines. Identifiers match [a-z_][a-z0-9_]*.
// Absent fields default to: attribute=anyone, condition=always, or_else=none,
// character=neutral, degree=0, active=true, enforcement=removal,
// jurisdiction=local, source="".

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polisim/errors.hpp"
#include "polisim/norms.hpp"

namespace polisim {

namespace dsl {

enum class TokenType { ident, string, number, lbrace, rbrace, lparen, rparen, colon, comma, cmp, end };

struct Token {
    TokenType type = TokenType::end;
    std::string text;        // ident/string contents, raw number text
    double number = 0.0;     // number
    bool is_integer = false; // number had no decimal point
    CompareOp op = CompareOp::eq;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& input) : src_(input) {}

    std::vector<Token> tokenize() {
        std::vector<Token> tokens;
        while (true) {
            skip_blank();
            Token t = next_token();
            const bool done = t.type == TokenType::end;
            tokens.push_back(std::move(t));
            if (done) break;
        }
        return tokens;
    }

private:
    void skip_blank() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                line_start_ = pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    Token next_token() {
        Token t;
        t.line = line_;
        t.column = static_cast<int>(pos_ - line_start_) + 1;
        if (pos_ >= src_.size()) {
            t.type = TokenType::end;
            return t;
        }
        const char c = src_[pos_];
        if (c == '{') { ++pos_; t.type = TokenType::lbrace; return t; }
        if (c == '}') { ++pos_; t.type = TokenType::rbrace; return t; }
        if (c == '(') { ++pos_; t.type = TokenType::lparen; return t; }
        if (c == ')') { ++pos_; t.type = TokenType::rparen; return t; }
        if (c == ':') { ++pos_; t.type = TokenType::colon; return t; }
        if (c == ',') { ++pos_; t.type = TokenType::comma; return t; }
        if (c == '=' || c == '!' || c == '<' || c == '>') return comparison(t);
        if (c == '"') return string_literal(t);
        if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
        if (c == '_' || std::islower(static_cast<unsigned char>(c))) return identifier(t);
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
    }

    Token comparison(Token t) {
        const char c = src_[pos_];
        const bool has_eq = pos_ + 1 < src_.size() && src_[pos_ + 1] == '=';
        t.type = TokenType::cmp;
        switch (c) {
            case '=':
                if (!has_eq) throw ParseError("expected '==' ", t.line, t.column);
                t.op = CompareOp::eq;
                pos_ += 2;
                return t;
            case '!':
                if (!has_eq) throw ParseError("expected '!='", t.line, t.column);
                t.op = CompareOp::ne;
                pos_ += 2;
                return t;
            case '<':
                t.op = has_eq ? CompareOp::le : CompareOp::lt;
                pos_ += has_eq ? 2 : 1;
                return t;
            default:
                t.op = has_eq ? CompareOp::ge : CompareOp::gt;
                pos_ += has_eq ? 2 : 1;
                return t;
        }
    }

    Token string_literal(Token t) {
        ++pos_;  // opening quote
        std::string value;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
            value.push_back(src_[pos_++]);
        }
        if (pos_ >= src_.size() || src_[pos_] != '"') {
            throw ParseError("unterminated string", t.line, t.column);
        }
        ++pos_;  // closing quote
        t.type = TokenType::string;
        t.text = std::move(value);
        return t;
    }

    Token number(Token t) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        bool integer = true;
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            integer = false;
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        t.type = TokenType::number;
        t.text = src_.substr(start, pos_ - start);
        t.number = std::strtod(t.text.c_str(), nullptr);
        t.is_integer = integer;
        return t;
    }

    Token identifier(Token t) {
        const std::size_t start = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '_' || std::islower(static_cast<unsigned char>(c)) ||
                std::isdigit(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        t.type = TokenType::ident;
        t.text = src_.substr(start, pos_ - start);
        return t;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& input) : tokens_(Lexer(input).tokenize()) {}

    std::vector<NormStatement> parse_document() {
        std::vector<NormStatement> norms;
        while (peek().type != TokenType::end) {
            norms.push_back(parse_norm());
        }
        validate_norms(norms);
        return norms;
    }

    // Exposed for predicate round-trip tests.
    Predicate parse_predicate_only() {
        Predicate p = parse_predicate();
        expect(TokenType::end, "end of input");
        return p;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(index_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }

    Token advance() { return tokens_[std::min(index_++, tokens_.size() - 1)]; }

    [[noreturn]] void fail(const Token& at, const std::string& msg) const {
        throw ParseError(msg, at.line, at.column);
    }

    Token expect(TokenType type, const std::string& what) {
        const Token& t = peek();
        if (t.type != type) fail(t, "expected " + what + ", found " + describe(t));
        return advance();
    }

    Token expect_ident(const std::string& word) {
        const Token& t = peek();
        if (t.type != TokenType::ident || t.text != word) {
            fail(t, "expected '" + word + "', found " + describe(t));
        }
        return advance();
    }

    static std::string describe(const Token& t) {
        switch (t.type) {
            case TokenType::ident: return "'" + t.text + "'";
            case TokenType::string: return "string \"" + t.text + "\"";
            case TokenType::number: return "number " + t.text;
            case TokenType::lbrace: return "'{'";
            case TokenType::rbrace: return "'}'";
            case TokenType::lparen: return "'('";
            case TokenType::rparen: return "')'";
            case TokenType::colon: return "':'";
            case TokenType::comma: return "','";
            case TokenType::cmp: return "'" + to_string(t.op) + "'";
            case TokenType::end: return "end of input";
        }
        return "?";
    }

    NormStatement parse_norm() {
        expect_ident("norm");
        NormStatement norm;
        norm.id = expect(TokenType::string, "norm id string").text;
        norm.attribute = Predicate::always();
        norm.condition = Predicate::always();
        expect(TokenType::lbrace, "'{'");
        std::set<std::string> seen;
        while (peek().type != TokenType::rbrace) {
            const Token key = expect(TokenType::ident, "field name or '}'");
            if (!seen.insert(key.text).second) {
                fail(key, "duplicate field '" + key.text + "' in norm \"" + norm.id + "\"");
            }
            expect(TokenType::colon, "':'");
            parse_field(norm, key);
        }
        expect(TokenType::rbrace, "'}'");
        return norm;
    }

    void parse_field(NormStatement& norm, const Token& key) {
        const std::string& k = key.text;
        if (k == "jurisdiction") {
            const Token t = expect(TokenType::ident, "jurisdiction");
            auto j = parse_jurisdiction(t.text);
            if (!j) fail(t, "unknown jurisdiction '" + t.text + "'");
            norm.jurisdiction = *j;
        } else if (k == "source") {
            norm.source = expect(TokenType::string, "quoted source string").text;
        } else if (k == "attribute") {
            norm.attribute = parse_predicate();
        } else if (k == "condition") {
            norm.condition = parse_predicate();
        } else if (k == "deontic") {
            const Token t = expect(TokenType::ident, "deontic");
            auto d = parse_deontic(t.text);
            if (!d) fail(t, "unknown deontic '" + t.text + "'");
            norm.deontic = *d;
        } else if (k == "aim") {
            norm.aim = parse_aim();
        } else if (k == "or_else") {
            norm.or_else = parse_consequence();
        } else if (k == "character") {
            const Token t = expect(TokenType::ident, "character");
            auto c = parse_character(t.text);
            if (!c) fail(t, "unknown character '" + t.text + "'");
            norm.character = *c;
        } else if (k == "degree") {
            const Token t = expect(TokenType::number, "number in [0,1]");
            norm.degree = t.number;
        } else if (k == "active") {
            const Token t = expect(TokenType::ident, "true or false");
            if (t.text == "true") norm.active = true;
            else if (t.text == "false") norm.active = false;
            else fail(t, "expected true or false, found '" + t.text + "'");
        } else if (k == "enforcement") {
            const Token t = expect(TokenType::ident, "removal or sanction");
            auto e = parse_enforcement(t.text);
            if (!e) fail(t, "expected removal or sanction, found '" + t.text + "'");
            norm.enforcement = *e;
        } else {
            fail(key, "unknown field '" + k + "' in norm block");
        }
    }

    NormAim parse_aim() {
        const Token& t = peek();
        if (t.type == TokenType::ident && t.text == "action") {
            advance();
            expect(TokenType::lparen, "'('");
            const Token id = expect(TokenType::ident, "action identifier");
            expect(TokenType::rparen, "')'");
            return NormAim::action_ref(id.text);
        }
        return NormAim::consequence_of(parse_consequence());
    }

    Currency parse_currency() {
        const Token t = expect(TokenType::number, "currency amount");
        if (!t.is_integer) fail(t, "currency amounts must be whole units");
        return static_cast<Currency>(std::llround(t.number));
    }

    ConsequenceSpec parse_consequence() {
        const Token t = expect(TokenType::ident, "fine, transfer or none");
        if (t.text == "none") return ConsequenceSpec::none();
        if (t.text == "fine") {
            expect(TokenType::lparen, "'('");
            const Currency min = parse_currency();
            expect(TokenType::comma, "','");
            const Currency max = parse_currency();
            expect(TokenType::rparen, "')'");
            return ConsequenceSpec::fine(min, max);
        }
        if (t.text == "transfer") {
            expect(TokenType::lparen, "'('");
            const Currency amount = parse_currency();
            expect(TokenType::rparen, "')'");
            return ConsequenceSpec::transfer(amount);
        }
        fail(t, "expected fine, transfer or none, found '" + t.text + "'");
    }

    Predicate parse_predicate() {
        const Token& t = peek();
        if (t.type == TokenType::ident && (t.text == "anyone" || t.text == "always")) {
            advance();
            return Predicate::always();
        }
        return parse_disjunction();
    }

    Predicate parse_disjunction() {
        std::vector<Predicate> terms;
        terms.push_back(parse_conjunction());
        while (peek().type == TokenType::ident && peek().text == "or") {
            advance();
            terms.push_back(parse_conjunction());
        }
        if (terms.size() == 1) return std::move(terms.front());
        return Predicate::disjunction(std::move(terms));
    }

    Predicate parse_conjunction() {
        std::vector<Predicate> terms;
        terms.push_back(parse_unary());
        while (peek().type == TokenType::ident && peek().text == "and") {
            advance();
            terms.push_back(parse_unary());
        }
        if (terms.size() == 1) return std::move(terms.front());
        return Predicate::conjunction(std::move(terms));
    }

    Predicate parse_unary() {
        if (peek().type == TokenType::ident && peek().text == "not") {
            advance();
            return Predicate::negation(parse_atom());
        }
        return parse_atom();
    }

    Predicate parse_atom() {
        const Token& t = peek();
        if (t.type == TokenType::lparen) {
            advance();
            Predicate inner = parse_predicate();
            expect(TokenType::rparen, "')'");
            return inner;
        }
        if (t.type != TokenType::ident) {
            fail(t, "expected a predicate atom, found " + describe(t));
        }
        if (t.text == "performed") {
            advance();
            expect(TokenType::lparen, "'('");
            const Token id = expect(TokenType::ident, "action identifier");
            expect(TokenType::rparen, "')'");
            return Predicate::performed(id.text);
        }
        const Token field_tok = advance();
        auto field = parse_pred_field(field_tok.text);
        if (!field) {
            fail(field_tok, "unknown field name '" + field_tok.text + "' in predicate");
        }
        const Token op_tok = expect(TokenType::cmp, "comparison operator");
        return Predicate::compare(*field, op_tok.op, parse_literal(*field, op_tok));
    }

    PredLiteral parse_literal(PredField field, const Token& op_tok) {
        PredLiteral lit;
        const Token t = peek();
        switch (field) {
            case PredField::age:
            case PredField::income:
            case PredField::wealth: {
                const Token num = expect(TokenType::number, "numeric literal");
                lit.kind = PredLiteral::Kind::number;
                lit.number = num.number;
                return lit;
            }
            case PredField::status: {
                require_equality(field, op_tok);
                const Token tok = expect(TokenType::ident, "status token");
                auto status = parse_status(tok.text);
                if (!status) fail(tok, "unknown status token '" + tok.text + "'");
                lit.kind = PredLiteral::Kind::status;
                lit.status = *status;
                return lit;
            }
            case PredField::residency:
            case PredField::has_bank_account: {
                require_equality(field, op_tok);
                const Token tok = expect(TokenType::ident, "true or false");
                if (tok.text != "true" && tok.text != "false") {
                    fail(tok, "expected true or false, found '" + tok.text + "'");
                }
                lit.kind = PredLiteral::Kind::boolean;
                lit.boolean = tok.text == "true";
                return lit;
            }
            case PredField::address: {
                require_equality(field, op_tok);
                const Token tok = expect(TokenType::ident, "null");
                if (tok.text != "null") {
                    fail(tok, "address can only be compared with null");
                }
                lit.kind = PredLiteral::Kind::null;
                return lit;
            }
        }
        fail(t, "unreachable literal");
    }

    void require_equality(PredField field, const Token& op_tok) {
        if (op_tok.op != CompareOp::eq && op_tok.op != CompareOp::ne) {
            fail(op_tok, "field '" + to_string(field) + "' only supports == and !=");
        }
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
};

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_number(double value) {
    if (value == std::floor(value) && std::abs(value) < 9.0e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(value));
        return buf;
    }
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

inline std::string consequence_to_text(const ConsequenceSpec& c) {
    switch (c.kind) {
        case ConsequenceSpec::Kind::none: return "none";
        case ConsequenceSpec::Kind::fine:
            return "fine(" + std::to_string(c.fine_min) + ", " + std::to_string(c.fine_max) + ")";
        case ConsequenceSpec::Kind::transfer: return "transfer(" + std::to_string(c.amount) + ")";
    }
    return "none";
}

inline std::string literal_to_text(const PredLiteral& lit) {
    switch (lit.kind) {
        case PredLiteral::Kind::number: return format_number(lit.number);
        case PredLiteral::Kind::status: return to_string(lit.status);
        case PredLiteral::Kind::boolean: return lit.boolean ? "true" : "false";
        case PredLiteral::Kind::null: return "null";
    }
    return "?";
}

// anyone/always context for serializing the `always` predicate.
enum class PredContext { attribute, condition };

inline int precedence_of(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::disjunction: return 1;
        case Predicate::Kind::conjunction: return 2;
        case Predicate::Kind::negation: return 3;
        default: return 4;
    }
}

inline std::string predicate_to_text(const Predicate& p, PredContext context, int min_prec = 1) {
    if (precedence_of(p) < min_prec) {
        return "(" + predicate_to_text(p, context, 1) + ")";
    }
    switch (p.kind) {
        case Predicate::Kind::always: {
            // Bare `anyone`/`always` is only recognized at the start of a
            // predicate, so nested occurrences need parentheses to re-parse.
            const std::string word = context == PredContext::attribute ? "anyone" : "always";
            return min_prec > 1 ? "(" + word + ")" : word;
        }
        case Predicate::Kind::compare:
            return to_string(p.field) + " " + to_string(p.op) + " " + literal_to_text(p.literal);
        case Predicate::Kind::performed: return "performed(" + p.action + ")";
        case Predicate::Kind::negation:
            return "not " + predicate_to_text(p.children[0], context, 4);
        case Predicate::Kind::conjunction: {
            std::string out;
            for (std::size_t i = 0; i < p.children.size(); ++i) {
                if (i > 0) out += " and ";
                out += predicate_to_text(p.children[i], context, 3);
            }
            return out;
        }
        case Predicate::Kind::disjunction: {
            std::string out;
            for (std::size_t i = 0; i < p.children.size(); ++i) {
                if (i > 0) out += " or ";
                out += predicate_to_text(p.children[i], context, 2);
            }
            return out;
        }
    }
    return "?";
}

}  // namespace dsl

// Parses a norm document: one NormStatement per `norm` block in document
// order, with documented defaults for absent fields, validated for shape.
inline std::vector<NormStatement> parse_norms(const std::string& text) {
    return dsl::Parser(text).parse_document();
}

inline std::vector<NormStatement> parse_norms_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open norms file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_norms(buffer.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

// Normalized document: alphabetical field order, two-space indent, every
// default written out. parse_norms(canonicalize(x)) reproduces x exactly.
inline std::string canonicalize(const std::vector<NormStatement>& norms) {
    std::string out;
    bool first = true;
    for (const auto& norm : norms) {
        if (!first) out += "\n";
        first = false;
        out += "norm \"" + norm.id + "\" {\n";
        out += "  active: " + std::string(norm.active ? "true" : "false") + "\n";
        out += "  aim: " + (norm.aim.is_action ? "action(" + norm.aim.action + ")"
                                               : dsl::consequence_to_text(norm.aim.consequence)) +
               "\n";
        out += "  attribute: " +
               dsl::predicate_to_text(norm.attribute, dsl::PredContext::attribute) + "\n";
        out += "  character: " + to_string(norm.character) + "\n";
        out += "  condition: " +
               dsl::predicate_to_text(norm.condition, dsl::PredContext::condition) + "\n";
        out += "  degree: " + dsl::format_number(norm.degree) + "\n";
        out += "  deontic: " + to_string(norm.deontic) + "\n";
        out += "  enforcement: " + to_string(norm.enforcement) + "\n";
        out += "  jurisdiction: " + to_string(norm.jurisdiction) + "\n";
        out += "  or_else: " + dsl::consequence_to_text(norm.or_else) + "\n";
        out += "  source: \"" + norm.source + "\"\n";
        out += "}\n";
    }
    return out;
}

}  // namespace polisim
