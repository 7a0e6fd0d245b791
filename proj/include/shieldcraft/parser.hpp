#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "shieldcraft/formula.hpp"
#include "shieldcraft/vocab.hpp"

namespace shieldcraft {

struct ParseError : std::runtime_error {
    int position;
    ParseError(const std::string& what, int pos)
        : std::runtime_error(what + " at position " + std::to_string(pos)), position(pos) {}
};

namespace detail {

// Recursive-descent parser for the law fragment, lowest precedence first:
//   formula := or ("->" formula)?
//   or      := and ("|" and)*
//   and     := until ("&" until)*
//   until   := unary ("U" until)?
//   unary   := "!" unary | X|G|F "(" formula ")" | "(" formula ")"
//            | "true" | "false" | IDENT
class FormulaParser {
  public:
    FormulaParser(std::string_view text, const Vocabulary& vocab) : text_(text), vocab_(vocab) {}

    FormulaRef parse() {
        FormulaRef f = parse_implication();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return f;
    }

  private:
    FormulaRef parse_implication() {
        FormulaRef lhs = parse_disjunction();
        skip_ws();
        if (accept("->")) return Formula::implication(std::move(lhs), parse_implication());
        return lhs;
    }

    FormulaRef parse_disjunction() {
        FormulaRef lhs = parse_conjunction();
        while (true) {
            skip_ws();
            if (peek() == '|') {
                ++pos_;
                lhs = Formula::disjunction(std::move(lhs), parse_conjunction());
            } else {
                return lhs;
            }
        }
    }

    FormulaRef parse_conjunction() {
        FormulaRef lhs = parse_until();
        while (true) {
            skip_ws();
            if (peek() == '&') {
                ++pos_;
                lhs = Formula::conjunction(std::move(lhs), parse_until());
            } else {
                return lhs;
            }
        }
    }

    FormulaRef parse_until() {
        FormulaRef lhs = parse_unary();
        skip_ws();
        if (accept_keyword("U")) return Formula::until(std::move(lhs), parse_until());
        return lhs;
    }

    FormulaRef parse_unary() {
        skip_ws();
        char c = peek();
        if (c == '!') {
            ++pos_;
            return Formula::negation(parse_unary());
        }
        if (c == '(') {
            ++pos_;
            FormulaRef inner = parse_implication();
            expect(')');
            return inner;
        }
        if (c == 'X' || c == 'G' || c == 'F') {
            size_t save = pos_;
            ++pos_;
            skip_ws();
            if (peek() == '(') {
                ++pos_;
                FormulaRef inner = parse_implication();
                expect(')');
                if (c == 'X') return Formula::next(std::move(inner));
                if (c == 'G') return Formula::globally(std::move(inner));
                return Formula::eventually(std::move(inner));
            }
            pos_ = save;  // a bare X/G/F is not an operator application
        }
        return parse_atom();
    }

    FormulaRef parse_atom() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected a proposition, 'true', 'false', '!', or '('");
        std::string_view name = text_.substr(start, pos_ - start);
        if (name == "true") return Formula::constant(true);
        if (name == "false") return Formula::constant(false);
        const PropositionId* prop = vocab_.find(name);
        if (!prop) {
            pos_ = start;
            fail("unknown proposition '" + std::string(name) + "'");
        }
        return Formula::atom(*prop);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    // Matches a keyword not followed by an identifier character.
    bool accept_keyword(std::string_view kw) {
        if (text_.substr(pos_, kw.size()) != kw) return false;
        size_t after = pos_ + kw.size();
        if (after < text_.size() &&
            (std::isalnum(static_cast<unsigned char>(text_[after])) || text_[after] == '_'))
            return false;
        pos_ = after;
        return true;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, static_cast<int>(pos_));
    }

    std::string_view text_;
    const Vocabulary& vocab_;
    size_t pos_ = 0;
};

}  // namespace detail

/// Parses formula text against a vocabulary. Throws ParseError with position.
inline FormulaRef parse_formula(std::string_view text, const Vocabulary& vocab) {
    return detail::FormulaParser(text, vocab).parse();
}

}  // namespace shieldcraft
