#pragma once

#include <fstream>
#include <span>
#include <variant>
#include <vector>

#include "shieldcraft/parser.hpp"

namespace shieldcraft {

struct LawError : std::runtime_error {
    explicit LawError(const std::string& what) : std::runtime_error(what) {}
};

enum class LawSource { hard_safety, critic_feedback, critic_efficiency, critic_repair };

inline const char* law_source_name(LawSource s) {
    switch (s) {
        case LawSource::hard_safety: return "hard_safety";
        case LawSource::critic_feedback: return "critic_feedback";
        case LawSource::critic_efficiency: return "critic_efficiency";
        case LawSource::critic_repair: return "critic_repair";
    }
    return "?";
}

inline LawSource law_source_from_name(std::string_view name) {
    if (name == "hard_safety") return LawSource::hard_safety;
    if (name == "critic_feedback") return LawSource::critic_feedback;
    if (name == "critic_efficiency") return LawSource::critic_efficiency;
    if (name == "critic_repair") return LawSource::critic_repair;
    throw LawError("unknown law source '" + std::string(name) + "'");
}

/// G(cond -> X(act)): whenever cond holds over the observations, the chosen
/// action must satisfy act.
struct ShieldForm {
    FormulaRef condition;  // observation atoms only
    FormulaRef action;     // action atoms only, satisfiable by >=1 one-hot vector
};

/// G(cond): a condition every visited state must satisfy. Trace monitor only.
struct StateInvariant {
    FormulaRef condition;
};

/// Anything outside the monitored fragment; parsed but never enforced.
struct UnsupportedShape {};

using LawShape = std::variant<ShieldForm, StateInvariant, UnsupportedShape>;

struct Law {
    std::string id;
    FormulaRef formula;
    LawShape shape;
    LawSource source = LawSource::hard_safety;
    std::string explanation;
    int created_round = 0;

    bool is_hard() const { return source == LawSource::hard_safety; }
    bool is_shield_form() const { return std::holds_alternative<ShieldForm>(shape); }
    const ShieldForm* shield_form() const { return std::get_if<ShieldForm>(&shape); }
    const StateInvariant* state_invariant() const { return std::get_if<StateInvariant>(&shape); }
};

/// True when some one-hot vector over m actions satisfies the action formula.
inline bool one_hot_satisfiable(const Formula& action_formula, int m) {
    for (int i = 0; i < m; ++i)
        if (eval_prop(action_formula, ActionVector::one_hot(i, m))) return true;
    return false;
}

/// Determines the shape of a parsed formula. Throws LawError when the formula
/// matches the shield template but violates its typing rules; returns
/// UnsupportedShape for anything structurally outside the fragment.
inline LawShape classify_shape(const FormulaRef& formula, const Vocabulary& vocab) {
    if (formula->op != FormulaOp::globally) return UnsupportedShape{};
    const Formula& body = *formula->left;
    if (body.op == FormulaOp::implication && body.right->op == FormulaOp::next) {
        const FormulaRef& cond = body.left;
        const FormulaRef& act = body.right->left;
        if (!is_propositional(*cond) || !is_propositional(*act)) return UnsupportedShape{};
        if (!references_only(*cond, PropKind::observation))
            throw LawError("state condition of '" + print_formula(formula) +
                           "' mixes action atoms into the observation side");
        if (!references_only(*act, PropKind::action))
            throw LawError("action condition of '" + print_formula(formula) +
                           "' mixes observation atoms into the action side");
        if (!one_hot_satisfiable(*act, vocab.num_actions()))
            throw LawError("action condition of '" + print_formula(formula) +
                           "' is not satisfiable by any one-hot action vector");
        return ShieldForm{cond, act};
    }
    if (is_propositional(body) && references_only(body, PropKind::observation))
        return StateInvariant{formula->left};
    return UnsupportedShape{};
}

inline Law parse_law(std::string_view text, const Vocabulary& vocab, std::string id = {},
                     LawSource source = LawSource::hard_safety, std::string explanation = {},
                     int created_round = 0) {
    Law law;
    law.formula = parse_formula(text, vocab);
    law.shape = classify_shape(law.formula, vocab);
    law.id = std::move(id);
    law.source = source;
    law.explanation = std::move(explanation);
    law.created_round = created_round;
    return law;
}

/// Canonical law text; parse_law(print_law(x)) is structurally equal to x.
inline std::string print_law(const Law& law) {
    if (const ShieldForm* sf = law.shield_form())
        return "G(" + print_formula(sf->condition) + " -> X(" + print_formula(sf->action) + "))";
    if (const StateInvariant* si = law.state_invariant())
        return "G(" + print_formula(si->condition) + ")";
    return print_formula(law.formula);
}

// ---------------------------------------------------------------------------
// Trace semantics

struct TraceStep {
    AbstractState state;
    ActionVector action;
};

struct TraceVerdict {
    bool satisfied = true;
    int violation_step = 0;  // 1-based, valid when !satisfied
};

/// Finite-trace safety semantics: a law is satisfied unless a violation is
/// witnessed. ShieldForm laws are violated at the first step whose state
/// satisfies the condition while the chosen action does not satisfy the
/// action formula; state invariants at the first state falsifying them.
inline TraceVerdict eval_trace(const Law& law, std::span<const TraceStep> trace) {
    if (const ShieldForm* sf = law.shield_form()) {
        for (size_t i = 0; i < trace.size(); ++i)
            if (eval_prop(*sf->condition, trace[i].state) && !eval_prop(*sf->action, trace[i].action))
                return {false, static_cast<int>(i) + 1};
        return {};
    }
    if (const StateInvariant* si = law.state_invariant()) {
        for (size_t i = 0; i < trace.size(); ++i)
            if (!eval_prop(*si->condition, trace[i].state))
                return {false, static_cast<int>(i) + 1};
        return {};
    }
    throw LawError("law '" + law.id + "' is outside the monitored fragment");
}

// ---------------------------------------------------------------------------
// Law file format: one law per line as  ID ; SOURCE ; LAW_TEXT ; EXPLANATION
// with '#' comments.

inline std::vector<Law> parse_law_file(const std::string& content, const Vocabulary& vocab,
                                       int created_round = 0) {
    std::vector<Law> laws;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '#') continue;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;

        std::vector<std::string> fields;
        size_t start = 0;
        for (int i = 0; i < 3; ++i) {
            size_t sep = line.find(';', start);
            if (sep == std::string::npos)
                throw LawError("law file line " + std::to_string(lineno) +
                               ": expected 'ID ; SOURCE ; LAW_TEXT ; EXPLANATION'");
            fields.push_back(line.substr(start, sep - start));
            start = sep + 1;
        }
        fields.push_back(line.substr(start));
        auto trim = [](std::string& s) {
            size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) {
                s.clear();
                return;
            }
            size_t z = s.find_last_not_of(" \t\r");
            s = s.substr(a, z - a + 1);
        };
        for (auto& f : fields) trim(f);
        if (fields[0].empty()) throw LawError("law file line " + std::to_string(lineno) + ": empty id");
        try {
            laws.push_back(parse_law(fields[2], vocab, fields[0], law_source_from_name(fields[1]),
                                     fields[3], created_round));
        } catch (const ParseError& e) {
            throw LawError("law file line " + std::to_string(lineno) + " (" + fields[0] +
                           "): " + e.what());
        }
    }
    return laws;
}

inline std::vector<Law> load_law_file(const std::string& path, const Vocabulary& vocab,
                                      int created_round = 0) {
    std::ifstream in(path);
    if (!in) throw LawError("cannot open law file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_law_file(buf.str(), vocab, created_round);
}

inline std::string format_law_line(const Law& law) {
    return law.id + " ; " + law_source_name(law.source) + " ; " + print_law(law) + " ; " +
           law.explanation;
}

inline void save_law_file(const std::vector<Law>& laws, std::ostream& out) {
    for (const Law& law : laws) out << format_law_line(law) << "\n";
}

inline void save_law_file(const std::vector<Law>& laws, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LawError("cannot write law file '" + path + "'");
    save_law_file(laws, out);
}

}  // namespace shieldcraft
