#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "shieldcraft/vocab.hpp"

namespace shieldcraft {

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

enum class FormulaOp {
    atom,
    constant,
    negation,
    conjunction,
    disjunction,
    implication,
    next,
    globally,
    eventually,
    until,
};

class Formula;
using FormulaRef = std::shared_ptr<const Formula>;

/// Immutable LTL formula node. Atoms carry their resolved proposition index
/// so evaluation never touches the vocabulary again.
class Formula {
  public:
    FormulaOp op;
    int atom_index = -1;
    PropKind atom_kind = PropKind::observation;
    std::string atom_name;
    bool constant_value = false;
    FormulaRef left;
    FormulaRef right;

    static FormulaRef atom(const PropositionId& prop) {
        auto f = node(FormulaOp::atom);
        f->atom_index = prop.index;
        f->atom_kind = prop.kind;
        f->atom_name = prop.name;
        return f;
    }

    static FormulaRef constant(bool value) {
        auto f = node(FormulaOp::constant);
        f->constant_value = value;
        return f;
    }

    static FormulaRef negation(FormulaRef a) { return unary(FormulaOp::negation, std::move(a)); }
    static FormulaRef next(FormulaRef a) { return unary(FormulaOp::next, std::move(a)); }
    static FormulaRef globally(FormulaRef a) { return unary(FormulaOp::globally, std::move(a)); }
    static FormulaRef eventually(FormulaRef a) { return unary(FormulaOp::eventually, std::move(a)); }

    static FormulaRef conjunction(FormulaRef a, FormulaRef b) {
        return binary(FormulaOp::conjunction, std::move(a), std::move(b));
    }
    static FormulaRef disjunction(FormulaRef a, FormulaRef b) {
        return binary(FormulaOp::disjunction, std::move(a), std::move(b));
    }
    static FormulaRef implication(FormulaRef a, FormulaRef b) {
        return binary(FormulaOp::implication, std::move(a), std::move(b));
    }
    static FormulaRef until(FormulaRef a, FormulaRef b) {
        return binary(FormulaOp::until, std::move(a), std::move(b));
    }

  private:
    static std::shared_ptr<Formula> node(FormulaOp op) {
        auto f = std::make_shared<Formula>();
        f->op = op;
        return f;
    }
    static FormulaRef unary(FormulaOp op, FormulaRef a) {
        auto f = node(op);
        f->left = std::move(a);
        return f;
    }
    static FormulaRef binary(FormulaOp op, FormulaRef a, FormulaRef b) {
        auto f = node(op);
        f->left = std::move(a);
        f->right = std::move(b);
        return f;
    }
};

inline bool is_temporal(FormulaOp op) {
    return op == FormulaOp::next || op == FormulaOp::globally || op == FormulaOp::eventually ||
           op == FormulaOp::until;
}

/// True when the formula contains no temporal operator.
inline bool is_propositional(const Formula& f) {
    if (is_temporal(f.op)) return false;
    if (f.left && !is_propositional(*f.left)) return false;
    if (f.right && !is_propositional(*f.right)) return false;
    return true;
}

/// True when every atom in f is of the given kind. Constants qualify for any kind.
inline bool references_only(const Formula& f, PropKind kind) {
    if (f.op == FormulaOp::atom) return f.atom_kind == kind;
    if (f.left && !references_only(*f.left, kind)) return false;
    if (f.right && !references_only(*f.right, kind)) return false;
    return true;
}

inline bool contains_atoms(const Formula& f) {
    if (f.op == FormulaOp::atom) return true;
    if (f.left && contains_atoms(*f.left)) return true;
    if (f.right && contains_atoms(*f.right)) return true;
    return false;
}

/// Standard propositional semantics over a bit vector. Throws on temporal
/// nodes, kind mismatches, and out-of-range atom indices.
inline bool eval_prop(const Formula& f, const Bits& bits, PropKind kind) {
    switch (f.op) {
        case FormulaOp::atom:
            if (f.atom_kind != kind)
                throw EvalError("atom '" + f.atom_name + "' is a " + prop_kind_name(f.atom_kind) +
                                " proposition, expected " + prop_kind_name(kind));
            if (f.atom_index < 0 || static_cast<size_t>(f.atom_index) >= bits.size())
                throw EvalError("atom index " + std::to_string(f.atom_index) + " out of range");
            return bits[static_cast<size_t>(f.atom_index)] != 0;
        case FormulaOp::constant:
            return f.constant_value;
        case FormulaOp::negation:
            return !eval_prop(*f.left, bits, kind);
        case FormulaOp::conjunction:
            return eval_prop(*f.left, bits, kind) && eval_prop(*f.right, bits, kind);
        case FormulaOp::disjunction:
            return eval_prop(*f.left, bits, kind) || eval_prop(*f.right, bits, kind);
        case FormulaOp::implication:
            return !eval_prop(*f.left, bits, kind) || eval_prop(*f.right, bits, kind);
        default:
            throw EvalError("temporal operator in propositional evaluation");
    }
}

inline bool eval_prop(const Formula& f, const AbstractState& state) {
    return eval_prop(f, state.bits, PropKind::observation);
}

inline bool eval_prop(const Formula& f, const ActionVector& action) {
    return eval_prop(f, action.bits, PropKind::action);
}

namespace detail {

// Binding strength used for canonical printing; mirrors the parser.
inline int precedence(FormulaOp op) {
    switch (op) {
        case FormulaOp::implication: return 1;
        case FormulaOp::disjunction: return 2;
        case FormulaOp::conjunction: return 3;
        case FormulaOp::until: return 4;
        default: return 5;
    }
}

inline void print_into(const Formula& f, std::string& out) {
    auto child = [&](const Formula& c, bool needs_parens) {
        if (needs_parens) out += '(';
        print_into(c, out);
        if (needs_parens) out += ')';
    };
    int prec = precedence(f.op);
    switch (f.op) {
        case FormulaOp::atom:
            out += f.atom_name;
            break;
        case FormulaOp::constant:
            out += f.constant_value ? "true" : "false";
            break;
        case FormulaOp::negation:
            out += '!';
            child(*f.left, precedence(f.left->op) < 5);
            break;
        case FormulaOp::next:
        case FormulaOp::globally:
        case FormulaOp::eventually:
            out += f.op == FormulaOp::next ? 'X' : (f.op == FormulaOp::globally ? 'G' : 'F');
            out += '(';
            print_into(*f.left, out);
            out += ')';
            break;
        case FormulaOp::conjunction:
        case FormulaOp::disjunction:
            // Left-associative: parenthesize an equal-precedence right child.
            child(*f.left, precedence(f.left->op) < prec);
            out += f.op == FormulaOp::conjunction ? " & " : " | ";
            child(*f.right, precedence(f.right->op) <= prec);
            break;
        case FormulaOp::implication:
        case FormulaOp::until:
            // Right-associative.
            child(*f.left, precedence(f.left->op) <= prec);
            out += f.op == FormulaOp::implication ? " -> " : " U ";
            child(*f.right, precedence(f.right->op) < prec);
            break;
    }
}

}  // namespace detail

/// Canonical text form; parsing it back yields a structurally identical AST.
inline std::string print_formula(const Formula& f) {
    std::string out;
    detail::print_into(f, out);
    return out;
}

inline std::string print_formula(const FormulaRef& f) { return print_formula(*f); }

inline bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
        case FormulaOp::atom:
            return a.atom_index == b.atom_index && a.atom_kind == b.atom_kind;
        case FormulaOp::constant:
            return a.constant_value == b.constant_value;
        default:
            if (static_cast<bool>(a.left) != static_cast<bool>(b.left)) return false;
            if (static_cast<bool>(a.right) != static_cast<bool>(b.right)) return false;
            if (a.left && !structurally_equal(*a.left, *b.left)) return false;
            if (a.right && !structurally_equal(*a.right, *b.right)) return false;
            return true;
    }
}

/// Conjunction of all observation literals of a state: the formula that is
/// true exactly at `state` and nowhere else.
inline FormulaRef state_minterm(const AbstractState& state, const Vocabulary& vocab) {
    FormulaRef acc;
    for (int i = 0; i < vocab.num_observations(); ++i) {
        FormulaRef lit = Formula::atom(vocab.observation(i));
        if (!state.bits[static_cast<size_t>(i)]) lit = Formula::negation(lit);
        acc = acc ? Formula::conjunction(acc, lit) : lit;
    }
    return acc;
}

}  // namespace shieldcraft
