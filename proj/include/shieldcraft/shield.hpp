#pragma once

#include <map>
#include <set>

#include "shieldcraft/law.hpp"

namespace shieldcraft {

struct ShieldConfigError : std::runtime_error {
    explicit ShieldConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The active rule book: ordered laws plus the critic iteration count that
/// produced it. Ids are unique; the hard subset is retrievable for fallback.
class LawSet {
  public:
    LawSet() = default;
    explicit LawSet(std::vector<Law> laws, int round = 0) : round_(round) {
        for (Law& law : laws) add(std::move(law));
    }

    void add(Law law) {
        if (ids_.count(law.id)) throw LawError("duplicate law id '" + law.id + "'");
        ids_.insert(law.id);
        texts_.insert(print_law(law));
        laws_.push_back(std::move(law));
    }

    bool contains_id(const std::string& id) const { return ids_.count(id) != 0; }
    bool contains_text(const std::string& canonical_text) const { return texts_.count(canonical_text) != 0; }

    const std::vector<Law>& laws() const { return laws_; }
    std::size_t size() const { return laws_.size(); }
    int round() const { return round_; }
    void set_round(int round) { round_ = round; }

    const Law* find(const std::string& id) const {
        for (const Law& law : laws_)
            if (law.id == id) return &law;
        return nullptr;
    }

    /// Replaces the formula of an existing law. Used by over-constraint repair.
    void replace_formula(const std::string& id, FormulaRef formula, LawShape shape) {
        for (Law& law : laws_) {
            if (law.id != id) continue;
            texts_.erase(print_law(law));
            law.formula = std::move(formula);
            law.shape = std::move(shape);
            texts_.insert(print_law(law));
            return;
        }
        throw LawError("no law with id '" + id + "'");
    }

    LawSet hard_subset() const {
        LawSet subset;
        subset.round_ = round_;
        for (const Law& law : laws_)
            if (law.is_hard()) subset.add(law);
        return subset;
    }

    std::size_t hard_count() const {
        std::size_t n = 0;
        for (const Law& law : laws_) n += law.is_hard() ? 1 : 0;
        return n;
    }

  private:
    std::vector<Law> laws_;
    std::set<std::string> ids_;
    std::multiset<std::string> texts_;
    int round_ = 0;
};

struct Verdict {
    bool allowed = true;
    std::vector<std::string> violated_law_ids;
    std::string feedback;
};

/// Checks one proposed action against every shield-form law. State invariants
/// never block actions; they are trace monitors only.
inline Verdict check(const AbstractState& state, const ActionVector& action, const LawSet& laws) {
    Verdict v;
    for (const Law& law : laws.laws()) {
        const ShieldForm* sf = law.shield_form();
        if (!sf) continue;
        if (eval_prop(*sf->condition, state) && !eval_prop(*sf->action, action)) {
            v.violated_law_ids.push_back(law.id);
            if (!v.feedback.empty()) v.feedback += "\n";
            v.feedback += "violates " + law.id + " [" + print_law(law) + "]";
            if (!law.explanation.empty()) v.feedback += ": " + law.explanation;
        }
    }
    v.allowed = v.violated_law_ids.empty();
    return v;
}

struct AllowedActions {
    std::vector<int> allowed;                          // action indices, ascending
    std::vector<std::vector<std::string>> blocked_by;  // per action index: blocking law ids

    bool is_allowed(int action_index) const {
        return blocked_by[static_cast<size_t>(action_index)].empty();
    }
    std::vector<ActionVector> allowed_vectors() const {
        std::vector<ActionVector> out;
        int m = static_cast<int>(blocked_by.size());
        out.reserve(allowed.size());
        for (int idx : allowed) out.push_back(ActionVector::one_hot(idx, m));
        return out;
    }
};

/// Exactly the actions check() would allow in this state, in action-index order.
/// Conditions are evaluated once per law, not once per (law, action).
inline AllowedActions allowed_actions(const AbstractState& state, const LawSet& laws, int num_actions) {
    AllowedActions out;
    out.blocked_by.assign(static_cast<size_t>(num_actions), {});
    std::vector<const Law*> firing;
    for (const Law& law : laws.laws()) {
        const ShieldForm* sf = law.shield_form();
        if (sf && eval_prop(*sf->condition, state)) firing.push_back(&law);
    }
    for (int a = 0; a < num_actions; ++a) {
        ActionVector vec = ActionVector::one_hot(a, num_actions);
        for (const Law* law : firing)
            if (!eval_prop(*law->shield_form()->action, vec))
                out.blocked_by[static_cast<size_t>(a)].push_back(law->id);
        if (out.blocked_by[static_cast<size_t>(a)].empty()) out.allowed.push_back(a);
    }
    return out;
}

struct OverconstraintReport {
    AbstractState state;
    bool blocked_all = false;
    std::map<std::string, int> blocking_counts;   // law id -> actions blocked here
    std::vector<std::string> most_constraining;   // count desc, then id asc
};

/// Measures how much of the action set each law removes in this state.
inline OverconstraintReport detect_overconstraint(const AbstractState& state, const LawSet& laws,
                                                  int num_actions) {
    OverconstraintReport report;
    report.state = state;
    AllowedActions filter = allowed_actions(state, laws, num_actions);
    report.blocked_all = filter.allowed.empty();
    for (const auto& ids : filter.blocked_by)
        for (const std::string& id : ids) report.blocking_counts[id]++;
    for (const auto& [id, count] : report.blocking_counts) report.most_constraining.push_back(id);
    std::stable_sort(report.most_constraining.begin(), report.most_constraining.end(),
                     [&](const std::string& a, const std::string& b) {
                         int ca = report.blocking_counts.at(a), cb = report.blocking_counts.at(b);
                         if (ca != cb) return ca > cb;
                         return a < b;
                     });
    return report;
}

struct FilterResult {
    AllowedActions actions;
    bool used_fallback = false;
    std::optional<OverconstraintReport> report;
};

/// Filters under the full set; if that blocks everything, records an
/// over-constraint report and falls back to the hard-safety subset for this
/// decision only. Throws when the hard subset itself blocks all actions.
inline FilterResult filter_with_fallback(const AbstractState& state, const LawSet& laws,
                                         int num_actions) {
    FilterResult result;
    result.actions = allowed_actions(state, laws, num_actions);
    if (!result.actions.allowed.empty()) return result;
    result.report = detect_overconstraint(state, laws, num_actions);
    result.used_fallback = true;
    result.actions = allowed_actions(state, laws.hard_subset(), num_actions);
    if (result.actions.allowed.empty())
        throw ShieldConfigError("hard-safety laws alone block every action in state " +
                                state.to_string());
    return result;
}

}  // namespace shieldcraft
