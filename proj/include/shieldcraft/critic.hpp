#pragma once

#include "shieldcraft/graph.hpp"

namespace shieldcraft {

struct CriticError : std::runtime_error {
    explicit CriticError(const std::string& what) : std::runtime_error(what) {}
};

enum class CandidateSource { feedback, efficiency, repair, external };

struct CandidateLaw {
    Law law;
    CandidateSource source = CandidateSource::feedback;
    // Grounding evidence: (trajectory, step) indices of observations backing the law.
    std::vector<std::pair<int, int>> evidence;
};

/// One offline critic pass: what was added, edited, and consumed.
struct CriticRound {
    int round = 0;
    std::vector<Law> added;
    std::vector<std::string> edited_law_ids;
    std::vector<std::string> removed_law_ids;
    int candidates_seen = 0;
    int dropped_ungrounded = 0;
    int dropped_duplicate = 0;
    int dropped_infeasible = 0;
    int reports_consumed = 0;
    std::string efficiency_diagnostic;
};

/// A law's state condition must hold in at least one observed state.
inline bool check_grounding(const CandidateLaw& candidate, std::span<const Trajectory> trajectories) {
    const ShieldForm* sf = candidate.law.shield_form();
    const FormulaRef cond = sf ? sf->condition
                               : (candidate.law.state_invariant()
                                      ? candidate.law.state_invariant()->condition
                                      : nullptr);
    if (!cond) return false;
    for (const Trajectory& traj : trajectories)
        for (const StepRecord& rec : traj.steps)
            if (eval_prop(*cond, rec.state)) return true;
    return false;
}

inline void fill_evidence(CandidateLaw& candidate, std::span<const Trajectory> trajectories) {
    const ShieldForm* sf = candidate.law.shield_form();
    if (!sf) return;
    candidate.evidence.clear();
    for (size_t t = 0; t < trajectories.size(); ++t)
        for (size_t i = 0; i < trajectories[t].steps.size(); ++i)
            if (eval_prop(*sf->condition, trajectories[t].steps[i].state))
                candidate.evidence.emplace_back(static_cast<int>(t), static_cast<int>(i));
}

/// Environment-feedback source: every distinct (precondition, action) error
/// event becomes the permanent constraint G(!P -> X(!a)).
inline std::vector<CandidateLaw> induce_from_feedback(std::span<const Trajectory> trajectories,
                                                      const Vocabulary& vocab) {
    std::vector<CandidateLaw> out;
    std::map<std::pair<std::string, std::string>, size_t> seen;  // (precondition, action) -> index
    for (size_t t = 0; t < trajectories.size(); ++t) {
        const Trajectory& traj = trajectories[t];
        for (size_t i = 0; i < traj.steps.size(); ++i) {
            const StepRecord& rec = traj.steps[i];
            if (rec.outcome != StepOutcome::env_error || !rec.executed || !rec.error_precondition)
                continue;
            auto key = std::make_pair(*rec.error_precondition, *rec.executed);
            auto it = seen.find(key);
            if (it != seen.end()) {
                out[it->second].evidence.emplace_back(static_cast<int>(t), static_cast<int>(i));
                continue;
            }
            FormulaRef precondition = parse_formula(*rec.error_precondition, vocab);
            FormulaRef action_atom = Formula::atom(vocab.require(*rec.executed));
            FormulaRef formula = Formula::globally(Formula::implication(
                Formula::negation(precondition), Formula::next(Formula::negation(action_atom))));
            CandidateLaw cand;
            cand.law.formula = formula;
            cand.law.shape = classify_shape(formula, vocab);
            cand.law.source = LawSource::critic_feedback;
            cand.law.explanation = "induced from environment error: " +
                                   rec.error_message.value_or("precondition violated");
            cand.source = CandidateSource::feedback;
            cand.evidence.emplace_back(static_cast<int>(t), static_cast<int>(i));
            seen.emplace(std::move(key), out.size());
            out.push_back(std::move(cand));
        }
    }
    return out;
}

namespace detail {

/// The possession proposition for the item an action produces, when one exists.
inline const char* produced_item_proposition(std::string_view action) {
    static const std::unordered_map<std::string_view, const char*> table = {
        {"action_mine_log", "obs_has_log"},
        {"action_mine_stone", "obs_has_3x_cobble"},
        {"action_mine_iron_ore", "obs_has_1x_iron_ore"},
        {"action_mine_diamond", "obs_has_diamond"},
        {"action_craft_planks", "obs_has_plank"},
        {"action_craft_stick", "obs_has_2x_stick"},
        {"action_craft_wooden_pickaxe", "obs_has_wood_pickaxe"},
        {"action_craft_stone_pickaxe", "obs_has_stone_pickaxe"},
        {"action_craft_iron_pickaxe", "obs_has_iron_pickaxe"},
        {"action_craft_crafting_table", "obs_has_crafting_table"},
        {"action_craft_furnace", "obs_has_furnace"},
        {"action_smelt_iron", "obs_has_iron_ingot"},
    };
    auto it = table.find(action);
    return it == table.end() ? nullptr : it->second;
}

}  // namespace detail

/// Graph-based efficiency source, a deterministic stand-in for the LLM pass:
/// an observed (s, a) whose successor is no closer to the goal is flagged as
/// inefficient and blocked wherever the generalized state condition holds.
/// Actions on some observed shortest path are efficient and never blocked.
inline std::vector<CandidateLaw> efficiency_candidates(std::span<const Trajectory> trajectories,
                                                       const BipartiteGraph& graph,
                                                       const Vocabulary& vocab,
                                                       std::string* diagnostic = nullptr) {
    constexpr int kInf = std::numeric_limits<int>::max();
    if (graph.goal_states().empty()) {
        if (diagnostic) *diagnostic = "graph has no goal-reaching states; no efficiency analysis";
        return {};
    }
    std::vector<int> dist = graph.distances_to_goal();

    // (state, action) pairs lying on a shortest path from their state.
    auto pair_efficient = [&](const BipartiteGraph::PairNode& node) {
        int ds = dist[static_cast<size_t>(node.state)];
        if (ds == kInf) return false;
        for (int succ : node.successors)
            if (dist[static_cast<size_t>(succ)] != kInf && dist[static_cast<size_t>(succ)] == ds - 1)
                return true;
        return false;
    };

    std::vector<CandidateLaw> out;
    std::map<std::pair<std::string, std::string>, size_t> seen;  // (cond text, action)
    for (size_t t = 0; t < trajectories.size(); ++t) {
        const Trajectory& traj = trajectories[t];
        for (size_t i = 0; i < traj.steps.size(); ++i) {
            const StepRecord& rec = traj.steps[i];
            if (rec.outcome != StepOutcome::ok || !rec.executed) continue;
            std::optional<int> s_idx = graph.find_state(rec.state);
            std::optional<int> post_idx = graph.find_state(rec.post_state);
            if (!s_idx || !post_idx) continue;
            int ds = dist[static_cast<size_t>(*s_idx)];
            if (ds == kInf) continue;  // no observed path to goal from here
            int dpost = dist[static_cast<size_t>(*post_idx)];
            if (dpost != kInf && dpost < ds) continue;  // progress

            const char* prop = detail::produced_item_proposition(*rec.executed);
            FormulaRef cond =
                prop ? Formula::atom(vocab.require(prop)) : state_minterm(rec.state, vocab);
            std::string cond_text = print_formula(cond);
            auto key = std::make_pair(cond_text, *rec.executed);
            auto it = seen.find(key);
            if (it != seen.end()) {
                out[it->second].evidence.emplace_back(static_cast<int>(t), static_cast<int>(i));
                continue;
            }

            // Never block an action where it is efficient: if any observed
            // state satisfying the condition has this action on a shortest
            // path, the candidate is unsound and is not emitted.
            bool clashes = false;
            for (const BipartiteGraph::PairNode& node : graph.pairs()) {
                if (vocab.action(node.action).name != *rec.executed) continue;
                if (!pair_efficient(node)) continue;
                if (eval_prop(*cond, graph.states()[static_cast<size_t>(node.state)])) {
                    clashes = true;
                    break;
                }
            }
            if (clashes) continue;

            FormulaRef action_atom = Formula::atom(vocab.require(*rec.executed));
            FormulaRef formula = Formula::globally(
                Formula::implication(cond, Formula::next(Formula::negation(action_atom))));
            CandidateLaw cand;
            cand.law.formula = formula;
            cand.law.shape = classify_shape(formula, vocab);
            cand.law.source = LawSource::critic_efficiency;
            cand.law.explanation = "observed non-progress: " + *rec.executed + " when " + cond_text;
            cand.source = CandidateSource::efficiency;
            cand.evidence.emplace_back(static_cast<int>(t), static_cast<int>(i));
            seen.emplace(std::move(key), out.size());
            out.push_back(std::move(cand));
        }
    }
    return out;
}

/// Collects the over-constraint reports the shield logged into trajectories.
inline std::vector<OverconstraintReport> collect_overconstraint_reports(
    std::span<const Trajectory> trajectories) {
    std::vector<OverconstraintReport> reports;
    for (const Trajectory& traj : trajectories)
        for (const StepRecord& rec : traj.steps)
            if (rec.overconstraint) reports.push_back(*rec.overconstraint);
    return reports;
}

/// For every fully blocked state, repeatedly weakens the most constraining
/// non-hard law by exempting that state from its condition, until at least
/// one action is allowed again. Hard-safety laws are never touched.
inline void repair_overconstraint(std::span<const OverconstraintReport> reports, LawSet& laws,
                                  const Vocabulary& vocab, CriticRound& record) {
    for (const OverconstraintReport& report : reports) {
        while (allowed_actions(report.state, laws, vocab.num_actions()).allowed.empty()) {
            OverconstraintReport current =
                detect_overconstraint(report.state, laws, vocab.num_actions());
            const Law* target = nullptr;
            for (const std::string& id : current.most_constraining) {
                const Law* law = laws.find(id);
                if (law && !law->is_hard() && law->is_shield_form()) {
                    target = law;
                    break;
                }
            }
            if (!target)
                throw ShieldConfigError(
                    "over-constraint at state " + report.state.to_string() +
                    " is caused entirely by hard-safety laws; refusing to relax them");
            const ShieldForm* sf = target->shield_form();
            FormulaRef new_cond = Formula::conjunction(
                sf->condition, Formula::negation(state_minterm(report.state, vocab)));
            FormulaRef formula = Formula::globally(
                Formula::implication(new_cond, Formula::next(sf->action)));
            std::string id = target->id;
            laws.replace_formula(id, formula, ShieldForm{new_cond, sf->action});
            if (std::find(record.edited_law_ids.begin(), record.edited_law_ids.end(), id) ==
                record.edited_law_ids.end())
                record.edited_law_ids.push_back(id);
        }
    }
}

/// Interface for plugging an external (e.g. LLM-backed) critic in. The
/// returned texts go through the same grounding and feasibility gates as the
/// deterministic sources.
class CriticTransport {
  public:
    virtual ~CriticTransport() = default;
    virtual std::vector<std::string> propose_laws(std::span<const Trajectory> trajectories,
                                                  const LawSet& laws, const Vocabulary& vocab) = 0;
};

/// One full critic round over a batch of trajectories: induce feedback and
/// efficiency candidates (plus optional external ones), gate them on
/// grounding, dedup by canonical print, keep every observed state feasible,
/// then repair any over-constraint the shield reported.
inline std::pair<LawSet, CriticRound> run_round(std::span<const Trajectory> trajectories,
                                                const LawSet& laws, const BipartiteGraph& graph,
                                                const Vocabulary& vocab,
                                                CriticTransport* external = nullptr) {
    int new_round = laws.round() + 1;
    LawSet out = laws;
    out.set_round(new_round);
    CriticRound record;
    record.round = new_round;

    std::vector<CandidateLaw> candidates = induce_from_feedback(trajectories, vocab);
    std::vector<CandidateLaw> efficiency =
        efficiency_candidates(trajectories, graph, vocab, &record.efficiency_diagnostic);
    candidates.insert(candidates.end(), std::make_move_iterator(efficiency.begin()),
                      std::make_move_iterator(efficiency.end()));
    if (external) {
        for (const std::string& text : external->propose_laws(trajectories, laws, vocab)) {
            CandidateLaw cand;
            try {
                cand.law = parse_law(text, vocab);
            } catch (const std::exception&) {
                continue;  // malformed external proposal
            }
            if (!cand.law.is_shield_form()) continue;
            cand.law.source = LawSource::critic_efficiency;
            cand.law.explanation = "proposed by external critic";
            cand.source = CandidateSource::external;
            fill_evidence(cand, trajectories);
            candidates.push_back(std::move(cand));
        }
    }
    record.candidates_seen = static_cast<int>(candidates.size());

    // Observed states drive the feasibility sweep.
    std::vector<AbstractState> observed;
    {
        std::set<std::string> seen;
        for (const Trajectory& traj : trajectories)
            for (const StepRecord& rec : traj.steps)
                if (seen.insert(rec.state.to_string()).second) observed.push_back(rec.state);
    }

    int fb_counter = 0, eff_counter = 0, ext_counter = 0;
    std::map<int, int> added_per_trajectory;
    for (CandidateLaw& cand : candidates) {
        if (!check_grounding(cand, trajectories)) {
            record.dropped_ungrounded++;
            continue;
        }
        std::string text = print_law(cand.law);
        if (out.contains_text(text)) {
            record.dropped_duplicate++;
            continue;
        }
        // Feasibility: adding this law must leave every observed state at
        // least one allowed action (newest candidate dropped on violation).
        LawSet trial = out;
        Law law = cand.law;
        law.created_round = new_round;
        switch (cand.source) {
            case CandidateSource::feedback:
                law.id = "r" + std::to_string(new_round) + "_fb" + std::to_string(++fb_counter);
                break;
            case CandidateSource::efficiency:
                law.id = "r" + std::to_string(new_round) + "_eff" + std::to_string(++eff_counter);
                break;
            default:
                law.id = "r" + std::to_string(new_round) + "_ext" + std::to_string(++ext_counter);
                break;
        }
        trial.add(law);
        bool feasible = true;
        for (const AbstractState& state : observed) {
            if (allowed_actions(state, trial, vocab.num_actions()).allowed.empty()) {
                feasible = false;
                break;
            }
        }
        if (!feasible) {
            record.dropped_infeasible++;
            continue;
        }
        out = std::move(trial);
        record.added.push_back(law);
        std::set<int> trajs;
        for (const auto& [t, i] : cand.evidence) trajs.insert(t);
        for (int t : trajs) added_per_trajectory[t]++;
    }

    // The count bound from the trajectory-length argument: one candidate per
    // step, so laws attributed to a trajectory never exceed its length.
    for (const auto& [t, count] : added_per_trajectory) {
        int length = static_cast<int>(trajectories[static_cast<size_t>(t)].steps.size());
        if (count > length)
            throw CriticError("internal: added " + std::to_string(count) + " laws from a length-" +
                              std::to_string(length) + " trajectory");
    }

    std::vector<OverconstraintReport> reports = collect_overconstraint_reports(trajectories);
    record.reports_consumed = static_cast<int>(reports.size());
    repair_overconstraint(reports, out, vocab, record);

    return {std::move(out), std::move(record)};
}

inline std::string render_round_report(const CriticRound& round,
                                       std::span<const Trajectory> trajectories) {
    std::ostringstream out;
    out << "critic round " << round.round << "\n";
    out << "trajectories analyzed: " << trajectories.size() << "\n";
    out << "candidates: " << round.candidates_seen << " (ungrounded " << round.dropped_ungrounded
        << ", duplicate " << round.dropped_duplicate << ", infeasible " << round.dropped_infeasible
        << ")\n";
    if (!round.efficiency_diagnostic.empty())
        out << "efficiency source: " << round.efficiency_diagnostic << "\n";
    out << "over-constraint reports consumed: " << round.reports_consumed << "\n";
    out << "laws added: " << round.added.size() << "\n";
    for (const Law& law : round.added) out << "  + " << format_law_line(law) << "\n";
    out << "laws edited: " << round.edited_law_ids.size() << "\n";
    for (const std::string& id : round.edited_law_ids) out << "  ~ " << id << "\n";
    out << "laws removed: " << round.removed_law_ids.size() << "\n";
    for (const std::string& id : round.removed_law_ids) out << "  - " << id << "\n";
    return out.str();
}

}  // namespace shieldcraft
