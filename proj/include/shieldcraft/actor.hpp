#pragma once

#include "shieldcraft/policy.hpp"
#include "shieldcraft/trajectory.hpp"
#include "shieldcraft/world.hpp"

namespace shieldcraft {

struct EpisodeParams {
    int max_steps = 200;
    int retry_budget = 5;
    std::uint64_t seed = 0;
};

/// The online actor loop: render the state, let the policy propose, check the
/// proposal against the active laws (falling back to the hard subset when the
/// full set blocks everything), re-prompt with the verdict on rejection,
/// execute, and log. Environment errors are surfaced to the policy at the
/// next decision. Terminates on goal, step limit, or deadlock.
inline Trajectory run_episode(const Environment& env, ActorPolicy& policy, const LawSet& laws,
                              const EpisodeParams& params) {
    if (params.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (params.retry_budget < 1) throw std::invalid_argument("retry_budget must be >= 1");

    const Vocabulary& vocab = env.vocab();
    const LawSet hard = laws.hard_subset();

    Trajectory traj;
    traj.seed = params.seed;
    traj.law_round = laws.round();

    WorldState world = env.init(params.seed);
    policy.reset(params.seed);
    if (env.goal_reached(world)) {
        traj.terminated = Termination::goal;
        return traj;
    }

    std::optional<std::string> pending_env_feedback;
    for (int step = 1; step <= params.max_steps; ++step) {
        StepRecord rec;
        rec.step = step;
        rec.state = env.abstract(world);
        rec.full_state = env.render_full_state(world);

        FilterResult filter = filter_with_fallback(rec.state, laws, vocab.num_actions());
        rec.used_fallback = filter.used_fallback;
        if (filter.used_fallback) rec.overconstraint = filter.report;
        const LawSet& effective = filter.used_fallback ? hard : laws;

        std::optional<std::vector<std::string>> allowed_names;
        if (policy.wants_allowed()) {
            allowed_names.emplace();
            for (int idx : filter.actions.allowed) allowed_names->push_back(vocab.action(idx).name);
        }

        std::optional<std::string> executed;
        std::optional<std::string> feedback = pending_env_feedback;
        for (int attempt = 0; attempt < params.retry_budget; ++attempt) {
            PolicyRequest request{step,    rec.full_state, &rec.state, &vocab,
                                  feedback, allowed_names,  attempt};
            std::optional<std::string> proposal = policy.propose(request);
            if (!proposal) break;
            const PropositionId* prop = vocab.find(*proposal);
            if (!prop || prop->kind != PropKind::action)
                throw PolicyError("policy proposed unknown action '" + *proposal + "'");
            Verdict verdict =
                check(rec.state, ActionVector::one_hot(prop->index, vocab.num_actions()), effective);
            rec.proposals.push_back(
                ProposalRecord{prop->name, verdict.allowed, verdict.violated_law_ids});
            if (verdict.allowed) {
                executed = prop->name;
                break;
            }
            feedback = "action rejected: " + verdict.feedback;
        }

        if (!executed) {
            rec.outcome = StepOutcome::shield_blocked_exhausted;
            rec.post_state = rec.state;
            traj.steps.push_back(std::move(rec));
            traj.terminated = Termination::deadlock;
            return traj;
        }

        rec.executed = executed;
        StepResult result = env.step(world, vocab.action_index(*executed));
        if (!result.ok()) {
            rec.outcome = StepOutcome::env_error;
            rec.error_precondition = print_formula(result.error->precondition);
            rec.error_message = result.error->message;
            rec.post_state = rec.state;
            pending_env_feedback = "environment error: " + result.error->message +
                                   " (unsatisfied precondition: " + *rec.error_precondition + ")";
        } else {
            rec.outcome = StepOutcome::ok;
            world = result.world;
            rec.post_state = env.abstract(world);
            pending_env_feedback.reset();
        }
        traj.steps.push_back(std::move(rec));
        if (env.goal_reached(world)) {
            traj.terminated = Termination::goal;
            return traj;
        }
    }
    traj.terminated = Termination::step_limit;
    return traj;
}

}  // namespace shieldcraft
