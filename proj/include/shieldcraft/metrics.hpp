#pragma once

#include <iomanip>

#include "shieldcraft/trajectory.hpp"

namespace shieldcraft {

/// Subgoals tracked for the efficiency table, in tech-tree order.
inline const std::vector<std::pair<std::string, std::string>>& subgoal_propositions() {
    static const std::vector<std::pair<std::string, std::string>> subgoals = {
        {"wooden_tool", "obs_has_wood_pickaxe"},
        {"stone_tool", "obs_has_stone_pickaxe"},
        {"iron_tool", "obs_has_iron_pickaxe"},
        {"diamond", "obs_has_diamond"},
    };
    return subgoals;
}

struct MetricsReport {
    int episodes = 0;
    int goals_reached = 0;
    // subgoal -> first step index per episode (empty optional: never reached)
    std::vector<std::vector<std::optional<int>>> subgoal_steps;
    long total_proposals = 0;
    long rejected_proposals = 0;
    long executed_attempts = 0;
    long env_errors = 0;
    long fallback_steps = 0;

    // Both rates print with their raw counts so any denominator convention
    // can be recomputed from the report.
    double failed_action_rate() const {
        return executed_attempts == 0 ? 0.0
                                      : static_cast<double>(env_errors) /
                                            static_cast<double>(executed_attempts);
    }
    double shield_blocked_rate() const {
        return total_proposals == 0 ? 0.0
                                    : static_cast<double>(rejected_proposals) /
                                          static_cast<double>(total_proposals);
    }

    int subgoal_successes(size_t subgoal) const {
        int n = 0;
        for (const auto& steps : subgoal_steps[subgoal]) n += steps.has_value() ? 1 : 0;
        return n;
    }

    std::optional<double> subgoal_avg_steps(size_t subgoal) const {
        double sum = 0;
        int n = 0;
        for (const auto& steps : subgoal_steps[subgoal]) {
            if (!steps) continue;
            sum += *steps;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    }
};

inline MetricsReport compute_metrics(std::span<const Trajectory> trajectories,
                                     const Vocabulary& vocab) {
    const auto& subgoals = subgoal_propositions();
    MetricsReport report;
    report.episodes = static_cast<int>(trajectories.size());
    report.subgoal_steps.assign(subgoals.size(), {});

    std::vector<int> subgoal_bits;
    for (const auto& [name, prop] : subgoals) subgoal_bits.push_back(vocab.observation_index(prop));

    for (const Trajectory& traj : trajectories) {
        if (traj.terminated == Termination::goal) report.goals_reached++;
        std::vector<std::optional<int>> firsts(subgoals.size());
        for (const StepRecord& rec : traj.steps) {
            report.total_proposals += static_cast<long>(rec.proposals.size());
            for (const ProposalRecord& p : rec.proposals) report.rejected_proposals += p.allowed ? 0 : 1;
            if (rec.executed) report.executed_attempts++;
            if (rec.outcome == StepOutcome::env_error) report.env_errors++;
            if (rec.used_fallback) report.fallback_steps++;
            for (size_t g = 0; g < subgoals.size(); ++g)
                if (!firsts[g] && rec.post_state.bits[static_cast<size_t>(subgoal_bits[g])])
                    firsts[g] = rec.step;
        }
        // The ladder structure guarantees monotone completion steps.
        for (size_t g = 1; g < subgoals.size(); ++g)
            if (firsts[g] && firsts[g - 1] && *firsts[g] < *firsts[g - 1])
                throw TrajectoryError("subgoal completion steps are not monotone");
        for (size_t g = 0; g < subgoals.size(); ++g)
            report.subgoal_steps[g].push_back(firsts[g]);
    }
    return report;
}

inline std::string render_metrics(const MetricsReport& report) {
    const auto& subgoals = subgoal_propositions();
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "episodes: " << report.episodes << " (" << report.goals_reached << " reached the goal)\n";
    out << "subgoal        avg-steps  success\n";
    for (size_t g = 0; g < subgoals.size(); ++g) {
        std::optional<double> avg = report.subgoal_avg_steps(g);
        out << "  " << std::left << std::setw(13) << subgoals[g].first << std::right;
        if (avg)
            out << std::setw(9) << std::setprecision(1) << *avg << std::setprecision(4);
        else
            out << std::setw(9) << "n/a";
        out << "  " << report.subgoal_successes(g) << "/" << report.episodes << "\n";
    }
    out << "proposals: " << report.total_proposals << " total, " << report.rejected_proposals
        << " shield-blocked (rate " << report.shield_blocked_rate() << ")\n";
    out << "executed attempts: " << report.executed_attempts << ", env errors: " << report.env_errors
        << " (failed-action rate " << report.failed_action_rate() << ")\n";
    out << "fallback steps: " << report.fallback_steps << "\n";
    return out.str();
}

}  // namespace shieldcraft
