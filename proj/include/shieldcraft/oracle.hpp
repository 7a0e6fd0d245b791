#pragma once

#include <functional>
#include <unordered_set>

#include "shieldcraft/world.hpp"

namespace shieldcraft {

/// Exact minimal primitive count from `start` to the goal, by breadth-first
/// search over the full deterministic world dynamics. Inventory counters are
/// capped at 11, the largest quantity any recipe or threshold proposition
/// inspects, which bounds the state space without changing any proposition
/// valuation reachable along a minimal plan.
inline std::optional<int> brute_force_optimal(
    const Environment& env, const WorldState& start, int horizon,
    const std::function<bool(const WorldState&)>& goal =
        [](const WorldState& w) { return w.count(Item::diamond) >= 1; }) {
    if (!env.config().deterministic)
        throw EnvError("brute_force_optimal requires a deterministic environment");

    static constexpr int kCap = 11;
    auto pack = [](const WorldState& w) {
        std::uint64_t key = 0;
        for (int i = 0; i < kItemCount; ++i) {
            int c = std::min(w.inventory[static_cast<size_t>(i)], kCap);
            key = key * 12 + static_cast<std::uint64_t>(c);
        }
        key = key * 4 + static_cast<std::uint64_t>(w.equipped);
        key = key * 2 + (w.near_crafting_table ? 1 : 0);
        key = key * 2 + (w.near_furnace ? 1 : 0);
        key = key * 2 + (w.iron_in_chunk ? 1 : 0);
        key = key * 2 + (w.coal_in_chunk ? 1 : 0);
        key = key * 2 + (w.diamond_in_chunk ? 1 : 0);
        return key;
    };
    auto cap_counts = [](WorldState& w) {
        for (int i = 0; i < kItemCount; ++i)
            w.inventory[static_cast<size_t>(i)] = std::min(w.inventory[static_cast<size_t>(i)], kCap);
        w.step_count = 0;
    };

    WorldState root = start;
    cap_counts(root);
    if (goal(root)) return 0;

    int num_actions = env.vocab().num_actions();
    std::unordered_set<std::uint64_t> visited;
    visited.insert(pack(root));
    std::vector<WorldState> frontier{std::move(root)};
    for (int depth = 1; depth <= horizon && !frontier.empty(); ++depth) {
        std::vector<WorldState> next;
        for (const WorldState& w : frontier) {
            for (int a = 0; a < num_actions; ++a) {
                StepResult result = env.step(w, a);
                if (!result.ok()) continue;
                cap_counts(result.world);
                if (goal(result.world)) return depth;
                if (visited.insert(pack(result.world)).second)
                    next.push_back(std::move(result.world));
            }
        }
        frontier = std::move(next);
    }
    return std::nullopt;
}

}  // namespace shieldcraft
