#pragma once

#include <memory>
#include <random>

#include "shieldcraft/vocab.hpp"

namespace shieldcraft {

struct PolicyError : std::runtime_error {
    explicit PolicyError(const std::string& what) : std::runtime_error(what) {}
};

struct PolicyRequest {
    int step = 0;
    std::string full_state;
    const AbstractState* state = nullptr;
    const Vocabulary* vocab = nullptr;
    std::optional<std::string> feedback;  // shield rejection or prior env error
    std::optional<std::vector<std::string>> allowed;  // provided when wants_allowed()
    int retry = 0;
};

/// A decision procedure for one actor. Implementations must either return an
/// action name or yield no proposal; the episode loop owns the retry budget.
class ActorPolicy {
  public:
    virtual ~ActorPolicy() = default;
    virtual std::optional<std::string> propose(const PolicyRequest& request) = 0;
    virtual bool wants_allowed() const { return false; }
    virtual void reset(std::uint64_t /*seed*/) {}
};

namespace detail {

inline std::mt19937 seeded_policy_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                      static_cast<unsigned>(seed >> 32), 0x9e3779b9u};
    return std::mt19937(seq);
}

}  // namespace detail

/// Samples uniformly from the shield's allowed set; exactly one proposal per
/// step, so it is never rejected.
class RandomAllowedPolicy : public ActorPolicy {
  public:
    bool wants_allowed() const override { return true; }
    void reset(std::uint64_t seed) override { rng_ = detail::seeded_policy_rng(seed); }

    std::optional<std::string> propose(const PolicyRequest& request) override {
        if (request.retry > 0) return std::nullopt;
        if (!request.allowed || request.allowed->empty()) return std::nullopt;
        size_t pick = rng_() % request.allowed->size();
        return (*request.allowed)[pick];
    }

  private:
    std::mt19937 rng_;
};

/// Proposes uniformly over the whole action alphabet, oblivious to laws and
/// feedback. Stand-in for an unguided actor; its proposals exercise the
/// shield's rejection path.
class NaiveRandomPolicy : public ActorPolicy {
  public:
    explicit NaiveRandomPolicy(const Vocabulary& vocab) : vocab_(&vocab) {}
    void reset(std::uint64_t seed) override { rng_ = detail::seeded_policy_rng(seed); }

    std::optional<std::string> propose(const PolicyRequest&) override {
        size_t pick = rng_() % static_cast<size_t>(vocab_->num_actions());
        return vocab_->action(static_cast<int>(pick)).name;
    }

  private:
    const Vocabulary* vocab_;
    std::mt19937 rng_;
};

/// Deterministic tech-tree ladder: logs, planks and sticks, crafting table,
/// wooden pickaxe, cobblestone, stone pickaxe, furnace, iron, iron pickaxe,
/// then explore down and mine the diamond. Decisions are a pure function of
/// the abstract state; on a shield rejection it walks a fixed preference list.
class ScriptedGreedyPolicy : public ActorPolicy {
  public:
    explicit ScriptedGreedyPolicy(const Vocabulary& vocab) : vocab_(&vocab) {}

    std::optional<std::string> propose(const PolicyRequest& request) override {
        if (request.retry == 0) {
            proposed_.clear();
            std::string primary = decide(*request.state);
            proposed_.push_back(primary);
            return primary;
        }
        for (const char* name : kPreferenceOrder) {
            if (std::find(proposed_.begin(), proposed_.end(), name) != proposed_.end()) continue;
            proposed_.push_back(name);
            return std::string(name);
        }
        return std::nullopt;
    }

    /// The ladder decision for one abstract state.
    std::string decide(const AbstractState& state) const {
        auto b = [&](const char* name) {
            return state.bits[static_cast<size_t>(vocab_->observation_index(name))] != 0;
        };
        bool near_table = b("obs_near_crafting_table");
        bool sticks = b("obs_has_2x_stick");
        bool any_equipped = b("obs_wood_pickaxe_equipped") || b("obs_stone_pickaxe_equipped") ||
                            b("obs_iron_pickaxe_equipped");

        auto plank_routine = [&]() -> std::string {
            return b("obs_has_log") ? "action_craft_planks" : "action_mine_log";
        };
        auto stick_routine = [&]() -> std::string {
            return b("obs_has_2x_plank") ? "action_craft_stick" : plank_routine();
        };
        auto table_routine = [&]() -> std::string {
            if (b("obs_has_crafting_table")) return "action_place_crafting_table";
            if (b("obs_has_4x_plank")) return "action_craft_crafting_table";
            return plank_routine();
        };

        // Endgame: iron pickaxe onward.
        if (b("obs_iron_pickaxe_equipped"))
            return b("obs_diamond_in_chunk") ? "action_mine_diamond" : "action_explore_diamond_down";
        if (b("obs_has_iron_pickaxe")) return "action_equip_iron_pickaxe";
        if (b("obs_has_3x_iron_ingot")) {
            if (!sticks) return stick_routine();
            if (!near_table) return table_routine();
            return "action_craft_iron_pickaxe";
        }

        // Wood phase.
        if (!b("obs_has_wood_pickaxe")) {
            if (!near_table) {
                if (!b("obs_has_log") && !b("obs_has_plank") && !sticks) return "action_mine_log";
                if (b("obs_has_log") && !b("obs_has_plank")) return "action_craft_planks";
                if (b("obs_has_4x_plank") && !b("obs_has_crafting_table"))
                    return "action_craft_crafting_table";
                if (b("obs_has_crafting_table")) return "action_place_crafting_table";
                return plank_routine();
            }
            if (b("obs_has_3x_plank") && sticks) return "action_craft_wooden_pickaxe";
            if (!sticks) return stick_routine();
            return plank_routine();
        }

        // Stone phase.
        if (!b("obs_has_stone_pickaxe")) {
            if (!any_equipped) return "action_equip_wood_pickaxe";
            if (b("obs_has_3x_cobble")) {
                if (!sticks) return stick_routine();
                if (!near_table) return table_routine();
                return "action_craft_stone_pickaxe";
            }
            return "action_mine_stone";
        }

        // Iron phase.
        if (!b("obs_stone_pickaxe_equipped") && !b("obs_iron_pickaxe_equipped"))
            return "action_equip_stone_pickaxe";
        if (!b("obs_near_furnace") && !b("obs_has_furnace")) {
            if (b("obs_has_8x_cobble"))
                return near_table ? "action_craft_furnace" : table_routine();
            return "action_mine_stone";
        }
        if (b("obs_has_furnace")) return "action_place_furnace";
        if (!sticks) return stick_routine();
        if (b("obs_has_1x_iron_ore")) {
            if (b("obs_has_fuel")) return "action_smelt_iron";
            if (b("obs_coal_in_chunk")) return "action_mine_coal";
            return plank_routine();
        }
        if (!b("obs_iron_in_chunk")) return "action_explore_general";
        return "action_mine_iron_ore";
    }

  private:
    static constexpr const char* kPreferenceOrder[] = {
        "action_mine_log",           "action_craft_planks",
        "action_craft_stick",        "action_craft_crafting_table",
        "action_place_crafting_table", "action_craft_wooden_pickaxe",
        "action_equip_wood_pickaxe", "action_mine_stone",
        "action_craft_stone_pickaxe", "action_equip_stone_pickaxe",
        "action_craft_furnace",      "action_place_furnace",
        "action_mine_coal",          "action_mine_iron_ore",
        "action_smelt_iron",         "action_craft_iron_pickaxe",
        "action_equip_iron_pickaxe", "action_explore_diamond_down",
        "action_mine_diamond",       "action_explore_general",
    };

    const Vocabulary* vocab_;
    std::vector<std::string> proposed_;
};

inline std::vector<std::string> builtin_policies() {
    return {"scripted_greedy", "random_allowed", "naive_random", "external"};
}

/// Builds a builtin policy by name; "external" requires a transport and is
/// constructed by the harness.
inline std::unique_ptr<ActorPolicy> make_builtin_policy(const std::string& name,
                                                        const Vocabulary& vocab) {
    if (name == "scripted_greedy") return std::make_unique<ScriptedGreedyPolicy>(vocab);
    if (name == "random_allowed") return std::make_unique<RandomAllowedPolicy>();
    if (name == "naive_random") return std::make_unique<NaiveRandomPolicy>(vocab);
    throw PolicyError("unknown policy '" + name + "'");
}

}  // namespace shieldcraft
