#pragma once

#include <array>
#include <random>

#include "shieldcraft/parser.hpp"

namespace shieldcraft {

struct EnvError : std::runtime_error {
    explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

enum class Item {
    log,
    plank,
    stick,
    cobblestone,
    iron_ore,
    iron_ingot,
    coal,
    diamond,
    crafting_table,
    furnace,
    wooden_pickaxe,
    stone_pickaxe,
    iron_pickaxe,
};
inline constexpr int kItemCount = 13;

inline const char* item_name(Item item) {
    static constexpr const char* names[kItemCount] = {
        "log",      "plank",          "stick",   "cobblestone",    "iron_ore",
        "iron_ingot", "coal",         "diamond", "crafting_table", "furnace",
        "wooden_pickaxe", "stone_pickaxe", "iron_pickaxe"};
    return names[static_cast<int>(item)];
}

enum class ToolTier { none, wood, stone, iron };

inline const char* tool_tier_name(ToolTier t) {
    switch (t) {
        case ToolTier::none: return "none";
        case ToolTier::wood: return "wooden_pickaxe";
        case ToolTier::stone: return "stone_pickaxe";
        case ToolTier::iron: return "iron_pickaxe";
    }
    return "?";
}

struct EnvConfig {
    bool deterministic = true;
    double explore_success_prob = 1.0;
    // Per-resource availability: an absent resource is never discovered.
    bool iron_available = true;
    bool coal_available = true;
    bool diamond_available = true;
};

/// Full simulator state. An immutable value: step() returns a new state.
struct WorldState {
    std::array<int, kItemCount> inventory{};
    ToolTier equipped = ToolTier::none;
    bool near_crafting_table = false;
    bool near_furnace = false;
    bool iron_in_chunk = false;
    bool coal_in_chunk = false;
    bool diamond_in_chunk = false;
    std::mt19937 rng;
    std::uint64_t step_count = 0;

    int count(Item item) const { return inventory[static_cast<size_t>(item)]; }
    int& count(Item item) { return inventory[static_cast<size_t>(item)]; }

    bool operator==(const WorldState& o) const {
        return inventory == o.inventory && equipped == o.equipped &&
               near_crafting_table == o.near_crafting_table && near_furnace == o.near_furnace &&
               iron_in_chunk == o.iron_in_chunk && coal_in_chunk == o.coal_in_chunk &&
               diamond_in_chunk == o.diamond_in_chunk && step_count == o.step_count && rng == o.rng;
    }
};

struct StepError {
    FormulaRef precondition;  // propositional over observations, false in abstract(world)
    std::string message;
};

struct StepResult {
    std::optional<StepError> error;
    WorldState world;  // unchanged on error

    bool ok() const { return !error.has_value(); }
};

namespace detail {

// Tags for fast per-proposition evaluation, resolved from names once.
enum class ObsProp {
    has_log, has_plank, has_2x_plank, has_3x_plank, has_4x_plank, has_11x_plank,
    has_2x_stick, has_3x_cobble, has_8x_cobble, has_11x_cobble,
    has_wood_pickaxe, has_stone_pickaxe, has_iron_pickaxe, has_diamond,
    has_iron_ingot, has_3x_iron_ingot, has_1x_iron_ore, has_2x_iron_ore, has_3x_iron_ore,
    has_crafting_table, has_furnace, has_fuel,
    near_crafting_table, near_furnace,
    diamond_in_chunk, iron_in_chunk, coal_in_chunk,
    iron_pickaxe_equipped, stone_pickaxe_equipped, wood_pickaxe_equipped,
};

inline ObsProp obs_prop_from_name(std::string_view name) {
    static const std::unordered_map<std::string_view, ObsProp> table = {
        {"obs_has_log", ObsProp::has_log},
        {"obs_has_plank", ObsProp::has_plank},
        {"obs_has_2x_plank", ObsProp::has_2x_plank},
        {"obs_has_3x_plank", ObsProp::has_3x_plank},
        {"obs_has_4x_plank", ObsProp::has_4x_plank},
        {"obs_has_11x_plank", ObsProp::has_11x_plank},
        {"obs_has_2x_stick", ObsProp::has_2x_stick},
        {"obs_has_3x_cobble", ObsProp::has_3x_cobble},
        {"obs_has_8x_cobble", ObsProp::has_8x_cobble},
        {"obs_has_11x_cobble", ObsProp::has_11x_cobble},
        {"obs_has_wood_pickaxe", ObsProp::has_wood_pickaxe},
        {"obs_has_stone_pickaxe", ObsProp::has_stone_pickaxe},
        {"obs_has_iron_pickaxe", ObsProp::has_iron_pickaxe},
        {"obs_has_diamond", ObsProp::has_diamond},
        {"obs_has_iron_ingot", ObsProp::has_iron_ingot},
        {"obs_has_3x_iron_ingot", ObsProp::has_3x_iron_ingot},
        {"obs_has_1x_iron_ore", ObsProp::has_1x_iron_ore},
        {"obs_has_2x_iron_ore", ObsProp::has_2x_iron_ore},
        {"obs_has_3x_iron_ore", ObsProp::has_3x_iron_ore},
        {"obs_has_crafting_table", ObsProp::has_crafting_table},
        {"obs_has_furnace", ObsProp::has_furnace},
        {"obs_has_fuel", ObsProp::has_fuel},
        {"obs_near_crafting_table", ObsProp::near_crafting_table},
        {"obs_near_furnace", ObsProp::near_furnace},
        {"obs_diamond_in_chunk", ObsProp::diamond_in_chunk},
        {"obs_iron_in_chunk", ObsProp::iron_in_chunk},
        {"obs_coal_in_chunk", ObsProp::coal_in_chunk},
        {"obs_iron_pickaxe_equipped", ObsProp::iron_pickaxe_equipped},
        {"obs_stone_pickaxe_equipped", ObsProp::stone_pickaxe_equipped},
        {"obs_wood_pickaxe_equipped", ObsProp::wood_pickaxe_equipped},
    };
    auto it = table.find(name);
    if (it == table.end())
        throw EnvError("observation proposition '" + std::string(name) +
                       "' has no environment semantics");
    return it->second;
}

inline bool eval_obs_prop(const WorldState& w, ObsProp prop) {
    switch (prop) {
        case ObsProp::has_log: return w.count(Item::log) >= 1;
        case ObsProp::has_plank: return w.count(Item::plank) >= 1;
        case ObsProp::has_2x_plank: return w.count(Item::plank) >= 2;
        case ObsProp::has_3x_plank: return w.count(Item::plank) >= 3;
        case ObsProp::has_4x_plank: return w.count(Item::plank) >= 4;
        case ObsProp::has_11x_plank: return w.count(Item::plank) >= 11;
        case ObsProp::has_2x_stick: return w.count(Item::stick) >= 2;
        case ObsProp::has_3x_cobble: return w.count(Item::cobblestone) >= 3;
        case ObsProp::has_8x_cobble: return w.count(Item::cobblestone) >= 8;
        case ObsProp::has_11x_cobble: return w.count(Item::cobblestone) >= 11;
        case ObsProp::has_wood_pickaxe: return w.count(Item::wooden_pickaxe) >= 1;
        case ObsProp::has_stone_pickaxe: return w.count(Item::stone_pickaxe) >= 1;
        case ObsProp::has_iron_pickaxe: return w.count(Item::iron_pickaxe) >= 1;
        case ObsProp::has_diamond: return w.count(Item::diamond) >= 1;
        case ObsProp::has_iron_ingot: return w.count(Item::iron_ingot) >= 1;
        case ObsProp::has_3x_iron_ingot: return w.count(Item::iron_ingot) >= 3;
        case ObsProp::has_1x_iron_ore: return w.count(Item::iron_ore) >= 1;
        case ObsProp::has_2x_iron_ore: return w.count(Item::iron_ore) >= 2;
        case ObsProp::has_3x_iron_ore: return w.count(Item::iron_ore) >= 3;
        case ObsProp::has_crafting_table: return w.count(Item::crafting_table) >= 1;
        case ObsProp::has_furnace: return w.count(Item::furnace) >= 1;
        // Coal or planks both burn; the proposition does not say which kind.
        case ObsProp::has_fuel: return w.count(Item::coal) >= 1 || w.count(Item::plank) >= 1;
        case ObsProp::near_crafting_table: return w.near_crafting_table;
        case ObsProp::near_furnace: return w.near_furnace;
        case ObsProp::diamond_in_chunk: return w.diamond_in_chunk;
        case ObsProp::iron_in_chunk: return w.iron_in_chunk;
        case ObsProp::coal_in_chunk: return w.coal_in_chunk;
        case ObsProp::iron_pickaxe_equipped: return w.equipped == ToolTier::iron;
        case ObsProp::stone_pickaxe_equipped: return w.equipped == ToolTier::stone;
        case ObsProp::wood_pickaxe_equipped: return w.equipped == ToolTier::wood;
    }
    return false;
}

enum class ActProp {
    mine_log, mine_stone, mine_iron_ore, mine_coal, mine_diamond,
    craft_planks, craft_stick, craft_wooden_pickaxe, craft_stone_pickaxe, craft_iron_pickaxe,
    craft_crafting_table, craft_furnace, smelt_iron,
    equip_wood_pickaxe, equip_stone_pickaxe, equip_iron_pickaxe,
    explore_general, explore_diamond_down, place_crafting_table, place_furnace,
};

inline ActProp act_prop_from_name(std::string_view name) {
    static const std::unordered_map<std::string_view, ActProp> table = {
        {"action_mine_log", ActProp::mine_log},
        {"action_mine_stone", ActProp::mine_stone},
        {"action_mine_iron_ore", ActProp::mine_iron_ore},
        {"action_mine_coal", ActProp::mine_coal},
        {"action_mine_diamond", ActProp::mine_diamond},
        {"action_craft_planks", ActProp::craft_planks},
        {"action_craft_stick", ActProp::craft_stick},
        {"action_craft_wooden_pickaxe", ActProp::craft_wooden_pickaxe},
        {"action_craft_stone_pickaxe", ActProp::craft_stone_pickaxe},
        {"action_craft_iron_pickaxe", ActProp::craft_iron_pickaxe},
        {"action_craft_crafting_table", ActProp::craft_crafting_table},
        {"action_craft_furnace", ActProp::craft_furnace},
        {"action_smelt_iron", ActProp::smelt_iron},
        {"action_equip_wood_pickaxe", ActProp::equip_wood_pickaxe},
        {"action_equip_stone_pickaxe", ActProp::equip_stone_pickaxe},
        {"action_equip_iron_pickaxe", ActProp::equip_iron_pickaxe},
        {"action_explore_general", ActProp::explore_general},
        {"action_explore_diamond_down", ActProp::explore_diamond_down},
        {"action_place_crafting_table", ActProp::place_crafting_table},
        {"action_place_furnace", ActProp::place_furnace},
    };
    auto it = table.find(name);
    if (it == table.end())
        throw EnvError("action proposition '" + std::string(name) + "' has no environment semantics");
    return it->second;
}

}  // namespace detail

/// Reduction of the full world state to the boolean observation vector.
inline AbstractState abstract_state(const WorldState& world, const Vocabulary& vocab) {
    AbstractState s;
    s.bits.reserve(static_cast<size_t>(vocab.num_observations()));
    for (const PropositionId& prop : vocab.observations())
        s.bits.push_back(detail::eval_obs_prop(world, detail::obs_prop_from_name(prop.name)));
    return s;
}

inline bool is_goal(const AbstractState& state, const Vocabulary& vocab) {
    return state.bits[static_cast<size_t>(vocab.observation_index("obs_has_diamond"))] != 0;
}

/// Symbolic crafting-world simulator over the default action alphabet.
class Environment {
  public:
    Environment(EnvConfig config, const Vocabulary& vocab) : config_(config), vocab_(&vocab) {
        obs_tags_.reserve(static_cast<size_t>(vocab.num_observations()));
        for (const PropositionId& p : vocab.observations())
            obs_tags_.push_back(detail::obs_prop_from_name(p.name));
        act_tags_.reserve(static_cast<size_t>(vocab.num_actions()));
        for (const PropositionId& p : vocab.actions())
            act_tags_.push_back(detail::act_prop_from_name(p.name));
        build_requirements();
    }

    const EnvConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return *vocab_; }

    /// Fresh world: empty inventory, nothing equipped, no placements. In
    /// deterministic mode iron and coal are pre-discovered; diamonds always
    /// require explore_diamond_down.
    WorldState init(std::uint64_t seed) const {
        WorldState w;
        w.rng.seed(static_cast<std::mt19937::result_type>(seed));
        if (config_.deterministic) {
            w.iron_in_chunk = config_.iron_available;
            w.coal_in_chunk = config_.coal_available;
        }
        return w;
    }

    AbstractState abstract(const WorldState& w) const {
        AbstractState s;
        s.bits.reserve(obs_tags_.size());
        for (detail::ObsProp tag : obs_tags_) s.bits.push_back(detail::eval_obs_prop(w, tag));
        return s;
    }

    bool goal_reached(const WorldState& w) const { return w.count(Item::diamond) >= 1; }

    struct Requirement {
        FormulaRef precondition;
        std::string message;
    };

    const std::vector<Requirement>& requirements(int action_index) const {
        return requirements_.at(static_cast<size_t>(action_index));
    }

    StepResult step(const WorldState& world, const ActionVector& action) const {
        if (static_cast<int>(action.bits.size()) != vocab_->num_actions() || !action.is_one_hot())
            throw EnvError("malformed action vector");
        return step(world, action.action_index());
    }

    StepResult step(const WorldState& world, int action_index) const {
        if (action_index < 0 || action_index >= vocab_->num_actions())
            throw EnvError("action index out of range");
        AbstractState s = abstract(world);
        for (const Requirement& req : requirements_[static_cast<size_t>(action_index)]) {
            if (!eval_prop(*req.precondition, s))
                return StepResult{StepError{req.precondition, req.message}, world};
        }
        WorldState w = world;
        apply_effects(w, act_tags_[static_cast<size_t>(action_index)]);
        w.step_count++;
        return StepResult{std::nullopt, std::move(w)};
    }

    /// Structured text rendering of the full state, as shown to actors.
    std::string render_full_state(const WorldState& w) const {
        std::ostringstream out;
        out << "step: " << w.step_count << "\n";
        out << "inventory:";
        bool any = false;
        for (int i = 0; i < kItemCount; ++i) {
            if (w.inventory[static_cast<size_t>(i)] == 0) continue;
            out << (any ? ", " : " ") << item_name(static_cast<Item>(i)) << "="
                << w.inventory[static_cast<size_t>(i)];
            any = true;
        }
        if (!any) out << " (empty)";
        out << "\n";
        out << "equipped: " << tool_tier_name(w.equipped) << "\n";
        out << "nearby: crafting_table=" << (w.near_crafting_table ? "yes" : "no")
            << ", furnace=" << (w.near_furnace ? "yes" : "no") << "\n";
        out << "chunk: iron=" << (w.iron_in_chunk ? "yes" : "no")
            << ", coal=" << (w.coal_in_chunk ? "yes" : "no")
            << ", diamond=" << (w.diamond_in_chunk ? "yes" : "no");
        return out.str();
    }

  private:
    void require(int action_index, const char* formula_text, std::string message) {
        requirements_[static_cast<size_t>(action_index)].push_back(
            Requirement{parse_formula(formula_text, *vocab_), std::move(message)});
    }

    void build_requirements() {
        using detail::ActProp;
        requirements_.assign(act_tags_.size(), {});
        constexpr const char* kAnyPickaxe =
            "obs_wood_pickaxe_equipped | obs_stone_pickaxe_equipped | obs_iron_pickaxe_equipped";
        constexpr const char* kStonePlus =
            "obs_stone_pickaxe_equipped | obs_iron_pickaxe_equipped";
        for (size_t i = 0; i < act_tags_.size(); ++i) {
            int a = static_cast<int>(i);
            switch (act_tags_[i]) {
                case ActProp::mine_log:
                    break;
                case ActProp::mine_stone:
                    require(a, kAnyPickaxe, "mining stone requires an equipped pickaxe");
                    break;
                case ActProp::mine_iron_ore:
                    require(a, kStonePlus, "mining iron ore requires an equipped stone or iron pickaxe");
                    require(a, "obs_iron_in_chunk", "no iron ore detected nearby");
                    break;
                case ActProp::mine_coal:
                    require(a, kAnyPickaxe, "mining coal requires an equipped pickaxe");
                    require(a, "obs_coal_in_chunk", "no coal detected nearby");
                    break;
                case ActProp::mine_diamond:
                    require(a, "obs_iron_pickaxe_equipped",
                            "mining diamond requires an equipped iron pickaxe");
                    require(a, "obs_diamond_in_chunk", "no diamond detected nearby");
                    break;
                case ActProp::craft_planks:
                    require(a, "obs_has_log", "crafting planks requires a log");
                    break;
                case ActProp::craft_stick:
                    require(a, "obs_has_2x_plank", "crafting sticks requires 2 planks");
                    break;
                case ActProp::craft_wooden_pickaxe:
                    require(a, "obs_near_crafting_table", "crafting a pickaxe requires a crafting table nearby");
                    require(a, "obs_has_3x_plank & obs_has_2x_stick",
                            "crafting a wooden pickaxe requires 3 planks and 2 sticks");
                    break;
                case ActProp::craft_stone_pickaxe:
                    require(a, "obs_near_crafting_table", "crafting a pickaxe requires a crafting table nearby");
                    require(a, "obs_has_3x_cobble & obs_has_2x_stick",
                            "crafting a stone pickaxe requires 3 cobblestone and 2 sticks");
                    break;
                case ActProp::craft_iron_pickaxe:
                    require(a, "obs_near_crafting_table", "crafting a pickaxe requires a crafting table nearby");
                    require(a, "obs_has_3x_iron_ingot & obs_has_2x_stick",
                            "crafting an iron pickaxe requires 3 iron ingots and 2 sticks");
                    break;
                case ActProp::craft_crafting_table:
                    require(a, "obs_has_4x_plank", "crafting a crafting table requires 4 planks");
                    break;
                case ActProp::craft_furnace:
                    require(a, "obs_near_crafting_table", "crafting a furnace requires a crafting table nearby");
                    require(a, "obs_has_8x_cobble", "crafting a furnace requires 8 cobblestone");
                    break;
                case ActProp::smelt_iron:
                    require(a, "obs_near_furnace", "smelting requires a furnace nearby");
                    require(a, "obs_has_1x_iron_ore", "smelting requires iron ore");
                    require(a, "obs_has_fuel", "smelting requires fuel");
                    break;
                case ActProp::equip_wood_pickaxe:
                    require(a, "obs_has_wood_pickaxe", "cannot equip a wooden pickaxe without one");
                    break;
                case ActProp::equip_stone_pickaxe:
                    require(a, "obs_has_stone_pickaxe", "cannot equip a stone pickaxe without one");
                    break;
                case ActProp::equip_iron_pickaxe:
                    require(a, "obs_has_iron_pickaxe", "cannot equip an iron pickaxe without one");
                    break;
                case ActProp::explore_general:
                    break;
                case ActProp::explore_diamond_down:
                    require(a, "obs_iron_pickaxe_equipped",
                            "exploring downward requires an equipped iron pickaxe");
                    break;
                case ActProp::place_crafting_table:
                    require(a, "obs_has_crafting_table", "cannot place a crafting table without one");
                    break;
                case ActProp::place_furnace:
                    require(a, "obs_has_furnace", "cannot place a furnace without one");
                    break;
            }
        }
    }

    bool draw(WorldState& w) const {
        if (config_.deterministic) return true;
        double u = (w.rng() >> 8) * (1.0 / 16777216.0);
        return u < config_.explore_success_prob;
    }

    void apply_effects(WorldState& w, detail::ActProp act) const {
        using detail::ActProp;
        switch (act) {
            case ActProp::mine_log: w.count(Item::log) += 1; break;
            case ActProp::mine_stone: w.count(Item::cobblestone) += 1; break;
            case ActProp::mine_iron_ore: w.count(Item::iron_ore) += 1; break;
            case ActProp::mine_coal: w.count(Item::coal) += 1; break;
            case ActProp::mine_diamond: w.count(Item::diamond) += 1; break;
            case ActProp::craft_planks:
                w.count(Item::log) -= 1;
                w.count(Item::plank) += 4;
                break;
            case ActProp::craft_stick:
                w.count(Item::plank) -= 2;
                w.count(Item::stick) += 4;
                break;
            case ActProp::craft_wooden_pickaxe:
                w.count(Item::plank) -= 3;
                w.count(Item::stick) -= 2;
                w.count(Item::wooden_pickaxe) += 1;
                break;
            case ActProp::craft_stone_pickaxe:
                w.count(Item::cobblestone) -= 3;
                w.count(Item::stick) -= 2;
                w.count(Item::stone_pickaxe) += 1;
                break;
            case ActProp::craft_iron_pickaxe:
                w.count(Item::iron_ingot) -= 3;
                w.count(Item::stick) -= 2;
                w.count(Item::iron_pickaxe) += 1;
                break;
            case ActProp::craft_crafting_table:
                w.count(Item::plank) -= 4;
                w.count(Item::crafting_table) += 1;
                break;
            case ActProp::craft_furnace:
                w.count(Item::cobblestone) -= 8;
                w.count(Item::furnace) += 1;
                break;
            case ActProp::smelt_iron:
                w.count(Item::iron_ore) -= 1;
                w.count(Item::iron_ingot) += 1;
                // Coal burns before planks.
                if (w.count(Item::coal) >= 1)
                    w.count(Item::coal) -= 1;
                else
                    w.count(Item::plank) -= 1;
                break;
            case ActProp::equip_wood_pickaxe: w.equipped = ToolTier::wood; break;
            case ActProp::equip_stone_pickaxe: w.equipped = ToolTier::stone; break;
            case ActProp::equip_iron_pickaxe: w.equipped = ToolTier::iron; break;
            case ActProp::explore_general:
                if (config_.iron_available && draw(w)) w.iron_in_chunk = true;
                if (config_.coal_available && draw(w)) w.coal_in_chunk = true;
                w.near_crafting_table = false;
                w.near_furnace = false;
                break;
            case ActProp::explore_diamond_down:
                if (config_.diamond_available && draw(w)) w.diamond_in_chunk = true;
                w.near_crafting_table = false;
                w.near_furnace = false;
                break;
            case ActProp::place_crafting_table:
                w.count(Item::crafting_table) -= 1;
                w.near_crafting_table = true;
                break;
            case ActProp::place_furnace:
                w.count(Item::furnace) -= 1;
                w.near_furnace = true;
                break;
        }
    }

    EnvConfig config_;
    const Vocabulary* vocab_;
    std::vector<detail::ObsProp> obs_tags_;
    std::vector<detail::ActProp> act_tags_;
    std::vector<std::vector<Requirement>> requirements_;
};

}  // namespace shieldcraft
