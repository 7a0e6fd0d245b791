#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "shieldcraft/world.hpp"

using namespace shieldcraft;

namespace {

const Vocabulary& vocab() { return default_vocabulary(); }

Environment make_env() { return Environment(EnvConfig{}, vocab()); }

int action_id(const char* name) { return vocab().action_index(name); }

WorldState step_ok(const Environment& env, const WorldState& w, const char* action) {
    StepResult r = env.step(w, action_id(action));
    INFO(action);
    REQUIRE(r.ok());
    return r.world;
}

}  // namespace

TEST_CASE("init: deterministic worlds pre-discover iron and coal, never diamond") {
    Environment env = make_env();
    WorldState w = env.init(0);
    for (int i = 0; i < kItemCount; ++i) CHECK(w.inventory[static_cast<size_t>(i)] == 0);
    CHECK(w.equipped == ToolTier::none);
    CHECK_FALSE(w.near_crafting_table);
    CHECK_FALSE(w.near_furnace);
    CHECK(w.iron_in_chunk);
    CHECK(w.coal_in_chunk);
    CHECK_FALSE(w.diamond_in_chunk);

    EnvConfig stochastic;
    stochastic.deterministic = false;
    stochastic.explore_success_prob = 0.5;
    Environment env2(stochastic, vocab());
    WorldState w2 = env2.init(3);
    CHECK_FALSE(w2.iron_in_chunk);
    CHECK_FALSE(w2.coal_in_chunk);
    CHECK_FALSE(w2.diamond_in_chunk);
}

TEST_CASE("same seed and actions give identical state trajectories") {
    EnvConfig config;
    config.deterministic = false;
    config.explore_success_prob = 0.5;
    Environment env(config, vocab());
    std::mt19937 rng(17);
    std::vector<int> actions;
    for (int i = 0; i < 80; ++i) actions.push_back(static_cast<int>(rng() % 20));
    auto run = [&]() {
        WorldState w = env.init(42);
        std::vector<WorldState> states{w};
        for (int a : actions) {
            StepResult r = env.step(w, a);
            w = r.world;
            states.push_back(w);
        }
        return states;
    };
    std::vector<WorldState> first = run(), second = run();
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
}

TEST_CASE("craft_planks: error without a log, 1 log -> 4 planks with one") {
    Environment env = make_env();
    WorldState empty = env.init(0);
    StepResult fail = env.step(empty, action_id("action_craft_planks"));
    REQUIRE_FALSE(fail.ok());
    CHECK(print_formula(fail.error->precondition) == "obs_has_log");
    CHECK(fail.world == empty);  // error atomicity

    WorldState w = empty;
    w.count(Item::log) = 1;
    StepResult ok = env.step(w, action_id("action_craft_planks"));
    REQUIRE(ok.ok());
    CHECK(ok.world.count(Item::log) == 0);
    CHECK(ok.world.count(Item::plank) == 4);
    CHECK(ok.world.step_count == w.step_count + 1);
}

TEST_CASE("mine_diamond without an iron pickaxe reports the equipment precondition") {
    Environment env = make_env();
    WorldState w = env.init(0);
    StepResult r = env.step(w, action_id("action_mine_diamond"));
    REQUIRE_FALSE(r.ok());
    CHECK(print_formula(r.error->precondition) == "obs_iron_pickaxe_equipped");
    CHECK(r.world == w);

    // With the pickaxe equipped but no diamond located, the chunk flag is next.
    w.count(Item::iron_pickaxe) = 1;
    w.equipped = ToolTier::iron;
    StepResult r2 = env.step(w, action_id("action_mine_diamond"));
    REQUIRE_FALSE(r2.ok());
    CHECK(print_formula(r2.error->precondition) == "obs_diamond_in_chunk");
}

TEST_CASE("recipe table: consumption and yields per action") {
    Environment env = make_env();
    WorldState w = env.init(0);
    w.count(Item::log) = 2;
    w.count(Item::plank) = 20;
    w.count(Item::stick) = 10;
    w.count(Item::cobblestone) = 20;
    w.count(Item::iron_ingot) = 5;
    w.count(Item::iron_ore) = 2;
    w.count(Item::coal) = 1;
    w.near_crafting_table = true;
    w.near_furnace = true;

    WorldState after = step_ok(env, w, "action_craft_stick");
    CHECK(after.count(Item::plank) == 18);
    CHECK(after.count(Item::stick) == 14);

    after = step_ok(env, w, "action_craft_crafting_table");
    CHECK(after.count(Item::plank) == 16);
    CHECK(after.count(Item::crafting_table) == 1);

    after = step_ok(env, w, "action_craft_wooden_pickaxe");
    CHECK(after.count(Item::plank) == 17);
    CHECK(after.count(Item::stick) == 8);
    CHECK(after.count(Item::wooden_pickaxe) == 1);

    after = step_ok(env, w, "action_craft_stone_pickaxe");
    CHECK(after.count(Item::cobblestone) == 17);
    CHECK(after.count(Item::stick) == 8);
    CHECK(after.count(Item::stone_pickaxe) == 1);

    after = step_ok(env, w, "action_craft_iron_pickaxe");
    CHECK(after.count(Item::iron_ingot) == 2);
    CHECK(after.count(Item::stick) == 8);
    CHECK(after.count(Item::iron_pickaxe) == 1);

    after = step_ok(env, w, "action_craft_furnace");
    CHECK(after.count(Item::cobblestone) == 12);
    CHECK(after.count(Item::furnace) == 1);

    after = step_ok(env, w, "action_smelt_iron");
    CHECK(after.count(Item::iron_ore) == 1);
    CHECK(after.count(Item::iron_ingot) == 6);
    CHECK(after.count(Item::coal) == 0);  // coal burns before planks
    CHECK(after.count(Item::plank) == 20);

    WorldState no_coal = after;
    after = step_ok(env, no_coal, "action_smelt_iron");
    CHECK(after.count(Item::plank) == 19);  // plank burns when coal is out
    CHECK(after.count(Item::iron_ingot) == 7);
}

TEST_CASE("mining requires the right tool tier") {
    Environment env = make_env();
    WorldState w = env.init(0);
    CHECK_FALSE(env.step(w, action_id("action_mine_stone")).ok());

    w.count(Item::wooden_pickaxe) = 1;
    w.equipped = ToolTier::wood;
    CHECK(env.step(w, action_id("action_mine_stone")).ok());
    CHECK(env.step(w, action_id("action_mine_coal")).ok());
    StepResult iron_fail = env.step(w, action_id("action_mine_iron_ore"));
    REQUIRE_FALSE(iron_fail.ok());
    CHECK(print_formula(iron_fail.error->precondition) ==
          "obs_stone_pickaxe_equipped | obs_iron_pickaxe_equipped");

    w.count(Item::stone_pickaxe) = 1;
    w.equipped = ToolTier::stone;
    StepResult mined = env.step(w, action_id("action_mine_iron_ore"));
    REQUIRE(mined.ok());
    CHECK(mined.world.count(Item::iron_ore) == 1);
}

TEST_CASE("equip swaps the single equipment slot and requires possession") {
    Environment env = make_env();
    WorldState w = env.init(0);
    CHECK_FALSE(env.step(w, action_id("action_equip_wood_pickaxe")).ok());
    w.count(Item::wooden_pickaxe) = 1;
    w.count(Item::stone_pickaxe) = 1;
    w = step_ok(env, w, "action_equip_wood_pickaxe");
    CHECK(w.equipped == ToolTier::wood);
    w = step_ok(env, w, "action_equip_stone_pickaxe");
    CHECK(w.equipped == ToolTier::stone);
}

TEST_CASE("placement consumes the item and sets the proximity flag") {
    Environment env = make_env();
    WorldState w = env.init(0);
    w.count(Item::crafting_table) = 1;
    w.count(Item::furnace) = 1;
    w = step_ok(env, w, "action_place_crafting_table");
    CHECK(w.near_crafting_table);
    CHECK(w.count(Item::crafting_table) == 0);
    w = step_ok(env, w, "action_place_furnace");
    CHECK(w.near_furnace);
    CHECK(w.near_crafting_table);  // placing does not move the agent
}

TEST_CASE("exploration clears proximity and discovers resources") {
    Environment env = make_env();
    WorldState w = env.init(0);
    w.near_crafting_table = true;
    w.near_furnace = true;
    w = step_ok(env, w, "action_explore_general");
    CHECK_FALSE(w.near_crafting_table);
    CHECK_FALSE(w.near_furnace);
    CHECK(w.iron_in_chunk);
    CHECK(w.coal_in_chunk);

    CHECK_FALSE(env.step(w, action_id("action_explore_diamond_down")).ok());
    w.count(Item::iron_pickaxe) = 1;
    w.equipped = ToolTier::iron;
    w = step_ok(env, w, "action_explore_diamond_down");
    CHECK(w.diamond_in_chunk);

    EnvConfig scarce;
    scarce.diamond_available = false;
    Environment env2(scarce, vocab());
    WorldState w2 = env2.init(0);
    w2.count(Item::iron_pickaxe) = 1;
    w2.equipped = ToolTier::iron;
    StepResult r = env2.step(w2, action_id("action_explore_diamond_down"));
    REQUIRE(r.ok());
    CHECK_FALSE(r.world.diamond_in_chunk);
}

TEST_CASE("goal detection: obs_has_diamond drives is_goal") {
    Environment env = make_env();
    WorldState w = env.init(0);
    CHECK_FALSE(is_goal(env.abstract(w), vocab()));
    CHECK_FALSE(env.goal_reached(w));
    w.count(Item::diamond) = 1;
    CHECK(is_goal(env.abstract(w), vocab()));
    CHECK(env.goal_reached(w));

    // Post-state of a successful mine_diamond is a goal state.
    WorldState ready = env.init(0);
    ready.count(Item::iron_pickaxe) = 1;
    ready.equipped = ToolTier::iron;
    ready.diamond_in_chunk = true;
    StepResult r = env.step(ready, action_id("action_mine_diamond"));
    REQUIRE(r.ok());
    CHECK(is_goal(env.abstract(r.world), vocab()));
}

TEST_CASE("errors carry preconditions that are false in the abstraction, and only then") {
    Environment env = make_env();
    std::mt19937 rng(2025);
    for (int episode = 0; episode < 30; ++episode) {
        WorldState w = env.init(episode);
        for (int step = 0; step < 100; ++step) {
            int a = static_cast<int>(rng() % 20);
            AbstractState s = env.abstract(w);
            StepResult r = env.step(w, a);
            if (r.ok()) {
                for (const Environment::Requirement& req : env.requirements(a))
                    CHECK(eval_prop(*req.precondition, s));
                w = r.world;
            } else {
                CHECK_FALSE(eval_prop(*r.error->precondition, s));
                CHECK(r.world == w);
            }
        }
    }
}

TEST_CASE("malformed action vectors are rejected") {
    Environment env = make_env();
    WorldState w = env.init(0);
    ActionVector two_hot = ActionVector::one_hot(0, 20);
    two_hot.bits[5] = 1;
    CHECK_THROWS_AS(env.step(w, two_hot), EnvError);
    ActionVector short_vec;
    short_vec.bits.assign(5, 0);
    short_vec.bits[0] = 1;
    CHECK_THROWS_AS(env.step(w, short_vec), EnvError);
    CHECK_THROWS_AS(env.step(w, 20), EnvError);
}

TEST_CASE("the nine-subgoal ladder is realized by explicit dependencies") {
    Environment env = make_env();
    WorldState w = env.init(0);

    // 1. logs  2. planks and sticks  3. wooden pickaxe
    w = step_ok(env, w, "action_mine_log");
    w = step_ok(env, w, "action_mine_log");
    w = step_ok(env, w, "action_mine_log");
    w = step_ok(env, w, "action_craft_planks");
    w = step_ok(env, w, "action_craft_planks");
    w = step_ok(env, w, "action_craft_planks");
    w = step_ok(env, w, "action_craft_stick");
    CHECK_FALSE(env.step(w, action_id("action_craft_wooden_pickaxe")).ok());  // needs the table
    w = step_ok(env, w, "action_craft_crafting_table");
    w = step_ok(env, w, "action_place_crafting_table");
    w = step_ok(env, w, "action_craft_wooden_pickaxe");
    CHECK(w.count(Item::wooden_pickaxe) == 1);

    // 4. stone with the wooden pickaxe
    CHECK_FALSE(env.step(w, action_id("action_mine_stone")).ok());  // not equipped yet
    w = step_ok(env, w, "action_equip_wood_pickaxe");
    for (int i = 0; i < 11; ++i) w = step_ok(env, w, "action_mine_stone");

    // 5. stone pickaxe and furnace
    w = step_ok(env, w, "action_craft_stone_pickaxe");
    w = step_ok(env, w, "action_craft_furnace");
    w = step_ok(env, w, "action_place_furnace");

    // 6. iron ore needs the stone pickaxe equipped
    CHECK_FALSE(env.step(w, action_id("action_mine_iron_ore")).ok());
    w = step_ok(env, w, "action_equip_stone_pickaxe");
    w = step_ok(env, w, "action_mine_iron_ore");
    w = step_ok(env, w, "action_mine_iron_ore");
    w = step_ok(env, w, "action_mine_iron_ore");

    // 7. smelt (plank fuel first, then coal)
    w = step_ok(env, w, "action_craft_stick");
    w = step_ok(env, w, "action_smelt_iron");
    w = step_ok(env, w, "action_mine_coal");
    w = step_ok(env, w, "action_smelt_iron");
    w = step_ok(env, w, "action_mine_coal");
    w = step_ok(env, w, "action_smelt_iron");

    // 8. iron pickaxe  9. explore down and mine the diamond
    w = step_ok(env, w, "action_craft_iron_pickaxe");
    w = step_ok(env, w, "action_equip_iron_pickaxe");
    CHECK_FALSE(env.step(w, action_id("action_mine_diamond")).ok());  // not discovered yet
    w = step_ok(env, w, "action_explore_diamond_down");
    w = step_ok(env, w, "action_mine_diamond");
    CHECK(env.goal_reached(w));
}
