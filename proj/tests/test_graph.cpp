#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "shieldcraft/actor.hpp"
#include "shieldcraft/graph.hpp"
#include "shieldcraft/oracle.hpp"

using namespace shieldcraft;
using test_helpers::load_fixture_set;

namespace {

const Vocabulary& vocab() { return default_vocabulary(); }

AbstractState state_with(std::initializer_list<const char*> props) {
    AbstractState s = vocab().empty_state();
    for (const char* name : props)
        s.bits[static_cast<size_t>(vocab().observation_index(name))] = 1;
    return s;
}

StepRecord make_ok_step(int step, AbstractState pre, const char* action, AbstractState post) {
    StepRecord rec;
    rec.step = step;
    rec.state = std::move(pre);
    rec.executed = action;
    rec.outcome = StepOutcome::ok;
    rec.post_state = std::move(post);
    return rec;
}

/// s0 --explore_diamond_down--> s1 --mine_diamond--> goal, with a wasteful
/// self-loop craft at s0.
Trajectory toy_trajectory() {
    AbstractState s0 = state_with({"obs_has_wood_pickaxe", "obs_iron_pickaxe_equipped"});
    AbstractState s1 = state_with(
        {"obs_has_wood_pickaxe", "obs_iron_pickaxe_equipped", "obs_diamond_in_chunk"});
    AbstractState s2 = state_with({"obs_has_wood_pickaxe", "obs_iron_pickaxe_equipped",
                                   "obs_diamond_in_chunk", "obs_has_diamond"});
    Trajectory traj;
    traj.steps.push_back(make_ok_step(1, s0, "action_craft_wooden_pickaxe", s0));
    traj.steps.push_back(make_ok_step(2, s0, "action_explore_diamond_down", s1));
    traj.steps.push_back(make_ok_step(3, s1, "action_mine_diamond", s2));
    traj.terminated = Termination::goal;
    return traj;
}

Trajectory scripted_trajectory() {
    Environment env(EnvConfig{}, vocab());
    ScriptedGreedyPolicy policy(vocab());
    return run_episode(env, policy, LawSet{}, EpisodeParams{200, 5, 0});
}

}  // namespace

TEST_CASE("build: empty input gives an empty graph") {
    BipartiteGraph g = build_graph(std::vector<Trajectory>{}, vocab());
    CHECK(g.num_states() == 0);
    CHECK(g.num_pairs() == 0);
    CHECK(g.goal_states().empty());
}

TEST_CASE("build: node counts are bounded by trajectory length") {
    std::vector<Trajectory> trajs{toy_trajectory()};
    BipartiteGraph g = build_graph(trajs, vocab());
    CHECK(g.num_states() <= 4);  // N+1 for N steps
    CHECK(g.num_pairs() <= 3);   // N pairs
    CHECK(g.num_states() == 3);
    CHECK(g.num_pairs() == 3);
    REQUIRE(g.goal_states().size() == 1);
    CHECK(g.is_goal_state(g.goal_states()[0]));
}

TEST_CASE("distances: goal at 0, predecessors count choice+transition as one hop") {
    std::vector<Trajectory> trajs{toy_trajectory()};
    BipartiteGraph g = build_graph(trajs, vocab());
    std::vector<int> dist = g.distances_to_goal();
    AbstractState s0 = trajs[0].steps[0].state;
    AbstractState s1 = trajs[0].steps[2].state;
    AbstractState goal = trajs[0].steps[2].post_state;
    CHECK(dist[static_cast<size_t>(*g.find_state(goal))] == 0);
    CHECK(dist[static_cast<size_t>(*g.find_state(s1))] == 1);
    CHECK(dist[static_cast<size_t>(*g.find_state(s0))] == 2);
    CHECK(g.distance_to_goal(goal) == 0);
    CHECK(g.distance_to_goal(s0) == 2);
    CHECK_THROWS_AS(g.distance_to_goal(vocab().empty_state()), GraphError);
}

TEST_CASE("prune: the empty law set is the identity") {
    std::vector<Trajectory> trajs{toy_trajectory()};
    BipartiteGraph g = build_graph(trajs, vocab());
    BipartiteGraph pruned = prune_graph(g, LawSet{}, vocab());
    CHECK(pruned.num_states() == g.num_states());
    CHECK(pruned.num_pairs() == g.num_pairs());
}

TEST_CASE("prune: the duplicate-pickaxe law removes exactly its choice edges") {
    std::vector<Trajectory> trajs{toy_trajectory()};
    BipartiteGraph g = build_graph(trajs, vocab());
    LawSet laws;
    laws.add(parse_law("G(obs_has_wooden_pickaxe -> X(!action_craft_wooden_pickaxe))", vocab(),
                       "eq2", LawSource::critic_efficiency));
    BipartiteGraph pruned = prune_graph(g, laws, vocab());
    CHECK(pruned.num_pairs() == g.num_pairs() - 1);
    for (const BipartiteGraph::PairNode& node : pruned.pairs())
        CHECK(vocab().action(node.action).name != "action_craft_wooden_pickaxe");
    // Monotone: the pruned edge set is a subset of the original.
    CHECK(pruned.num_pairs() <= g.num_pairs());
    CHECK(pruned.num_states() == g.num_states());
}

TEST_CASE("prune agrees with shield checks edge by edge") {
    Trajectory traj = scripted_trajectory();
    std::vector<Trajectory> trajs{traj};
    BipartiteGraph g = build_graph(trajs, vocab());
    LawSet laws = load_fixture_set({"saycan_hard.laws"});
    BipartiteGraph pruned = prune_graph(g, laws, vocab());
    for (const BipartiteGraph::PairNode& node : g.pairs()) {
        const AbstractState& s = g.states()[static_cast<size_t>(node.state)];
        bool allowed = check(s, ActionVector::one_hot(node.action, 20), laws).allowed;
        bool kept = false;
        if (std::optional<int> target = pruned.find_state(s)) {
            for (int pair_id : pruned.choices(*target))
                kept |= pruned.pairs()[static_cast<size_t>(pair_id)].action == node.action;
        }
        CHECK(kept == allowed);
    }
}

TEST_CASE("pruning never decreases any state's distance") {
    std::mt19937 rng(808);
    Trajectory traj = scripted_trajectory();
    std::vector<Trajectory> trajs{traj};
    BipartiteGraph g = build_graph(trajs, vocab());
    std::vector<int> before = g.distances_to_goal();
    for (const char* fixture : {"saycan_hard.laws", "innermonologue.laws"}) {
        LawSet laws = test_helpers::load_fixture_set({fixture});
        BipartiteGraph pruned = prune_graph(g, laws, vocab());
        std::vector<int> after(static_cast<size_t>(g.num_states()),
                               std::numeric_limits<int>::max());
        std::vector<int> pruned_dist = pruned.distances_to_goal();
        for (int i = 0; i < pruned.num_states(); ++i) {
            std::optional<int> original = g.find_state(pruned.states()[static_cast<size_t>(i)]);
            REQUIRE(original.has_value());
            after[static_cast<size_t>(*original)] = pruned_dist[static_cast<size_t>(i)];
        }
        for (int i = 0; i < g.num_states(); ++i)
            CHECK(after[static_cast<size_t>(i)] >= before[static_cast<size_t>(i)]);
    }
    (void)rng;
}

TEST_CASE("state node count stays below the dataset bound") {
    Trajectory traj = scripted_trajectory();
    std::vector<Trajectory> trajs{traj};
    BipartiteGraph g = build_graph(trajs, vocab());
    size_t dataset = traj.steps.size() + 1;
    CHECK(static_cast<size_t>(g.num_states()) <= dataset);
}

TEST_CASE("DOT export names actions and lists true propositions") {
    std::vector<Trajectory> trajs{toy_trajectory()};
    BipartiteGraph g = build_graph(trajs, vocab());
    std::string dot = g.to_dot(vocab());
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("action_mine_diamond") != std::string::npos);
    CHECK(dot.find("obs_has_diamond") != std::string::npos);
    BipartiteGraph empty = build_graph(std::vector<Trajectory>{}, vocab());
    CHECK(empty.to_dot(vocab()).find("s0") == std::string::npos);
}

TEST_CASE("oracle: a goal-holding start costs zero") {
    Environment env(EnvConfig{}, vocab());
    WorldState w = env.init(0);
    w.count(Item::diamond) = 1;
    CHECK(brute_force_optimal(env, w, 10) == 0);
}

TEST_CASE("oracle: wooden pickaxe from scratch takes exactly 10 primitives") {
    Environment env(EnvConfig{}, vocab());
    std::optional<int> steps = brute_force_optimal(
        env, env.init(0), 20,
        [](const WorldState& w) { return w.count(Item::wooden_pickaxe) >= 1; });
    REQUIRE(steps.has_value());
    // 3x mine_log, 3x craft_planks, craft_stick, craft_crafting_table,
    // place_crafting_table, craft_wooden_pickaxe.
    CHECK(*steps == 10);
}

TEST_CASE("oracle: stochastic environments are rejected, horizon exhaustion is unreachable") {
    EnvConfig stochastic;
    stochastic.deterministic = false;
    Environment env(stochastic, vocab());
    CHECK_THROWS_AS(brute_force_optimal(env, env.init(0), 5), EnvError);

    Environment det(EnvConfig{}, vocab());
    CHECK_FALSE(brute_force_optimal(det, det.init(0), 5).has_value());  // diamond needs far more
}

TEST_CASE("oracle consistency along the scripted trajectory") {
    // The executed suffix is a witness plan, so its length bounds the oracle
    // from above at every visited world; the empirical graph distance in turn
    // never exceeds the suffix length (repeated abstract states only contract
    // the graph).
    Environment env(EnvConfig{}, vocab());
    ScriptedGreedyPolicy policy(vocab());
    Trajectory traj = run_episode(env, policy, LawSet{}, EpisodeParams{200, 5, 0});
    REQUIRE(traj.terminated == Termination::goal);

    std::vector<Trajectory> trajs{traj};
    BipartiteGraph g = build_graph(trajs, vocab());
    std::vector<int> dist = g.distances_to_goal();

    WorldState w = env.init(0);
    int remaining = static_cast<int>(traj.steps.size());
    for (const StepRecord& rec : traj.steps) {
        std::optional<int> idx = g.find_state(rec.state);
        REQUIRE(idx.has_value());
        int empirical = dist[static_cast<size_t>(*idx)];
        CHECK(empirical <= remaining);
        if (remaining <= 12) {  // cheap oracle queries near the goal
            std::optional<int> oracle = brute_force_optimal(env, w, remaining + 1);
            REQUIRE(oracle.has_value());
            CHECK(*oracle <= remaining);
        }
        StepResult r = env.step(w, vocab().action_index(*rec.executed));
        REQUIRE(r.ok());
        w = r.world;
        --remaining;
    }
}
