#include <catch2/catch_amalgamated.hpp>
#include <thread>

#include "helpers.hpp"
#include "shieldcraft/actor.hpp"
#include "shieldcraft/harness.hpp"

using namespace shieldcraft;

namespace {

const Vocabulary& vocab() { return default_vocabulary(); }

struct TempScript {
    fs::path path;
    explicit TempScript(const std::string& body) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("shieldcraft_stub_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
                ".py");
        std::ofstream out(path);
        out << body;
    }
    ~TempScript() {
        std::error_code ec;
        fs::remove(path, ec);
    }
    std::string command() const { return "python3 " + path.string(); }
};

// Replies action_mine_log only when the request carries the full documented
// schema; anything else answers with an out-of-alphabet action.
const char* kValidatingActor = R"PY(
import sys, json
for line in sys.stdin:
    req = json.loads(line)
    keys = {"step", "full_state", "abstract_state", "feedback", "allowed_actions"}
    ok = keys <= set(req) and isinstance(req["step"], int) and len(req["abstract_state"]) == 30
    print(json.dumps({"action": "action_mine_log" if ok else "action_fly"}), flush=True)
)PY";

}  // namespace

TEST_CASE("stdio external actor receives the documented request schema") {
    TempScript script(kValidatingActor);
    ExternalActorPolicy policy(std::make_shared<StdioTransport>(script.command(), 10000));
    Environment env(EnvConfig{}, vocab());
    Trajectory traj = run_episode(env, policy, LawSet{}, EpisodeParams{3, 5, 0});
    REQUIRE(traj.steps.size() == 3);
    for (const StepRecord& rec : traj.steps) {
        CHECK(rec.executed == "action_mine_log");
        CHECK(rec.outcome == StepOutcome::ok);
    }
}

TEST_CASE("external actor sees feedback text after an environment error") {
    TempScript script(R"PY(
import sys, json
for line in sys.stdin:
    req = json.loads(line)
    if req["feedback"] is None:
        print(json.dumps({"action": "action_craft_planks"}), flush=True)
    else:
        assert "environment error" in req["feedback"]
        print(json.dumps({"action": "action_mine_log"}), flush=True)
)PY");
    ExternalActorPolicy policy(std::make_shared<StdioTransport>(script.command(), 10000));
    Environment env(EnvConfig{}, vocab());
    Trajectory traj = run_episode(env, policy, LawSet{}, EpisodeParams{2, 5, 0});
    REQUIRE(traj.steps.size() == 2);
    CHECK(traj.steps[0].outcome == StepOutcome::env_error);
    CHECK(traj.steps[1].executed == "action_mine_log");
}

TEST_CASE("allowed_actions is null unless exposure is enabled") {
    const char* script_body = R"PY(
import sys, json
for line in sys.stdin:
    req = json.loads(line)
    if req["allowed_actions"] is None:
        print(json.dumps({"action": "action_mine_log"}), flush=True)
    else:
        print(json.dumps({"action": req["allowed_actions"][0]}), flush=True)
)PY";
    Environment env(EnvConfig{}, vocab());
    LawSet laws = test_helpers::load_fixture_set({"saycan_hard.laws", "saycan_soft.laws"});

    TempScript hidden(script_body);
    ExternalActorPolicy no_expose(std::make_shared<StdioTransport>(hidden.command(), 10000), false);
    Trajectory traj = run_episode(env, no_expose, laws, EpisodeParams{1, 5, 0});
    CHECK(traj.steps[0].executed == "action_mine_log");

    TempScript exposed(script_body);
    ExternalActorPolicy expose(std::make_shared<StdioTransport>(exposed.command(), 10000), true);
    Trajectory traj2 = run_episode(env, expose, laws, EpisodeParams{1, 5, 0});
    // The singleton allowed set at the start state is exactly mine_log.
    CHECK(traj2.steps[0].executed == "action_mine_log");
    CHECK(traj2.steps[0].proposals.size() == 1);
}

TEST_CASE("malformed responses and unknown actions are policy errors") {
    TempScript garbage(R"PY(
import sys
for line in sys.stdin:
    print("not json at all", flush=True)
)PY");
    Environment env(EnvConfig{}, vocab());
    ExternalActorPolicy policy(std::make_shared<StdioTransport>(garbage.command(), 10000));
    CHECK_THROWS_AS(run_episode(env, policy, LawSet{}, EpisodeParams{2, 5, 0}), PolicyError);

    TempScript stranger(R"PY(
import sys, json
for line in sys.stdin:
    print(json.dumps({"action": "action_fly"}), flush=True)
)PY");
    ExternalActorPolicy policy2(std::make_shared<StdioTransport>(stranger.command(), 10000));
    CHECK_THROWS_AS(run_episode(env, policy2, LawSet{}, EpisodeParams{2, 5, 0}), PolicyError);

    ExternalActorPolicy policy3(std::make_shared<StdioTransport>("false", 2000));
    CHECK_THROWS_AS(run_episode(env, policy3, LawSet{}, EpisodeParams{2, 5, 0}), PolicyError);
}

TEST_CASE("http external actor round-trips through a local endpoint") {
    httplib::Server server;
    server.Post("/act", [](const httplib::Request& req, httplib::Response& res) {
        Json request = Json::parse(req.body);
        REQUIRE(request.contains("abstract_state"));
        res.set_content(Json{{"action", "action_mine_log"}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    {
        ExternalActorPolicy policy(std::make_shared<HttpTransport>(
            "http://127.0.0.1:" + std::to_string(port) + "/act", 10000));
        Environment env(EnvConfig{}, vocab());
        Trajectory traj = run_episode(env, policy, LawSet{}, EpisodeParams{2, 5, 0});
        REQUIRE(traj.steps.size() == 2);
        CHECK(traj.steps[0].executed == "action_mine_log");
    }

    server.stop();
    server_thread.join();

    ExternalActorPolicy unreachable(
        std::make_shared<HttpTransport>("http://127.0.0.1:1/act", 500));
    Environment env(EnvConfig{}, vocab());
    CHECK_THROWS_AS(run_episode(env, unreachable, LawSet{}, EpisodeParams{1, 5, 0}), PolicyError);
}

TEST_CASE("external critic proposals pass through grounding and dedup gates") {
    // Proposes one grounded law, one duplicate of it, one ungrounded law, and
    // one malformed text; exactly one law should be added.
    TempScript critic_script(R"PY(
import sys, json
for line in sys.stdin:
    req = json.loads(line)
    assert "laws" in req and "trajectories" in req and "round" in req
    laws = [
        "G(!obs_iron_pickaxe_equipped -> X(!action_mine_diamond))",
        "G(!obs_iron_pickaxe_equipped -> X(!action_mine_diamond))",
        "G(obs_has_diamond -> X(!action_mine_log))",
        "G(this is not > a law",
    ]
    print(json.dumps({"laws": laws}), flush=True)
)PY");
    Environment env(EnvConfig{}, vocab());
    ScriptedGreedyPolicy actor(vocab());
    // One trivial non-goal trajectory: states never include a diamond.
    Trajectory traj = run_episode(env, actor, LawSet{}, EpisodeParams{5, 5, 0});
    std::vector<Trajectory> trajs{traj};
    BipartiteGraph graph = build_graph(trajs, vocab());

    ExternalCritic critic(std::make_shared<StdioTransport>(critic_script.command(), 10000));
    auto [laws, record] = run_round(trajs, LawSet{}, graph, vocab(), &critic);
    REQUIRE(record.added.size() == 1);
    CHECK(print_law(record.added[0]) ==
          "G(!obs_iron_pickaxe_equipped -> X(!action_mine_diamond))");
    CHECK(record.dropped_ungrounded >= 1);
    CHECK(record.dropped_duplicate >= 1);
}

TEST_CASE("harness builds external policies from config") {
    TempScript script(kValidatingActor);
    ExperimentConfig config = parse_experiment_config(
        "policy = external\n"
        "external_transport = stdio\n"
        "external_cmd = " + script.command() + "\n"
        "seeds = 0\n"
        "max_steps = 2\n"
        "output_dir = " + (fs::temp_directory_path() / "shieldcraft_wire_out").string() + "\n");
    std::ostringstream out;
    Harness harness(config, out);
    CHECK(harness.cmd_run() == 0);
    fs::remove_all(fs::temp_directory_path() / "shieldcraft_wire_out");

    ExperimentConfig bad = config;
    bad.external_cmd.clear();
    std::ostringstream out2;
    CHECK_THROWS_AS(Harness(bad, out2).make_policy(), ConfigError);
}
