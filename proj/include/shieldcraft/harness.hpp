#pragma once

#include <filesystem>
#include <fnmatch.h>

#include "shieldcraft/actor.hpp"
#include "shieldcraft/metrics.hpp"
#include "shieldcraft/oracle.hpp"
#include "shieldcraft/wire.hpp"
#include "shieldcraft/wire_http.hpp"

namespace shieldcraft {

namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    EnvConfig env;
    std::string vocab_path;  // empty: the bundled default vocabulary
    std::string policy = "scripted_greedy";
    std::string external_transport = "stdio";
    std::string external_cmd;
    std::string external_url;
    int external_timeout_ms = 5000;
    bool external_expose_allowed = false;
    std::string critic_external_cmd;
    std::vector<std::string> law_files;
    std::vector<std::uint64_t> seeds;
    int episodes = 0;  // when seeds are not given, seeds become 0..episodes-1
    int max_rounds = 1;
    int max_steps = 200;
    int retry_budget = 5;
    std::string output_dir = "out";
};

namespace detail {

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        size_t b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        size_t e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace detail

/// Plain-text key = value configuration, '#' comments. Unknown keys error.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            size_t z = s.find_last_not_of(" \t\r");
            return s.substr(a, z - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "policy") config.policy = value;
            else if (key == "vocab") config.vocab_path = value;
            else if (key == "deterministic") config.env.deterministic = detail::parse_bool(value, key);
            else if (key == "explore_success_prob") config.env.explore_success_prob = std::stod(value);
            else if (key == "resource_iron") config.env.iron_available = detail::parse_bool(value, key);
            else if (key == "resource_coal") config.env.coal_available = detail::parse_bool(value, key);
            else if (key == "resource_diamond") config.env.diamond_available = detail::parse_bool(value, key);
            else if (key == "laws") config.law_files = detail::split_list(value);
            else if (key == "seeds") {
                for (const std::string& s : detail::split_list(value))
                    config.seeds.push_back(std::stoull(s));
            }
            else if (key == "episodes") config.episodes = std::stoi(value);
            else if (key == "max_rounds") config.max_rounds = std::stoi(value);
            else if (key == "max_steps") config.max_steps = std::stoi(value);
            else if (key == "retry_budget") config.retry_budget = std::stoi(value);
            else if (key == "output_dir") config.output_dir = value;
            else if (key == "external_transport") config.external_transport = value;
            else if (key == "external_cmd") config.external_cmd = value;
            else if (key == "external_url") config.external_url = value;
            else if (key == "external_timeout_ms") config.external_timeout_ms = std::stoi(value);
            else if (key == "external_expose_allowed")
                config.external_expose_allowed = detail::parse_bool(value, key);
            else if (key == "critic_external_cmd") config.critic_external_cmd = value;
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    if (config.seeds.empty()) {
        int n = config.episodes > 0 ? config.episodes : 1;
        for (int i = 0; i < n; ++i) config.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (config.episodes == 0) config.episodes = static_cast<int>(config.seeds.size());
    if (config.episodes < 1) throw ConfigError("episodes must be >= 1");
    {
        std::set<std::uint64_t> distinct(config.seeds.begin(), config.seeds.end());
        if (distinct.size() != config.seeds.size()) throw ConfigError("seeds must be distinct");
    }
    if (config.env.explore_success_prob < 0.0 || config.env.explore_success_prob > 1.0)
        throw ConfigError("explore_success_prob must be within [0,1]");
    if (config.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    return config;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_text_file(path));
}

/// Expands a glob pattern ('*'/'?' in the final path component), a plain
/// file, or a directory (all *.jsonl inside). Results sort lexicographically.
inline std::vector<std::string> expand_logs_pattern(const std::string& pattern) {
    std::vector<std::string> out;
    fs::path p(pattern);
    if (fs::is_regular_file(p)) return {pattern};
    if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                out.push_back(entry.path().string());
        std::sort(out.begin(), out.end());
        return out;
    }
    fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    std::string name_pattern = p.filename().string();
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (::fnmatch(name_pattern.c_str(), entry.path().filename().string().c_str(), 0) == 0)
            out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Trajectory> load_trajectories(const std::vector<std::string>& paths) {
    std::vector<Trajectory> out;
    out.reserve(paths.size());
    for (const std::string& path : paths) out.push_back(load_trajectory(path));
    return out;
}

inline int infer_round_from_ids(const std::vector<Law>& laws) {
    int round = 0;
    for (const Law& law : laws) {
        round = std::max(round, law.created_round);
        if (law.id.size() > 1 && law.id[0] == 'r') {
            size_t underscore = law.id.find('_');
            if (underscore != std::string::npos && underscore > 1) {
                try {
                    round = std::max(round, std::stoi(law.id.substr(1, underscore - 1)));
                } catch (...) {
                }
            }
        }
    }
    return round;
}

inline LawSet load_law_set(const std::vector<std::string>& paths, const Vocabulary& vocab) {
    LawSet laws;
    for (const std::string& path : paths)
        for (Law& law : load_law_file(path, vocab)) laws.add(std::move(law));
    laws.set_round(infer_round_from_ids(laws.laws()));
    return laws;
}

struct Harness {
    ExperimentConfig config;
    Vocabulary vocab;
    std::ostream* out = nullptr;

    explicit Harness(ExperimentConfig cfg, std::ostream& output)
        : config(std::move(cfg)),
          vocab(config.vocab_path.empty() ? default_vocabulary()
                                          : load_vocabulary(read_text_file(config.vocab_path))),
          out(&output) {}

    std::unique_ptr<ActorPolicy> make_policy() const {
        if (config.policy == "external") {
            std::shared_ptr<WireTransport> transport;
            if (config.external_transport == "http") {
                if (config.external_url.empty()) throw ConfigError("external_url is required");
                transport = std::make_shared<HttpTransport>(config.external_url,
                                                            config.external_timeout_ms);
            } else if (config.external_transport == "stdio") {
                if (config.external_cmd.empty()) throw ConfigError("external_cmd is required");
                transport =
                    std::make_shared<StdioTransport>(config.external_cmd, config.external_timeout_ms);
            } else {
                throw ConfigError("external_transport must be 'stdio' or 'http'");
            }
            return std::make_unique<ExternalActorPolicy>(std::move(transport),
                                                         config.external_expose_allowed);
        }
        return make_builtin_policy(config.policy, vocab);
    }

    /// Runs episodes round by round, invoking the critic between rounds until
    /// a round adds no laws or max_rounds is reached. Writes per-episode logs,
    /// per-round law files and critic reports, and the final metrics report.
    int cmd_run() {
        Environment env(config.env, vocab);
        LawSet laws = load_law_set(config.law_files, vocab);
        std::unique_ptr<ActorPolicy> policy = make_policy();
        std::unique_ptr<ExternalCritic> external_critic;
        if (!config.critic_external_cmd.empty())
            external_critic = std::make_unique<ExternalCritic>(std::make_shared<StdioTransport>(
                config.critic_external_cmd, config.external_timeout_ms));

        fs::create_directories(config.output_dir);
        std::ostringstream report;
        for (int round = 0;; ++round) {
            fs::path round_dir = fs::path(config.output_dir) / ("round_" + std::to_string(round));
            fs::create_directories(round_dir);
            save_law_file(laws.laws(),
                          (fs::path(config.output_dir) / ("laws_round_" + std::to_string(round) + ".laws"))
                              .string());

            std::vector<Trajectory> trajectories;
            for (std::uint64_t seed : config.seeds) {
                EpisodeParams params;
                params.max_steps = config.max_steps;
                params.retry_budget = config.retry_budget;
                params.seed = seed;
                Trajectory traj = run_episode(env, *policy, laws, params);
                save_trajectory(traj,
                                (round_dir / ("episode_" + std::to_string(seed) + ".jsonl")).string());
                trajectories.push_back(std::move(traj));
            }

            MetricsReport metrics = compute_metrics(trajectories, vocab);
            report << "== round " << round << " ==\n";
            report << "active laws: " << laws.size() << " (" << laws.hard_count() << " hard)\n";
            report << render_metrics(metrics);

            if (round + 1 >= config.max_rounds) {
                report << "stopped: reached max_rounds (" << config.max_rounds << ")\n";
                break;
            }
            BipartiteGraph graph = build_graph(trajectories, vocab);
            auto [new_laws, critic_round] =
                run_round(trajectories, laws, graph, vocab, external_critic.get());
            std::ofstream critic_out(round_dir / "critic_report.txt");
            critic_out << render_round_report(critic_round, trajectories);
            if (critic_round.added.empty() && critic_round.edited_law_ids.empty()) {
                report << "stopped: stabilized after round " << round << " (critic added no laws)\n";
                break;
            }
            report << "critic round " << critic_round.round << ": added " << critic_round.added.size()
                   << " laws, edited " << critic_round.edited_law_ids.size() << "\n";
            laws = std::move(new_laws);
        }
        save_law_file(laws.laws(), (fs::path(config.output_dir) / "laws_final.laws").string());
        report << "step limit per episode: " << config.max_steps << "\n";

        std::ofstream report_file(fs::path(config.output_dir) / "report.txt", std::ios::binary);
        report_file << report.str();
        (*out) << report.str();
        return 0;
    }
};

/// Evaluates every law against every trajectory; non-zero exit on violation.
inline int cmd_verify(const std::string& law_path, const std::vector<std::string>& log_paths,
                      const Vocabulary& vocab, std::ostream& out) {
    std::vector<Law> laws = load_law_file(law_path, vocab);
    bool any_violation = false;
    for (const std::string& log_path : log_paths) {
        Trajectory traj = load_trajectory(log_path);
        std::vector<TraceStep> trace = traj.trace(vocab);
        for (const Law& law : laws) {
            TraceVerdict verdict = eval_trace(law, trace);
            if (verdict.satisfied) {
                out << log_path << ": " << law.id << ": satisfied\n";
            } else {
                out << log_path << ": " << law.id << ": violated at step "
                    << verdict.violation_step << "\n";
                any_violation = true;
            }
        }
    }
    return any_violation ? 1 : 0;
}

/// Offline induction: wraps one critic round over stored logs.
inline int cmd_induce(const std::string& laws_in, const std::string& logs_pattern,
                      const std::string& laws_out, const Vocabulary& vocab, std::ostream& out,
                      const std::string& report_path = {},
                      const std::string& critic_external_cmd = {}) {
    LawSet laws = load_law_set(laws_in.empty() ? std::vector<std::string>{}
                                               : std::vector<std::string>{laws_in},
                               vocab);
    std::vector<Trajectory> trajectories = load_trajectories(expand_logs_pattern(logs_pattern));
    BipartiteGraph graph = build_graph(trajectories, vocab);
    std::unique_ptr<ExternalCritic> external;
    if (!critic_external_cmd.empty())
        external = std::make_unique<ExternalCritic>(
            std::make_shared<StdioTransport>(critic_external_cmd));
    auto [new_laws, round] = run_round(trajectories, laws, graph, vocab, external.get());
    save_law_file(new_laws.laws(), laws_out);
    std::string report = render_round_report(round, trajectories);
    if (!report_path.empty()) {
        std::ofstream report_file(report_path, std::ios::binary);
        report_file << report;
    }
    out << report;
    return 0;
}

/// Graph inspection: DOT export, a distance table, and the pruning diff.
inline int cmd_graph(const std::string& logs_pattern, const std::string& laws_path,
                     const std::string& dot_path, const Vocabulary& vocab, std::ostream& out) {
    std::vector<Trajectory> trajectories = load_trajectories(expand_logs_pattern(logs_pattern));
    BipartiteGraph graph = build_graph(trajectories, vocab);
    BipartiteGraph final_graph = graph;
    if (!laws_path.empty()) {
        LawSet laws = load_law_set({laws_path}, vocab);
        final_graph = prune_graph(graph, laws, vocab);
        for (const BipartiteGraph::PairNode& node : graph.pairs()) {
            const AbstractState& s = graph.states()[static_cast<size_t>(node.state)];
            std::optional<int> target = final_graph.find_state(s);
            bool kept = false;
            if (target) {
                for (int pair_id : final_graph.choices(*target))
                    if (final_graph.pairs()[static_cast<size_t>(pair_id)].action == node.action)
                        kept = true;
            }
            if (!kept)
                out << "pruned: " << s.to_string() << " -> " << vocab.action(node.action).name
                    << "\n";
        }
    }
    if (!dot_path.empty()) {
        std::ofstream dot(dot_path, std::ios::binary);
        if (!dot) throw ConfigError("cannot write '" + dot_path + "'");
        dot << final_graph.to_dot(vocab);
    }
    std::vector<int> dist = final_graph.distances_to_goal();
    out << "distance table (" << final_graph.num_states() << " states, "
        << final_graph.num_pairs() << " pairs)\n";
    for (int i = 0; i < final_graph.num_states(); ++i) {
        out << final_graph.states()[static_cast<size_t>(i)].to_string() << "  ";
        if (dist[static_cast<size_t>(i)] == std::numeric_limits<int>::max())
            out << "unreachable\n";
        else
            out << dist[static_cast<size_t>(i)] << "\n";
    }
    return 0;
}

}  // namespace shieldcraft
