// Command-line front end: run experiments, verify logs against laws, induce
// laws from logs, and export the task graph.

#include <CLI11.hpp>
#include <iostream>

#include "shieldcraft/harness.hpp"

namespace {

std::vector<std::string> expand_all(const std::vector<std::string>& patterns) {
    std::vector<std::string> out;
    for (const std::string& pattern : patterns) {
        std::vector<std::string> expanded = shieldcraft::expand_logs_pattern(pattern);
        if (expanded.empty())
            throw shieldcraft::ConfigError("no logs match '" + pattern + "'");
        out.insert(out.end(), expanded.begin(), expanded.end());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace shieldcraft;

    CLI::App app{"shieldcraft: LTL-shielded symbolic planning toolkit"};
    app.require_subcommand(1);

    std::string vocab_path;
    app.add_option("--vocab", vocab_path, "vocabulary file (default: bundled vocabulary)");

    auto* run = app.add_subcommand("run", "run episodes with offline critic rounds");
    std::string config_path;
    run->add_option("--config", config_path, "experiment config file")->required();
    long long seed_override = -1;
    run->add_option("--seed", seed_override, "override: run a single episode with this seed");
    bool force_deterministic = false, force_stochastic = false;
    run->add_flag("--deterministic", force_deterministic, "override: deterministic environment");
    run->add_flag("--stochastic", force_stochastic, "override: stochastic environment");

    auto* verify = app.add_subcommand("verify", "check trajectory logs against a law file");
    std::string verify_laws;
    std::vector<std::string> verify_logs;
    verify->add_option("--laws", verify_laws, "law file")->required();
    verify->add_option("--log", verify_logs, "trajectory log (repeatable; glob ok)")->required();

    auto* induce = app.add_subcommand("induce", "run one critic round over stored logs");
    std::string induce_laws, induce_logs, induce_out, induce_report, induce_critic_cmd;
    induce->add_option("--laws", induce_laws, "input law file (optional)");
    induce->add_option("--logs", induce_logs, "trajectory log glob")->required();
    induce->add_option("--out", induce_out, "output law file")->required();
    induce->add_option("--report", induce_report, "round report path");
    induce->add_option("--critic-cmd", induce_critic_cmd, "external critic command (stdio wire)");

    auto* graph = app.add_subcommand("graph", "export the empirical task graph");
    std::string graph_logs, graph_laws, graph_dot;
    graph->add_option("--logs", graph_logs, "trajectory log glob")->required();
    graph->add_option("--laws", graph_laws, "law file used to prune choice edges");
    graph->add_option("--dot", graph_dot, "DOT output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            ExperimentConfig config = load_experiment_config(config_path);
            if (!vocab_path.empty()) config.vocab_path = vocab_path;
            if (seed_override >= 0) config.seeds = {static_cast<std::uint64_t>(seed_override)};
            if (force_deterministic) config.env.deterministic = true;
            if (force_stochastic) config.env.deterministic = false;
            Harness harness(std::move(config), std::cout);
            return harness.cmd_run();
        }

        Vocabulary vocab = vocab_path.empty() ? default_vocabulary()
                                              : load_vocabulary(read_text_file(vocab_path));
        if (verify->parsed())
            return cmd_verify(verify_laws, expand_all(verify_logs), vocab, std::cout);
        if (induce->parsed())
            return cmd_induce(induce_laws, induce_logs, induce_out, vocab, std::cout,
                              induce_report, induce_critic_cmd);
        if (graph->parsed())
            return cmd_graph(graph_logs, graph_laws, graph_dot, vocab, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const VocabError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const LawError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
