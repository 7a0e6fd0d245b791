#pragma once

#include <deque>
#include <limits>

#include "shieldcraft/trajectory.hpp"
#include "shieldcraft/world.hpp"

namespace shieldcraft {

struct GraphError : std::runtime_error {
    explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

/// Two-layer empirical task graph: abstract states on one side, observed
/// (state, action) pairs on the other. Choice edges go state -> pair, each
/// observed transition adds a pair -> successor edge.
class BipartiteGraph {
  public:
    struct PairNode {
        int state = -1;
        int action = -1;
        std::vector<int> successors;  // sorted, unique
    };

    int num_states() const { return static_cast<int>(states_.size()); }
    int num_pairs() const { return static_cast<int>(pairs_.size()); }

    const std::vector<AbstractState>& states() const { return states_; }
    const std::vector<PairNode>& pairs() const { return pairs_; }
    const std::vector<int>& choices(int state) const { return choice_[static_cast<size_t>(state)]; }
    bool is_goal_state(int state) const { return goal_[static_cast<size_t>(state)] != 0; }

    std::optional<int> find_state(const AbstractState& s) const {
        auto it = state_index_.find(s.to_string());
        if (it == state_index_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<int> goal_states() const {
        std::vector<int> out;
        for (int i = 0; i < num_states(); ++i)
            if (goal_[static_cast<size_t>(i)]) out.push_back(i);
        return out;
    }

    int add_state(const AbstractState& s, const Vocabulary& vocab) {
        std::string key = s.to_string();
        auto it = state_index_.find(key);
        if (it != state_index_.end()) return it->second;
        int idx = num_states();
        state_index_.emplace(std::move(key), idx);
        states_.push_back(s);
        choice_.emplace_back();
        goal_.push_back(is_goal(s, vocab) ? 1 : 0);
        return idx;
    }

    void add_transition(int state, int action, int successor) {
        auto key = std::make_pair(state, action);
        auto it = pair_index_.find(key);
        int pair_id;
        if (it == pair_index_.end()) {
            pair_id = num_pairs();
            pair_index_.emplace(key, pair_id);
            pairs_.push_back(PairNode{state, action, {}});
            choice_[static_cast<size_t>(state)].push_back(pair_id);
        } else {
            pair_id = it->second;
        }
        auto& succ = pairs_[static_cast<size_t>(pair_id)].successors;
        auto pos = std::lower_bound(succ.begin(), succ.end(), successor);
        if (pos == succ.end() || *pos != successor) succ.insert(pos, successor);
    }

    /// Hop distance where one state -> pair -> state traversal costs 1.
    /// Optimistic under stochasticity: any observed successor counts.
    std::vector<int> distances_to_goal() const {
        constexpr int kInf = std::numeric_limits<int>::max();
        std::vector<int> dist(static_cast<size_t>(num_states()), kInf);
        std::deque<int> queue;
        // Reverse adjacency: successor state -> pair ids that can reach it.
        std::vector<std::vector<int>> incoming(static_cast<size_t>(num_states()));
        for (int p = 0; p < num_pairs(); ++p)
            for (int s : pairs_[static_cast<size_t>(p)].successors)
                incoming[static_cast<size_t>(s)].push_back(p);
        for (int i = 0; i < num_states(); ++i) {
            if (goal_[static_cast<size_t>(i)]) {
                dist[static_cast<size_t>(i)] = 0;
                queue.push_back(i);
            }
        }
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            for (int p : incoming[static_cast<size_t>(s)]) {
                int origin = pairs_[static_cast<size_t>(p)].state;
                if (dist[static_cast<size_t>(origin)] != kInf) continue;
                dist[static_cast<size_t>(origin)] = dist[static_cast<size_t>(s)] + 1;
                queue.push_back(origin);
            }
        }
        return dist;
    }

    std::optional<int> distance_to_goal(const AbstractState& s) const {
        std::optional<int> idx = find_state(s);
        if (!idx) throw GraphError("state " + s.to_string() + " is not in the graph");
        int d = distances_to_goal()[static_cast<size_t>(*idx)];
        if (d == std::numeric_limits<int>::max()) return std::nullopt;
        return d;
    }

    /// DOT rendering; state labels list the true propositions.
    std::string to_dot(const Vocabulary& vocab) const {
        std::ostringstream out;
        out << "digraph task_graph {\n";
        out << "  rankdir=LR;\n";
        for (int i = 0; i < num_states(); ++i) {
            out << "  s" << i << " [shape=ellipse" << (goal_[static_cast<size_t>(i)] ? ", peripheries=2" : "")
                << ", label=\"" << state_label(states_[static_cast<size_t>(i)], vocab) << "\"];\n";
        }
        for (int p = 0; p < num_pairs(); ++p) {
            const PairNode& node = pairs_[static_cast<size_t>(p)];
            out << "  p" << p << " [shape=box, label=\""
                << vocab.action(node.action).name << "\"];\n";
        }
        for (int p = 0; p < num_pairs(); ++p) {
            const PairNode& node = pairs_[static_cast<size_t>(p)];
            out << "  s" << node.state << " -> p" << p << ";\n";
            for (int s : node.successors) out << "  p" << p << " -> s" << s << ";\n";
        }
        out << "}\n";
        return out.str();
    }

    static std::string state_label(const AbstractState& s, const Vocabulary& vocab) {
        std::string label;
        for (int i = 0; i < vocab.num_observations(); ++i) {
            if (!s.bits[static_cast<size_t>(i)]) continue;
            if (!label.empty()) label += "\\n";
            label += vocab.observation(i).name;
        }
        return label.empty() ? "(all false)" : label;
    }

  private:
    std::vector<AbstractState> states_;
    std::vector<PairNode> pairs_;
    std::vector<std::vector<int>> choice_;
    std::vector<char> goal_;
    std::map<std::string, int> state_index_;
    std::map<std::pair<int, int>, int> pair_index_;
};

/// Builds the empirical graph from trajectories: exactly the observed states,
/// pairs, and transitions; nothing is invented. Error steps leave the world
/// unchanged and contribute no transition, only their observed states.
inline BipartiteGraph build_graph(std::span<const Trajectory> trajectories, const Vocabulary& vocab) {
    BipartiteGraph g;
    for (const Trajectory& traj : trajectories) {
        for (const StepRecord& rec : traj.steps) {
            int pre = g.add_state(rec.state, vocab);
            if (rec.outcome != StepOutcome::ok || !rec.executed) continue;
            int post = g.add_state(rec.post_state, vocab);
            g.add_transition(pre, vocab.action_index(*rec.executed), post);
        }
    }
    return g;
}

/// Keeps a choice edge only when the shield allows its action in its state;
/// orphaned pairs and their transitions drop out.
inline BipartiteGraph prune_graph(const BipartiteGraph& g, const LawSet& laws, const Vocabulary& vocab) {
    BipartiteGraph pruned;
    for (int i = 0; i < g.num_states(); ++i) pruned.add_state(g.states()[static_cast<size_t>(i)], vocab);
    for (const BipartiteGraph::PairNode& node : g.pairs()) {
        const AbstractState& s = g.states()[static_cast<size_t>(node.state)];
        if (!check(s, ActionVector::one_hot(node.action, vocab.num_actions()), laws).allowed) continue;
        for (int succ : node.successors) pruned.add_transition(node.state, node.action, succ);
    }
    return pruned;
}

}  // namespace shieldcraft
