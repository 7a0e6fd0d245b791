#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace shieldcraft {

enum class PropKind { observation, action };

inline const char* prop_kind_name(PropKind k) {
    return k == PropKind::observation ? "observation" : "action";
}

struct VocabError : std::runtime_error {
    explicit VocabError(const std::string& what) : std::runtime_error(what) {}
};

/// One named boolean variable of the symbolic alphabet. Observation names
/// start with `obs_`, action names with `action_`; indices are dense per kind.
struct PropositionId {
    int index = -1;
    std::string name;
    PropKind kind = PropKind::observation;
};

using Bits = std::vector<char>;

/// Boolean valuation over all observation propositions.
struct AbstractState {
    Bits bits;

    bool operator==(const AbstractState& o) const { return bits == o.bits; }

    std::string to_string() const {
        std::string s(bits.size(), '0');
        for (size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) s[i] = '1';
        return s;
    }

    static AbstractState from_string(std::string_view s) {
        AbstractState st;
        st.bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw VocabError("bad state bit string");
            st.bits.push_back(c == '1');
        }
        return st;
    }
};

/// One-hot valuation over all action propositions.
struct ActionVector {
    Bits bits;

    static ActionVector one_hot(int index, int m) {
        if (index < 0 || index >= m) throw VocabError("action index out of range");
        ActionVector a;
        a.bits.assign(static_cast<size_t>(m), 0);
        a.bits[static_cast<size_t>(index)] = 1;
        return a;
    }

    int action_index() const {
        int found = -1;
        for (size_t i = 0; i < bits.size(); ++i) {
            if (!bits[i]) continue;
            if (found >= 0) throw VocabError("action vector is not one-hot");
            found = static_cast<int>(i);
        }
        if (found < 0) throw VocabError("action vector is not one-hot");
        return found;
    }

    bool is_one_hot() const {
        int count = 0;
        for (char b : bits) count += b ? 1 : 0;
        return count == 1;
    }

    bool operator==(const ActionVector& o) const { return bits == o.bits; }
};

/// The ordered registries of observation and action propositions.
class Vocabulary {
  public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> observation_names, std::vector<std::string> action_names) {
        if (observation_names.empty()) throw VocabError("empty [observations] section");
        if (action_names.empty()) throw VocabError("empty [actions] section");
        for (auto& n : observation_names) add(std::move(n), PropKind::observation);
        for (auto& n : action_names) add(std::move(n), PropKind::action);
    }

    int num_observations() const { return static_cast<int>(observations_.size()); }
    int num_actions() const { return static_cast<int>(actions_.size()); }

    const std::vector<PropositionId>& observations() const { return observations_; }
    const std::vector<PropositionId>& actions() const { return actions_; }

    const PropositionId& observation(int index) const { return observations_.at(static_cast<size_t>(index)); }
    const PropositionId& action(int index) const { return actions_.at(static_cast<size_t>(index)); }

    /// Looks a proposition up by name. Accepts the `wooden`/`wood` spelling
    /// variants that appear in the published law lists and normalizes them
    /// onto the registered name.
    const PropositionId* find(std::string_view name) const {
        if (const PropositionId* p = find_exact(name)) return p;
        std::string alias = swap_wood_alias(name);
        if (!alias.empty())
            if (const PropositionId* p = find_exact(alias)) return p;
        return nullptr;
    }

    const PropositionId& require(std::string_view name) const {
        const PropositionId* p = find(name);
        if (!p) throw VocabError("unknown proposition '" + std::string(name) + "'");
        return *p;
    }

    int observation_index(std::string_view name) const {
        const PropositionId& p = require(name);
        if (p.kind != PropKind::observation)
            throw VocabError("'" + std::string(name) + "' is not an observation proposition");
        return p.index;
    }

    int action_index(std::string_view name) const {
        const PropositionId& p = require(name);
        if (p.kind != PropKind::action)
            throw VocabError("'" + std::string(name) + "' is not an action proposition");
        return p.index;
    }

    AbstractState empty_state() const {
        AbstractState s;
        s.bits.assign(static_cast<size_t>(num_observations()), 0);
        return s;
    }

  private:
    void add(std::string name, PropKind kind) {
        const char* prefix = kind == PropKind::observation ? "obs_" : "action_";
        if (name.rfind(prefix, 0) != 0)
            throw VocabError("proposition '" + name + "' must start with '" + prefix + "' in the " +
                             prop_kind_name(kind) + " section");
        if (by_name_.count(name)) throw VocabError("duplicate proposition name '" + name + "'");
        auto& seq = kind == PropKind::observation ? observations_ : actions_;
        PropositionId id{static_cast<int>(seq.size()), std::move(name), kind};
        by_name_.emplace(id.name, std::pair<PropKind, int>(kind, id.index));
        seq.push_back(std::move(id));
    }

    const PropositionId* find_exact(std::string_view name) const {
        auto it = by_name_.find(std::string(name));
        if (it == by_name_.end()) return nullptr;
        const auto& [kind, index] = it->second;
        return kind == PropKind::observation ? &observations_[static_cast<size_t>(index)]
                                             : &actions_[static_cast<size_t>(index)];
    }

    static std::string swap_wood_alias(std::string_view name) {
        std::string s(name);
        size_t pos = s.find("wooden");
        if (pos != std::string::npos) return s.replace(pos, 6, "wood");
        pos = s.find("wood");
        if (pos != std::string::npos) return s.replace(pos, 4, "wooden");
        return {};
    }

    std::vector<PropositionId> observations_;
    std::vector<PropositionId> actions_;
    std::unordered_map<std::string, std::pair<PropKind, int>> by_name_;
};

/// Parses vocabulary file text: two sections headed `[observations]` and
/// `[actions]`, one identifier per line, `#` starts a comment.
inline Vocabulary load_vocabulary(const std::string& source) {
    std::vector<std::string> obs, act;
    std::vector<std::string>* current = nullptr;
    std::istringstream in(source);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        std::string tok = line.substr(b, e - b + 1);
        if (tok == "[observations]") {
            current = &obs;
        } else if (tok == "[actions]") {
            current = &act;
        } else if (tok.front() == '[') {
            throw VocabError("line " + std::to_string(lineno) + ": unknown section '" + tok + "'");
        } else {
            if (!current)
                throw VocabError("line " + std::to_string(lineno) + ": proposition outside any section");
            if (tok.find_first_of(" \t") != std::string::npos)
                throw VocabError("line " + std::to_string(lineno) + ": one identifier per line");
            current->push_back(tok);
        }
    }
    if (obs.empty()) throw VocabError("empty [observations] section");
    if (act.empty()) throw VocabError("empty [actions] section");
    return Vocabulary(std::move(obs), std::move(act));
}

/// Text of the bundled default vocabulary (30 observations, 20 actions).
/// `data/default.vocab` ships the same content; the two are kept in sync by test.
inline const char* default_vocabulary_text() {
    return R"([observations]
obs_has_log
obs_has_plank
obs_has_2x_plank
obs_has_3x_plank
obs_has_4x_plank
obs_has_11x_plank
obs_has_2x_stick
obs_has_3x_cobble
obs_has_8x_cobble
obs_has_11x_cobble
obs_has_wood_pickaxe
obs_has_stone_pickaxe
obs_has_iron_pickaxe
obs_has_diamond
obs_has_iron_ingot
obs_has_3x_iron_ingot
obs_has_1x_iron_ore
obs_has_2x_iron_ore
obs_has_3x_iron_ore
obs_has_crafting_table
obs_has_furnace
obs_has_fuel
obs_near_crafting_table
obs_near_furnace
obs_diamond_in_chunk
obs_iron_in_chunk
obs_coal_in_chunk
obs_iron_pickaxe_equipped
obs_stone_pickaxe_equipped
obs_wood_pickaxe_equipped

[actions]
action_mine_log
action_mine_stone
action_mine_iron_ore
action_mine_coal
action_mine_diamond
action_craft_planks
action_craft_stick
action_craft_wooden_pickaxe
action_craft_stone_pickaxe
action_craft_iron_pickaxe
action_craft_crafting_table
action_craft_furnace
action_smelt_iron
action_equip_wood_pickaxe
action_equip_stone_pickaxe
action_equip_iron_pickaxe
action_explore_general
action_explore_diamond_down
action_place_crafting_table
action_place_furnace
)";
}

inline const Vocabulary& default_vocabulary() {
    static const Vocabulary vocab = load_vocabulary(default_vocabulary_text());
    return vocab;
}

/// One-hot vector for a named action.
inline ActionVector action_from_name(std::string_view name, const Vocabulary& vocab) {
    const PropositionId* p = vocab.find(name);
    if (!p || p->kind != PropKind::action)
        throw VocabError("unknown action '" + std::string(name) + "'");
    return ActionVector::one_hot(p->index, vocab.num_actions());
}

}  // namespace shieldcraft
