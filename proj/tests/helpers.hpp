#pragma once

#include <random>
#include <string>

#include "shieldcraft/law.hpp"
#include "shieldcraft/shield.hpp"

namespace test_helpers {

inline std::string data_path(const std::string& name) {
    return std::string(SHIELDCRAFT_DATA_DIR) + "/" + name;
}

inline shieldcraft::LawSet load_fixture_set(std::initializer_list<const char*> names) {
    shieldcraft::LawSet set;
    for (const char* name : names)
        for (shieldcraft::Law& law :
             shieldcraft::load_law_file(data_path(name), shieldcraft::default_vocabulary()))
            set.add(std::move(law));
    return set;
}

inline shieldcraft::AbstractState random_state(std::mt19937& rng, int n) {
    shieldcraft::AbstractState s;
    s.bits.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) s.bits.push_back((rng() & 1) != 0);
    return s;
}

/// Independent brute-force filter: evaluates every shield-form law against
/// every action directly, with no shortcuts shared with the implementation.
inline std::vector<int> brute_force_allowed(const shieldcraft::AbstractState& state,
                                            const shieldcraft::LawSet& laws, int num_actions) {
    std::vector<int> allowed;
    for (int a = 0; a < num_actions; ++a) {
        shieldcraft::ActionVector vec = shieldcraft::ActionVector::one_hot(a, num_actions);
        bool ok = true;
        for (const shieldcraft::Law& law : laws.laws()) {
            const shieldcraft::ShieldForm* sf = law.shield_form();
            if (!sf) continue;
            if (shieldcraft::eval_prop(*sf->condition, state) &&
                !shieldcraft::eval_prop(*sf->action, vec)) {
                ok = false;
                break;
            }
        }
        if (ok) allowed.push_back(a);
    }
    return allowed;
}

}  // namespace test_helpers
