#pragma once

#include <json.hpp>

#include "shieldcraft/shield.hpp"

namespace shieldcraft {

using Json = nlohmann::ordered_json;

inline constexpr int kTrajectorySchemaVersion = 1;

struct TrajectoryError : std::runtime_error {
    explicit TrajectoryError(const std::string& what) : std::runtime_error(what) {}
};

struct ProposalRecord {
    std::string action;
    bool allowed = false;
    std::vector<std::string> violated_law_ids;
};

enum class StepOutcome { ok, env_error, shield_blocked_exhausted };

inline const char* step_outcome_name(StepOutcome o) {
    switch (o) {
        case StepOutcome::ok: return "ok";
        case StepOutcome::env_error: return "env_error";
        case StepOutcome::shield_blocked_exhausted: return "shield_blocked_exhausted";
    }
    return "?";
}

inline StepOutcome step_outcome_from_name(std::string_view name) {
    if (name == "ok") return StepOutcome::ok;
    if (name == "env_error") return StepOutcome::env_error;
    if (name == "shield_blocked_exhausted") return StepOutcome::shield_blocked_exhausted;
    throw TrajectoryError("unknown step outcome '" + std::string(name) + "'");
}

struct StepRecord {
    int step = 0;  // 1-based
    AbstractState state;
    std::string full_state;
    std::vector<ProposalRecord> proposals;
    std::optional<std::string> executed;
    StepOutcome outcome = StepOutcome::ok;
    std::optional<std::string> error_precondition;  // printed formula, env_error only
    std::optional<std::string> error_message;
    bool used_fallback = false;
    std::optional<OverconstraintReport> overconstraint;
    AbstractState post_state;
};

enum class Termination { goal, step_limit, deadlock };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::goal: return "goal";
        case Termination::step_limit: return "step_limit";
        case Termination::deadlock: return "deadlock";
    }
    return "?";
}

inline Termination termination_from_name(std::string_view name) {
    if (name == "goal") return Termination::goal;
    if (name == "step_limit") return Termination::step_limit;
    if (name == "deadlock") return Termination::deadlock;
    throw TrajectoryError("unknown termination '" + std::string(name) + "'");
}

struct Trajectory {
    std::uint64_t seed = 0;
    int law_round = 0;
    std::vector<StepRecord> steps;
    Termination terminated = Termination::step_limit;

    /// The (s_i, a_i) pairs of executed steps, as consumed by eval_trace.
    std::vector<TraceStep> trace(const Vocabulary& vocab) const {
        std::vector<TraceStep> out;
        for (const StepRecord& rec : steps) {
            if (!rec.executed) continue;
            out.push_back(TraceStep{rec.state, action_from_name(*rec.executed, vocab)});
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Line-delimited JSON serialization: a header line, one line per step, and a
// trailing summary line.

inline Json to_json(const OverconstraintReport& r) {
    Json counts = Json::object();
    for (const auto& [id, n] : r.blocking_counts) counts[id] = n;
    return Json{{"state", r.state.to_string()},
                {"blocked_all", r.blocked_all},
                {"blocking_counts", counts},
                {"most_constraining", r.most_constraining}};
}

inline OverconstraintReport overconstraint_from_json(const Json& j) {
    OverconstraintReport r;
    r.state = AbstractState::from_string(j.at("state").get<std::string>());
    r.blocked_all = j.at("blocked_all").get<bool>();
    for (const auto& [id, n] : j.at("blocking_counts").items())
        r.blocking_counts[id] = n.get<int>();
    r.most_constraining = j.at("most_constraining").get<std::vector<std::string>>();
    return r;
}

inline void write_trajectory(const Trajectory& traj, std::ostream& out) {
    Json header{{"type", "header"},
                {"version", kTrajectorySchemaVersion},
                {"seed", traj.seed},
                {"law_round", traj.law_round}};
    out << header.dump() << "\n";
    for (const StepRecord& rec : traj.steps) {
        Json proposals = Json::array();
        for (const ProposalRecord& p : rec.proposals)
            proposals.push_back(Json{{"action", p.action},
                                     {"allowed", p.allowed},
                                     {"violated", p.violated_law_ids}});
        Json line{{"type", "step"},
                  {"step", rec.step},
                  {"state", rec.state.to_string()},
                  {"full_state", rec.full_state},
                  {"proposals", proposals},
                  {"executed", rec.executed ? Json(*rec.executed) : Json(nullptr)},
                  {"outcome", step_outcome_name(rec.outcome)},
                  {"error_precondition",
                   rec.error_precondition ? Json(*rec.error_precondition) : Json(nullptr)},
                  {"error_message", rec.error_message ? Json(*rec.error_message) : Json(nullptr)},
                  {"used_fallback", rec.used_fallback},
                  {"overconstraint",
                   rec.overconstraint ? to_json(*rec.overconstraint) : Json(nullptr)},
                  {"post_state", rec.post_state.to_string()}};
        out << line.dump() << "\n";
    }
    Json summary{{"type", "end"},
                 {"terminated", termination_name(traj.terminated)},
                 {"steps", traj.steps.size()}};
    out << summary.dump() << "\n";
}

inline std::string trajectory_to_string(const Trajectory& traj) {
    std::ostringstream out;
    write_trajectory(traj, out);
    return out.str();
}

inline Trajectory read_trajectory(std::istream& in) {
    Trajectory traj;
    std::string line;
    bool saw_header = false, saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        std::string type = j.at("type").get<std::string>();
        if (type == "header") {
            traj.seed = j.at("seed").get<std::uint64_t>();
            traj.law_round = j.at("law_round").get<int>();
            saw_header = true;
        } else if (type == "step") {
            StepRecord rec;
            rec.step = j.at("step").get<int>();
            rec.state = AbstractState::from_string(j.at("state").get<std::string>());
            rec.full_state = j.at("full_state").get<std::string>();
            for (const Json& p : j.at("proposals")) {
                ProposalRecord pr;
                pr.action = p.at("action").get<std::string>();
                pr.allowed = p.at("allowed").get<bool>();
                pr.violated_law_ids = p.at("violated").get<std::vector<std::string>>();
                rec.proposals.push_back(std::move(pr));
            }
            if (!j.at("executed").is_null()) rec.executed = j.at("executed").get<std::string>();
            rec.outcome = step_outcome_from_name(j.at("outcome").get<std::string>());
            if (!j.at("error_precondition").is_null())
                rec.error_precondition = j.at("error_precondition").get<std::string>();
            if (!j.at("error_message").is_null())
                rec.error_message = j.at("error_message").get<std::string>();
            rec.used_fallback = j.at("used_fallback").get<bool>();
            if (!j.at("overconstraint").is_null())
                rec.overconstraint = overconstraint_from_json(j.at("overconstraint"));
            rec.post_state = AbstractState::from_string(j.at("post_state").get<std::string>());
            traj.steps.push_back(std::move(rec));
        } else if (type == "end") {
            traj.terminated = termination_from_name(j.at("terminated").get<std::string>());
            saw_end = true;
        } else {
            throw TrajectoryError("unknown record type '" + type + "'");
        }
    }
    if (!saw_header || !saw_end) throw TrajectoryError("truncated trajectory log");
    return traj;
}

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TrajectoryError("cannot write trajectory log '" + path + "'");
    write_trajectory(traj, out);
}

inline Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TrajectoryError("cannot open trajectory log '" + path + "'");
    try {
        return read_trajectory(in);
    } catch (const std::exception& e) {
        throw TrajectoryError("in '" + path + "': " + e.what());
    }
}

}  // namespace shieldcraft
