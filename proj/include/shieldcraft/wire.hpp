#pragma once

// External actor/critic wire protocol over line-delimited JSON. Two
// transports: a child process speaking on stdin/stdout, or a single HTTP
// endpoint. Request and response are one JSON object per line:
//   actor request:   {"step": int, "full_state": text,
//                     "abstract_state": {prop: bool}, "feedback": text|null,
//                     "allowed_actions": [names]|null}
//   actor response:  {"action": name}
//   critic request:  {"round": int, "laws": [law lines],
//                     "trajectories": [{seed, steps: [...]}]}
//   critic response: {"laws": [law texts]}

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "shieldcraft/critic.hpp"
#include "shieldcraft/policy.hpp"

namespace shieldcraft {

class WireTransport {
  public:
    virtual ~WireTransport() = default;
    virtual std::string round_trip(const std::string& request_line) = 0;
    virtual void restart() {}
};

/// Runs a shell command as a child process and exchanges one JSON line per
/// request on its stdin/stdout.
class StdioTransport : public WireTransport {
  public:
    explicit StdioTransport(std::string command, int timeout_ms = 5000)
        : command_(std::move(command)), timeout_ms_(timeout_ms) {}

    ~StdioTransport() override { shutdown(); }
    StdioTransport(const StdioTransport&) = delete;
    StdioTransport& operator=(const StdioTransport&) = delete;

    void restart() override {
        shutdown();
        spawn();
    }

    std::string round_trip(const std::string& request_line) override {
        if (pid_ < 0) spawn();
        std::string payload = request_line + "\n";
        size_t written = 0;
        while (written < payload.size()) {
            ssize_t n = ::write(to_child_, payload.data() + written, payload.size() - written);
            if (n <= 0) throw PolicyError("external process: write failed");
            written += static_cast<size_t>(n);
        }
        std::string line;
        while (true) {
            size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            struct pollfd pfd{from_child_, POLLIN, 0};
            int rc = ::poll(&pfd, 1, timeout_ms_);
            if (rc == 0) throw PolicyError("external process: response timed out");
            if (rc < 0) throw PolicyError("external process: poll failed");
            char chunk[4096];
            ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
            if (n <= 0) throw PolicyError("external process: closed its output");
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

  private:
    void spawn() {
        int to_pipe[2], from_pipe[2];
        if (::pipe(to_pipe) != 0 || ::pipe(from_pipe) != 0)
            throw PolicyError("external process: pipe failed");
        pid_ = ::fork();
        if (pid_ < 0) throw PolicyError("external process: fork failed");
        if (pid_ == 0) {
            ::dup2(to_pipe[0], STDIN_FILENO);
            ::dup2(from_pipe[1], STDOUT_FILENO);
            ::close(to_pipe[0]);
            ::close(to_pipe[1]);
            ::close(from_pipe[0]);
            ::close(from_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        ::close(to_pipe[0]);
        ::close(from_pipe[1]);
        to_child_ = to_pipe[1];
        from_child_ = from_pipe[0];
        buffer_.clear();
    }

    void shutdown() {
        if (pid_ < 0) return;
        ::close(to_child_);
        ::close(from_child_);
        ::kill(pid_, SIGTERM);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }

    std::string command_;
    int timeout_ms_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// An actor that delegates each decision over the wire.
class ExternalActorPolicy : public ActorPolicy {
  public:
    ExternalActorPolicy(std::shared_ptr<WireTransport> transport, bool expose_allowed = false)
        : transport_(std::move(transport)), expose_allowed_(expose_allowed) {}

    bool wants_allowed() const override { return expose_allowed_; }

    void reset(std::uint64_t) override { transport_->restart(); }

    std::optional<std::string> propose(const PolicyRequest& request) override {
        Json abstract = Json::object();
        for (int i = 0; i < request.vocab->num_observations(); ++i)
            abstract[request.vocab->observation(i).name] =
                request.state->bits[static_cast<size_t>(i)] != 0;
        Json j{{"step", request.step},
               {"full_state", request.full_state},
               {"abstract_state", abstract},
               {"feedback", request.feedback ? Json(*request.feedback) : Json(nullptr)},
               {"allowed_actions",
                expose_allowed_ && request.allowed ? Json(*request.allowed) : Json(nullptr)}};
        std::string reply = transport_->round_trip(j.dump());
        try {
            Json parsed = Json::parse(reply);
            return parsed.at("action").get<std::string>();
        } catch (const std::exception& e) {
            throw PolicyError(std::string("malformed external actor response: ") + e.what());
        }
    }

  private:
    std::shared_ptr<WireTransport> transport_;
    bool expose_allowed_;
};

/// An external critic reached over the same wire style; its proposals pass
/// through the standard grounding and feasibility gates in run_round.
class ExternalCritic : public CriticTransport {
  public:
    explicit ExternalCritic(std::shared_ptr<WireTransport> transport)
        : transport_(std::move(transport)) {}

    std::vector<std::string> propose_laws(std::span<const Trajectory> trajectories,
                                          const LawSet& laws, const Vocabulary&) override {
        Json law_lines = Json::array();
        for (const Law& law : laws.laws()) law_lines.push_back(format_law_line(law));
        Json trajs = Json::array();
        for (const Trajectory& traj : trajectories) {
            Json steps = Json::array();
            for (const StepRecord& rec : traj.steps) {
                steps.push_back(
                    Json{{"state", rec.state.to_string()},
                         {"executed", rec.executed ? Json(*rec.executed) : Json(nullptr)},
                         {"outcome", step_outcome_name(rec.outcome)},
                         {"error_precondition", rec.error_precondition
                                                    ? Json(*rec.error_precondition)
                                                    : Json(nullptr)},
                         {"post_state", rec.post_state.to_string()}});
            }
            trajs.push_back(Json{{"seed", traj.seed}, {"steps", steps}});
        }
        Json request{{"round", laws.round() + 1}, {"laws", law_lines}, {"trajectories", trajs}};
        transport_->restart();
        std::string reply = transport_->round_trip(request.dump());
        try {
            Json parsed = Json::parse(reply);
            return parsed.at("laws").get<std::vector<std::string>>();
        } catch (const std::exception& e) {
            throw CriticError(std::string("malformed external critic response: ") + e.what());
        }
    }

  private:
    std::shared_ptr<WireTransport> transport_;
};

}  // namespace shieldcraft
