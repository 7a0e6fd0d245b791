#pragma once

#include <httplib.h>

#include "shieldcraft/wire.hpp"

namespace shieldcraft {

/// Posts each request line to a single HTTP endpoint; the response body is
/// the reply line.
class HttpTransport : public WireTransport {
  public:
    explicit HttpTransport(const std::string& url, int timeout_ms = 5000) {
        std::string rest = url;
        if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
        size_t slash = rest.find('/');
        host_ = slash == std::string::npos ? rest : rest.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
        timeout_ms_ = timeout_ms;
    }

    std::string round_trip(const std::string& request_line) override {
        httplib::Client client(host_);
        client.set_connection_timeout(0, timeout_ms_ * 1000);
        client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        auto res = client.Post(path_, request_line, "application/json");
        if (!res) throw PolicyError("external endpoint '" + host_ + path_ + "' unreachable");
        if (res->status != 200)
            throw PolicyError("external endpoint returned status " + std::to_string(res->status));
        return res->body;
    }

  private:
    std::string host_;
    std::string path_;
    int timeout_ms_ = 5000;
};

}  // namespace shieldcraft
