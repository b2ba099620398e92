#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vsss/env.hpp"
#include "vsss/protocol.hpp"

namespace vsss {

struct ClientLimits {
  double connect_timeout_s = 5.0;
  double io_timeout_s = 10.0;
  std::size_t max_payload = 1 << 20;
};

// Blocking request/response client for the environment server. reset/step
// satisfy the same contract as the in-process environment; server-side
// rejections surface as ProtocolError (with the wire code) and socket
// failures as TransportError.
class EnvClient {
 public:
  EnvClient(const std::string& host, std::uint16_t port, ClientLimits limits = {});
  ~EnvClient();

  EnvClient(EnvClient&& other) noexcept;
  EnvClient& operator=(EnvClient&& other) noexcept;
  EnvClient(const EnvClient&) = delete;
  EnvClient& operator=(const EnvClient&) = delete;

  void hello();
  Observation reset(const std::map<std::string, std::string>& config, std::uint64_t seed);
  Observation reset(const EnvConfig& config, std::uint64_t seed);
  StepResult step(const Action& action);
  void bye();
  void close();

  const std::string& session() const { return session_; }

 private:
  ProtocolMessage request(MessageKind kind, nlohmann::json body);

  int fd_ = -1;
  std::uint64_t next_seq_ = 1;
  std::string session_;
  ClientLimits limits_;
};

}  // namespace vsss
