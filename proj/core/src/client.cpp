#include "vsss/client.hpp"

#include <utility>

#include "net_util.hpp"
#include "vsss/error.hpp"

namespace vsss {

EnvClient::EnvClient(const std::string& host, std::uint16_t port, ClientLimits limits)
    : limits_(limits) {
  fd_ = net::connect_tcp(host, port, limits_.connect_timeout_s);
  net::set_io_timeout(fd_, limits_.io_timeout_s);
}

EnvClient::~EnvClient() { close(); }

EnvClient::EnvClient(EnvClient&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      next_seq_(other.next_seq_),
      session_(std::move(other.session_)),
      limits_(other.limits_) {}

EnvClient& EnvClient::operator=(EnvClient&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    next_seq_ = other.next_seq_;
    session_ = std::move(other.session_);
    limits_ = other.limits_;
  }
  return *this;
}

void EnvClient::close() {
  if (fd_ >= 0) {
    net::close_fd(fd_);
    fd_ = -1;
  }
}

ProtocolMessage EnvClient::request(MessageKind kind, nlohmann::json body) {
  if (fd_ < 0) throw TransportError("client connection is closed");
  ProtocolMessage req;
  req.kind = kind;
  req.seq = next_seq_++;
  req.session = session_;
  req.body = std::move(body);
  net::write_frame(fd_, encode_frame(req));

  std::vector<std::uint8_t> payload;
  if (!net::read_frame(fd_, payload, limits_.max_payload)) {
    throw TransportError("server closed the connection");
  }
  ProtocolMessage resp = decode_payload(
      std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()));
  if (resp.seq != req.seq) {
    throw ProtocolError(proto_code::kSeqMismatch,
                        "response seq " + std::to_string(resp.seq) + " != request seq " +
                            std::to_string(req.seq));
  }
  session_ = resp.session;
  if (resp.kind == MessageKind::kError) {
    throw ProtocolError(resp.body.value("code", std::string(proto_code::kInternal)),
                        resp.body.value("message", "server error"));
  }
  return resp;
}

void EnvClient::hello() {
  const ProtocolMessage resp = request(MessageKind::kHello, {{"version", kProtocolVersion}});
  if (resp.kind != MessageKind::kHello) {
    throw ProtocolError(proto_code::kMalformed, "expected hello response");
  }
}

Observation EnvClient::reset(const std::map<std::string, std::string>& config,
                             std::uint64_t seed) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  const ProtocolMessage resp =
      request(MessageKind::kReset, {{"config", cfg}, {"seed", seed}});
  if (resp.kind != MessageKind::kState) {
    throw ProtocolError(proto_code::kMalformed, "expected state response to reset");
  }
  return step_result_from_json(resp.body).observation;
}

Observation EnvClient::reset(const EnvConfig& config, std::uint64_t seed) {
  return reset(config.to_flat_map(), seed);
}

StepResult EnvClient::step(const Action& action) {
  const ProtocolMessage resp = request(MessageKind::kStep, {{"action", action_to_json(action)}});
  if (resp.kind != MessageKind::kState) {
    throw ProtocolError(proto_code::kMalformed, "expected state response to step");
  }
  return step_result_from_json(resp.body);
}

void EnvClient::bye() {
  const ProtocolMessage resp = request(MessageKind::kBye, nlohmann::json::object());
  if (resp.kind != MessageKind::kBye) {
    throw ProtocolError(proto_code::kMalformed, "expected bye response");
  }
  close();
}

}  // namespace vsss
