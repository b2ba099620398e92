#include "vsss/server.hpp"

#include <chrono>
#include <optional>

#include "net_util.hpp"
#include "vsss/error.hpp"
#include "vsss/protocol.hpp"

namespace vsss {

ServerEnvFactory make_default_env_factory() {
  return [](const std::map<std::string, std::string>& entries) {
    return Env(EnvConfig::from_flat_map(entries));
  };
}

EnvServer::EnvServer(ServerEnvFactory factory, const std::string& host, std::uint16_t port,
                     ServerLimits limits)
    : factory_(std::move(factory)), limits_(limits) {
  if (!factory_) throw ContractError("EnvServer: empty env factory");
  listen_fd_ = net::listen_tcp(host, port, limits_.backlog, port_);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

EnvServer::~EnvServer() { stop(); }

void EnvServer::stop() {
  bool expected = false;
  if (!stopped_.compare_exchange_strong(expected, true)) return;
  net::shutdown_fd(listen_fd_);
  net::close_fd(listen_fd_);
  listen_fd_ = -1;
  close_all_sessions();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    threads.swap(session_threads_);
  }
  for (std::thread& t : threads) {
    if (t.joinable()) t.join();
  }
}

void EnvServer::wait() {
  while (!stopped_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void EnvServer::close_all_sessions() {
  std::lock_guard lock(mutex_);
  for (int fd : session_fds_) net::shutdown_fd(fd);
}

void EnvServer::accept_loop() {
  while (!stopped_.load()) {
    const int fd = accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopped_.load()) break;
      continue;
    }
    if (limits_.idle_timeout_s > 0.0) net::set_io_timeout(fd, limits_.idle_timeout_s);
    const std::uint64_t session_no = next_session_.fetch_add(1);
    std::lock_guard lock(mutex_);
    session_fds_.push_back(fd);
    session_threads_.emplace_back([this, fd, session_no] { session_loop(fd, session_no); });
  }
}

void EnvServer::session_loop(int fd, std::uint64_t session_no) {
  const std::string session_id = "s" + std::to_string(session_no);
  std::optional<Env> env;
  std::uint64_t last_seq = 0;
  std::vector<std::uint8_t> payload;

  auto respond = [&](const ProtocolMessage& msg) { net::write_frame(fd, encode_frame(msg)); };

  try {
    while (!stopped_.load()) {
      if (!net::read_frame(fd, payload, limits_.max_payload)) break;  // orderly close
      ProtocolMessage req;
      try {
        req = decode_payload(
            std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()));
      } catch (const ProtocolError& e) {
        respond(make_error_response(0, session_id, e.code(), e.what()));
        break;  // malformed frame closes the session
      }

      if (req.seq <= last_seq) {
        respond(make_error_response(req.seq, session_id, proto_code::kSeqMismatch,
                                    "sequence numbers must be strictly increasing"));
        continue;
      }
      last_seq = req.seq;

      ProtocolMessage resp;
      resp.seq = req.seq;
      resp.session = session_id;
      try {
        switch (req.kind) {
          case MessageKind::kHello: {
            const int version = req.body.value("version", -1);
            if (version != kProtocolVersion) {
              resp = make_error_response(req.seq, session_id, proto_code::kBadConfig,
                                         "unsupported protocol version");
              break;
            }
            resp.kind = MessageKind::kHello;
            resp.body = {{"version", kProtocolVersion}};
            break;
          }
          case MessageKind::kReset: {
            std::map<std::string, std::string> entries;
            if (req.body.contains("config")) {
              for (const auto& [k, v] : req.body.at("config").items()) {
                if (!v.is_string()) {
                  throw ProtocolError(proto_code::kBadConfig, "config values must be strings");
                }
                entries[k] = v.get<std::string>();
              }
            }
            const auto seed = req.body.value("seed", std::uint64_t{0});
            try {
              env.emplace(factory_(entries));
            } catch (const ConfigError& e) {
              throw ProtocolError(proto_code::kBadConfig, e.what());
            }
            StepResult initial;
            initial.observation = env->reset(seed);
            resp.kind = MessageKind::kState;
            resp.body = step_result_to_json(initial);
            break;
          }
          case MessageKind::kStep: {
            if (!env) {
              throw ProtocolError(proto_code::kNoEpisode, "step before reset");
            }
            if (env->done()) {
              throw ProtocolError(proto_code::kEpisodeDone, "episode is done; reset first");
            }
            const Action action = action_from_json(req.body.at("action"));
            StepResult result;
            try {
              result = env->step(action);
            } catch (const ContractError& e) {
              throw ProtocolError(proto_code::kBadAction, e.what());
            }
            resp.kind = MessageKind::kState;
            resp.body = step_result_to_json(result);
            break;
          }
          case MessageKind::kBye: {
            resp.kind = MessageKind::kBye;
            respond(resp);
            return;
          }
          default:
            throw ProtocolError(proto_code::kMalformed, "unexpected message kind");
        }
      } catch (const ProtocolError& e) {
        resp = make_error_response(req.seq, session_id, e.code(), e.what());
      } catch (const nlohmann::json::exception& e) {
        resp = make_error_response(req.seq, session_id, proto_code::kMalformed, e.what());
      } catch (const std::exception& e) {
        resp = make_error_response(req.seq, session_id, proto_code::kInternal, e.what());
      }
      respond(resp);
    }
  } catch (const TransportError&) {
    // peer vanished or timed out; drop the session
  } catch (const ProtocolError&) {
    // oversized frame announcement; drop the session
  }
  net::close_fd(fd);
}

}  // namespace vsss
