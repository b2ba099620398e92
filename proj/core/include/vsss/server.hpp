#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "vsss/env.hpp"

namespace vsss {

struct ServerLimits {
  std::size_t max_payload = 1 << 20;
  double idle_timeout_s = 30.0;  // 0 disables the idle timeout
  int backlog = 16;
};

// Builds the per-session environment from the flat config map sent in reset.
using ServerEnvFactory = std::function<Env(const std::map<std::string, std::string>&)>;

ServerEnvFactory make_default_env_factory();

// TCP environment server: one session (and one environment) per connection,
// request/response only. Sessions run on their own threads and never share
// state, so per-session trajectories stay deterministic under concurrency.
class EnvServer {
 public:
  EnvServer(ServerEnvFactory factory, const std::string& host, std::uint16_t port,
            ServerLimits limits = {});
  ~EnvServer();

  EnvServer(const EnvServer&) = delete;
  EnvServer& operator=(const EnvServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  bool running() const { return !stopped_.load(); }
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  void accept_loop();
  void session_loop(int fd, std::uint64_t session_no);
  void close_all_sessions();

  ServerEnvFactory factory_;
  ServerLimits limits_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopped_{false};
  std::atomic<std::uint64_t> next_session_{1};
  std::thread accept_thread_;
  std::mutex mutex_;
  std::vector<std::thread> session_threads_;
  std::vector<int> session_fds_;
};

}  // namespace vsss
