#include "net_util.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include "vsss/error.hpp"
#include "vsss/protocol.hpp"

namespace vsss::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
    return addr;
  }
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve host: " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

}  // namespace

void set_io_timeout(int fd, double seconds) {
  timeval tv{};
  tv.tv_sec = static_cast<long>(seconds);
  tv.tv_usec = static_cast<long>((seconds - static_cast<double>(tv.tv_sec)) * 1e6);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

int connect_tcp(const std::string& host, std::uint16_t port, double timeout_s) {
  const sockaddr_in addr = resolve(host, port);
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  set_io_timeout(fd, timeout_s);
  if (connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int saved = errno;
    close(fd);
    errno = saved;
    throw_errno("connect to " + host + ":" + std::to_string(port));
  }
  int flag = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &flag, sizeof(flag));
  return fd;
}

int listen_tcp(const std::string& host, std::uint16_t port, int backlog,
               std::uint16_t& bound_port) {
  sockaddr_in addr = resolve(host, port);
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  int reuse = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));
  if (bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int saved = errno;
    close(fd);
    errno = saved;
    throw_errno("bind " + host + ":" + std::to_string(port));
  }
  if (listen(fd, backlog) != 0) {
    const int saved = errno;
    close(fd);
    errno = saved;
    throw_errno("listen");
  }
  sockaddr_in actual{};
  socklen_t len = sizeof(actual);
  if (getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len) != 0) {
    const int saved = errno;
    close(fd);
    errno = saved;
    throw_errno("getsockname");
  }
  bound_port = ntohs(actual.sin_port);
  return fd;
}

bool read_exact(int fd, void* buf, std::size_t n) {
  auto* p = static_cast<std::uint8_t*>(buf);
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = recv(fd, p + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw TransportError("peer closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("read timeout");
      throw_errno("recv");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, const void* buf, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(buf);
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t r = send(fd, p + sent, n - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("write timeout");
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(r);
  }
}

bool read_frame(int fd, std::vector<std::uint8_t>& payload, std::size_t max_payload) {
  std::uint8_t len_bytes[4];
  if (!read_exact(fd, len_bytes, 4)) return false;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
  if (len > max_payload) {
    throw ProtocolError(proto_code::kOversized,
                        "frame announces " + std::to_string(len) + " bytes");
  }
  payload.resize(len);
  if (len > 0 && !read_exact(fd, payload.data(), len)) {
    throw TransportError("peer closed mid-frame");
  }
  return true;
}

void write_frame(int fd, const std::vector<std::uint8_t>& frame) {
  write_all(fd, frame.data(), frame.size());
}

void close_fd(int fd) {
  if (fd >= 0) close(fd);
}

void shutdown_fd(int fd) {
  if (fd >= 0) shutdown(fd, SHUT_RDWR);
}

}  // namespace vsss::net
