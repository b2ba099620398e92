#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vsss::net {

// Thin POSIX socket helpers shared by the env server and client. All blocking
// calls honor the socket's SO_RCVTIMEO/SO_SNDTIMEO.

void set_io_timeout(int fd, double seconds);  // 0 disables

// Throws TransportError on connect failure/timeout.
int connect_tcp(const std::string& host, std::uint16_t port, double timeout_s);

// Binds and listens; returns fd and writes back the actual port (for port 0).
int listen_tcp(const std::string& host, std::uint16_t port, int backlog,
               std::uint16_t& bound_port);

// false on orderly peer close before any byte; throws TransportError on
// timeout or socket error; true when `n` bytes arrived.
bool read_exact(int fd, void* buf, std::size_t n);

void write_all(int fd, const void* buf, std::size_t n);  // throws TransportError

// Reads one length-prefixed frame; false on orderly close at a frame
// boundary. Oversized announcements throw ProtocolError.
bool read_frame(int fd, std::vector<std::uint8_t>& payload, std::size_t max_payload);

void write_frame(int fd, const std::vector<std::uint8_t>& frame);

void close_fd(int fd);
void shutdown_fd(int fd);

}  // namespace vsss::net
