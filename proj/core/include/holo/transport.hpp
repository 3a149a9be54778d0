#pragma once

// Ordered, reliable byte streams: an in-memory pair for tests and TCP for
// loopback integration. Failures surface as holo::Error("transport.*").

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "holo/proto.hpp"

namespace holo::transport {

class Stream {
 public:
  virtual ~Stream() = default;

  /// Blocks until every byte is written. Throws transport.closed.
  virtual void write_all(std::span<const std::uint8_t> data) = 0;
  /// Blocks until `out` is filled. Throws transport.closed on EOF.
  virtual void read_exact(std::span<std::uint8_t> out) = 0;
  /// Idempotent; wakes any reader blocked on either end.
  virtual void close() = 0;
};

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_memory_pair();

class TcpListener {
 public:
  /// Binds 127.0.0.1:`port`; port 0 picks a free one.
  explicit TcpListener(std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Returns nullptr when no client arrives before the timeout.
  std::unique_ptr<Stream> accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Connects, retrying until `timeout` elapses (server may start later).
std::unique_ptr<Stream> tcp_connect(const std::string& host, std::uint16_t port,
                                    std::chrono::milliseconds timeout);

void send_message(Stream& s, const proto::Message& msg);
/// Reads one full frame and decodes it.
proto::Message receive_message(Stream& s);

}  // namespace holo::transport
