#pragma once

// WebSocket transport for SessionCore. One simulation thread owns the core and
// paces it at the scenario rate; one I/O thread runs the sockets. They exchange
// immutable strings only.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "swarmguide/session.hpp"

namespace swarmguide {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::size_t client_queue_limit = 256;
  std::chrono::milliseconds heartbeat{1000};
};

struct ServerStats {
  long ticks = 0;
  long overruns = 0;
  long dropped_frames = 0;
  long clients = 0;
};

class SessionServer {
 public:
  SessionServer(SessionCore core, ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts both threads. Throws std::system_error if the port is unavailable.
  void start();
  /// Stops and joins; safe to call twice.
  void stop();

  [[nodiscard]] std::uint16_t port() const;
  [[nodiscard]] ServerStats stats() const;
  /// Only valid once stopped.
  [[nodiscard]] const SessionCore& core() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarmguide
