#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "streamforge/config.hpp"

namespace streamforge {

/// One streaming session per TCP connection, speaking the framed wire
/// protocol. Per connection three workers run: the socket reader (frames ->
/// conditioning), the scheduler actor (the sole bank writer), and the socket
/// writer (emissions -> ChunkOut frames); bounded channels propagate
/// backpressure from the writer back to the reader.
class SessionServer {
 public:
  SessionServer(SessionConfig base_config, std::string host, std::uint16_t port);
  ~SessionServer();

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds, listens, and starts accepting; returns the bound port (useful
  /// with port 0).
  std::uint16_t start();
  void stop();

  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();
  void handle_connection(int fd);

  SessionConfig base_config_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::vector<std::thread> sessions_;
};

}  // namespace streamforge
