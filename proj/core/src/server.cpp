#include "streamforge/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <optional>

#include "streamforge/channel.hpp"
#include "streamforge/error.hpp"
#include "streamforge/log.hpp"
#include "streamforge/scheduler.hpp"
#include "streamforge/wire.hpp"

namespace streamforge {

namespace {

bool send_all(int fd, const std::vector<std::uint8_t>& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_frame(int fd, const WireFrame& frame) {
  return send_all(fd, encode_frame(frame));
}

WireFrame end_frame(const std::string& reason = {}) {
  WireFrame frame;
  frame.type = FrameType::kEnd;
  frame.payload.assign(reason.begin(), reason.end());
  return frame;
}

// Accumulates socket bytes and yields whole frames. Returns nullopt on
// disconnect; protocol errors are reported through `error`.
class FrameReader {
 public:
  explicit FrameReader(int fd) : fd_(fd) {}

  std::optional<WireFrame> next(std::string* error) {
    for (;;) {
      const DecodeOutcome outcome = decode_frame(std::span<const std::uint8_t>(buffer_));
      if (outcome.status == DecodeOutcome::Status::kFrame) {
        buffer_.erase(buffer_.begin(),
                      buffer_.begin() + static_cast<std::ptrdiff_t>(outcome.consumed));
        return outcome.frame;
      }
      if (outcome.status == DecodeOutcome::Status::kError) {
        if (error != nullptr) *error = outcome.error.message;
        return std::nullopt;
      }
      std::uint8_t chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) return std::nullopt;
      buffer_.insert(buffer_.end(), chunk, chunk + n);
    }
  }

 private:
  int fd_;
  std::vector<std::uint8_t> buffer_;
};

}  // namespace

SessionServer::SessionServer(SessionConfig base_config, std::string host,
                             std::uint16_t port)
    : base_config_(std::move(base_config)), host_(std::move(host)), port_(port) {}

SessionServer::~SessionServer() { stop(); }

std::uint16_t SessionServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    raise(ErrorKind::kProtocol, "socket() failed");
  }
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    raise(ErrorKind::kProtocol, "bad listen address: " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    raise(ErrorKind::kProtocol, "bind failed on " + host_ + ":" + std::to_string(port_));
  }
  if (::listen(listen_fd_, 8) != 0) {
    raise(ErrorKind::kProtocol, "listen failed");
  }

  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  log_info("listening on " + host_ + ":" + std::to_string(port_));
  return port_;
}

void SessionServer::stop() {
  const bool was_running = running_.exchange(false);
  if (was_running && listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& session : sessions_) {
    if (session.joinable()) session.join();
  }
  sessions_.clear();
}

void SessionServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (running_) log_warn("accept failed");
      break;
    }
    sessions_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void SessionServer::handle_connection(int fd) {
  FrameReader reader(fd);
  std::string read_error;

  // Handshake: the first frame must be Hello, optionally carrying config
  // overrides in the flat key = value format. The reply echoes the resolved
  // session config.
  const auto hello = reader.next(&read_error);
  if (!hello.has_value() || hello->type != FrameType::kHello) {
    send_frame(fd, end_frame(read_error.empty() ? "expected hello frame"
                                                : "protocol error: " + read_error));
    ::close(fd);
    return;
  }

  SessionConfig config;
  try {
    const std::string overrides(hello->payload.begin(), hello->payload.end());
    config = validate_config(parse_config(overrides, base_config_));
  } catch (const Error& e) {
    send_frame(fd, end_frame(e.what()));
    ::close(fd);
    return;
  }

  WireFrame hello_reply;
  hello_reply.type = FrameType::kHello;
  const std::string rendered = render_config(config);
  hello_reply.payload.assign(rendered.begin(), rendered.end());
  if (!send_frame(fd, hello_reply)) {
    ::close(fd);
    return;
  }

  const Latent reference = make_reference_latent(config);
  StreamingConditionSource conds(config, latent_digest(reference));
  BoundedChannel<WireFrame> out_channel(8);

  // Scheduler actor: the sole MemoryBank writer. Emissions flow through the
  // bounded channel; a full channel pauses ticking until the writer drains.
  std::thread scheduler_thread([&] {
    try {
      ToyFlowModel engine(NoiseLadder(config.stream_chunks, config.micro_steps),
                          config.latent_dim, config.rng_seed);
      SimClock clock;
      const auto result = run_session(
          config, reference, conds, engine, clock, nullptr,
          [&](const EmissionRecord& record, const Chunk& chunk) {
            ChunkOutPayload payload;
            payload.chunk_id = static_cast<std::uint64_t>(record.chunk_id);
            payload.video_pts_start = record.video_pts_start;
            payload.video_pts_end = record.video_pts_end;
            payload.emit_timestamp = record.wall_time_emitted;
            payload.latent_values.reserve(chunk.latents.size() *
                                          static_cast<std::size_t>(config.latent_dim));
            for (const auto& latent : chunk.latents) {
              for (const double x : latent.data) {
                payload.latent_values.push_back(static_cast<float>(x));
              }
            }
            WireFrame frame;
            frame.type = FrameType::kChunkOut;
            frame.payload = encode_chunk_out_payload(payload);
            out_channel.push(std::move(frame));
          });

      WireFrame metrics;
      metrics.type = FrameType::kMetrics;
      const std::string body =
          metrics_json(session_metrics(result.records, chunk_duration(config)));
      metrics.payload.assign(body.begin(), body.end());
      out_channel.push(std::move(metrics));
      out_channel.push(end_frame());
    } catch (const std::exception& e) {
      log_error(std::string("session failed: ") + e.what());
      out_channel.push(end_frame(std::string("session failed: ") + e.what()));
    }
    out_channel.close();
  });

  // Socket writer: the only thread writing after the handshake. Keeps
  // draining the channel after a send failure so the scheduler never blocks.
  std::thread writer_thread([&] {
    bool socket_ok = true;
    while (auto frame = out_channel.pop()) {
      if (socket_ok) socket_ok = send_frame(fd, *frame);
    }
  });

  // Reader loop: conditioning frames until End or disconnect.
  for (;;) {
    read_error.clear();
    const auto frame = reader.next(&read_error);
    if (!frame.has_value()) {
      if (!read_error.empty()) {
        out_channel.push(end_frame("protocol error: " + read_error));
        out_channel.close();
      }
      conds.abort();
      break;
    }
    bool done = false;
    try {
      switch (frame->type) {
        case FrameType::kAudio: {
          const AudioPayload audio = parse_audio_payload(frame->payload);
          conds.push_audio(audio.pts, audio.samples);
          break;
        }
        case FrameType::kPrompt: {
          const PromptPayload prompt = parse_prompt_payload(frame->payload);
          conds.push_prompt(prompt.pts, prompt.text);
          break;
        }
        case FrameType::kEnd:
          conds.finish();
          done = true;
          break;
        default:
          out_channel.push(end_frame("unexpected frame type in session"));
          out_channel.close();
          conds.abort();
          done = true;
          break;
      }
    } catch (const Error& e) {
      out_channel.push(end_frame(e.what()));
      out_channel.close();
      conds.abort();
      done = true;
    }
    if (done) break;
  }

  scheduler_thread.join();
  writer_thread.join();
  ::close(fd);
}

}  // namespace streamforge
