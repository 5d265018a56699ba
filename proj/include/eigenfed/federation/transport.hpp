#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eigenfed/federation/wire.hpp"

namespace eigenfed::federation {

using Clock = std::chrono::steady_clock;
using Deadline = Clock::time_point;

/// One endpoint of a bidirectional, frame-oriented link. Every byte handed to
/// send() is added to the counter of the side that owns the endpoint.
class Channel {
public:
  explicit Channel(std::atomic<std::uint64_t> *sent_counter)
      : sent_counter_(sent_counter) {}
  virtual ~Channel() = default;

  Channel(const Channel &) = delete;
  Channel &operator=(const Channel &) = delete;

  /// Sends one encoded frame. Throws TransportError when the link is down.
  void send(const Bytes &frame) {
    do_send(frame);
    if (sent_counter_)
      sent_counter_->fetch_add(frame.size(), std::memory_order_relaxed);
  }

  /// Next complete frame, or nullopt if the deadline passes or the peer
  /// closed the link.
  virtual std::optional<Bytes> receive(Deadline deadline) = 0;

  virtual void close() = 0;

protected:
  virtual void do_send(const Bytes &frame) = 0;

private:
  std::atomic<std::uint64_t> *sent_counter_;
};

/// Creates links between one coordinator and m workers.
class Transport {
public:
  virtual ~Transport() = default;

  /// Prepares to accept worker links. Called by the coordinator before any
  /// worker connects.
  virtual void listen() = 0;

  /// Worker side: opens a link to the coordinator. Safe to call concurrently.
  virtual std::unique_ptr<Channel> connect() = 0;

  /// Coordinator side: waits for the next worker link.
  virtual std::unique_ptr<Channel> accept(Deadline deadline) = 0;

  /// Refuses further connections and closes links never accepted.
  virtual void shutdown() = 0;

  /// Total bytes written by worker-side and coordinator-side endpoints.
  std::uint64_t worker_bytes_sent() const { return worker_sent_.load(); }
  std::uint64_t coordinator_bytes_sent() const { return coordinator_sent_.load(); }

protected:
  std::atomic<std::uint64_t> worker_sent_{0};
  std::atomic<std::uint64_t> coordinator_sent_{0};
};

/// Thread-safe in-memory queues.
std::unique_ptr<Transport> make_in_process_transport();

/// TCP on `address`. Port 0 picks an ephemeral port at listen().
std::unique_ptr<Transport> make_socket_transport(std::string address,
                                                 std::uint16_t port);

/// Whether the socket transport was compiled in.
bool socket_transport_available() noexcept;

} // namespace eigenfed::federation
