#include <condition_variable>
#include <deque>
#include <mutex>

#include "eigenfed/errors.hpp"
#include "eigenfed/federation/transport.hpp"

namespace eigenfed::federation {

namespace {

// One direction of a link.
struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> frames;
  bool closed = false;

  void push(const Bytes &frame) {
    {
      std::lock_guard lock(mu);
      if (closed)
        throw TransportError("in-process link closed");
      frames.push_back(frame);
    }
    cv.notify_all();
  }

  std::optional<Bytes> pop(Deadline deadline) {
    std::unique_lock lock(mu);
    cv.wait_until(lock, deadline, [&] { return !frames.empty() || closed; });
    if (frames.empty())
      return std::nullopt;
    Bytes out = std::move(frames.front());
    frames.pop_front();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class QueueChannel final : public Channel {
public:
  QueueChannel(std::shared_ptr<Queue> out, std::shared_ptr<Queue> in,
               std::atomic<std::uint64_t> *counter)
      : Channel(counter), out_(std::move(out)), in_(std::move(in)) {}

  ~QueueChannel() override { close(); }

  std::optional<Bytes> receive(Deadline deadline) override { return in_->pop(deadline); }

  // Closing either endpoint tears down both directions, like a socket.
  void close() override {
    out_->close();
    in_->close();
  }

protected:
  void do_send(const Bytes &frame) override { out_->push(frame); }

private:
  std::shared_ptr<Queue> out_;
  std::shared_ptr<Queue> in_;
};

class InProcessTransport final : public Transport {
public:
  void listen() override {}

  std::unique_ptr<Channel> connect() override {
    {
      std::lock_guard lock(mu_);
      if (shut_down_)
        throw TransportError("transport shut down");
    }
    auto up = std::make_shared<Queue>();
    auto down = std::make_shared<Queue>();
    {
      std::lock_guard lock(mu_);
      pending_.push_back(std::make_unique<QueueChannel>(down, up, &coordinator_sent_));
    }
    cv_.notify_all();
    return std::make_unique<QueueChannel>(up, down, &worker_sent_);
  }

  std::unique_ptr<Channel> accept(Deadline deadline) override {
    std::unique_lock lock(mu_);
    cv_.wait_until(lock, deadline, [&] { return !pending_.empty(); });
    if (pending_.empty())
      return nullptr;
    auto ch = std::move(pending_.front());
    pending_.pop_front();
    return ch;
  }

  void shutdown() override {
    std::deque<std::unique_ptr<Channel>> stray;
    {
      std::lock_guard lock(mu_);
      shut_down_ = true;
      stray.swap(pending_);
    }
    cv_.notify_all();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool shut_down_ = false;
  std::deque<std::unique_ptr<Channel>> pending_;
};

} // namespace

std::unique_ptr<Transport> make_in_process_transport() {
  return std::make_unique<InProcessTransport>();
}

} // namespace eigenfed::federation
