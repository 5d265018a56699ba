#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <mutex>

#include "eigenfed/errors.hpp"
#include "eigenfed/federation/transport.hpp"

namespace eigenfed::federation {

namespace {

std::string errno_str(const char *what) {
  return std::string(what) + ": " + std::strerror(errno);
}

int remaining_ms(Deadline deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  if (left.count() <= 0)
    return 0;
  return left.count() > 1'000'000 ? 1'000'000 : static_cast<int>(left.count());
}

// Waits until fd is readable. False on timeout.
bool wait_readable(int fd, Deadline deadline) {
  for (;;) {
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0)
      return true;
    if (rc == 0)
      return false;
    if (errno != EINTR)
      throw TransportError(errno_str("poll"));
  }
}

class Fd {
public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd &&o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd &operator=(Fd &&o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  int get() const noexcept { return fd_; }
  void reset() {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_;
};

class SocketChannel final : public Channel {
public:
  SocketChannel(Fd fd, std::atomic<std::uint64_t> *counter)
      : Channel(counter), fd_(std::move(fd)) {
    int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  std::optional<Bytes> receive(Deadline deadline) override {
    std::lock_guard lock(mu_);
    if (fd_.get() < 0)
      return std::nullopt;
    Bytes frame(kHeaderSize);
    if (!read_exact(frame.data(), kHeaderSize, deadline))
      return std::nullopt;
    const std::size_t total = frame_length_from_header(frame);
    frame.resize(total);
    if (!read_exact(frame.data() + kHeaderSize, total - kHeaderSize, deadline))
      return std::nullopt;
    return frame;
  }

  void close() override {
    std::lock_guard lock(mu_);
    if (fd_.get() >= 0)
      ::shutdown(fd_.get(), SHUT_RDWR);
    fd_.reset();
  }

protected:
  void do_send(const Bytes &frame) override {
    std::lock_guard lock(mu_);
    std::size_t off = 0;
    while (off < frame.size()) {
      if (fd_.get() < 0)
        throw TransportError("socket closed");
      const ssize_t n = ::send(fd_.get(), frame.data() + off, frame.size() - off,
                               MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR)
          continue;
        throw TransportError(errno_str("send"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

private:
  bool read_exact(std::uint8_t *dst, std::size_t len, Deadline deadline) {
    std::size_t got = 0;
    while (got < len) {
      if (!wait_readable(fd_.get(), deadline))
        return false;
      const ssize_t n = ::recv(fd_.get(), dst + got, len - got, 0);
      if (n == 0)
        return false;
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN)
          continue;
        return false;
      }
      got += static_cast<std::size_t>(n);
    }
    return true;
  }

  std::mutex mu_;
  Fd fd_;
};

sockaddr_in resolve(const std::string &address, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) == 1)
    return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  if (::getaddrinfo(address.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve address '" + address + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

class SocketTransport final : public Transport {
public:
  SocketTransport(std::string address, std::uint16_t port)
      : address_(std::move(address)), port_(port) {}

  void listen() override {
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (fd.get() < 0)
      throw TransportError(errno_str("socket"));
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = resolve(address_, port_);
    if (::bind(fd.get(), reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) < 0)
      throw TransportError(errno_str("bind"));
    if (::listen(fd.get(), SOMAXCONN) < 0)
      throw TransportError(errno_str("listen"));
    socklen_t len = sizeof(addr);
    if (::getsockname(fd.get(), reinterpret_cast<sockaddr *>(&addr), &len) < 0)
      throw TransportError(errno_str("getsockname"));
    bound_ = addr;
    listener_ = std::move(fd);
    listening_.store(true);
  }

  std::unique_ptr<Channel> connect() override {
    if (!listening_.load())
      throw TransportError("socket transport is not listening");
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (fd.get() < 0)
      throw TransportError(errno_str("socket"));
    sockaddr_in addr = bound_;
    if (addr.sin_addr.s_addr == htonl(INADDR_ANY))
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd.get(), reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) < 0)
      throw TransportError(errno_str("connect"));
    return std::make_unique<SocketChannel>(std::move(fd), &worker_sent_);
  }

  std::unique_ptr<Channel> accept(Deadline deadline) override {
    if (!wait_readable(listener_.get(), deadline))
      return nullptr;
    Fd fd(::accept4(listener_.get(), nullptr, nullptr, SOCK_CLOEXEC));
    if (fd.get() < 0)
      throw TransportError(errno_str("accept"));
    return std::make_unique<SocketChannel>(std::move(fd), &coordinator_sent_);
  }

  void shutdown() override {
    // Closing the listener resets queued, unaccepted connections.
    listening_.store(false);
    listener_.reset();
  }

private:
  std::string address_;
  std::uint16_t port_;
  Fd listener_;
  std::atomic<bool> listening_{false};
  sockaddr_in bound_{};
};

} // namespace

std::unique_ptr<Transport> make_socket_transport(std::string address,
                                                 std::uint16_t port) {
  return std::make_unique<SocketTransport>(std::move(address), port);
}

bool socket_transport_available() noexcept { return true; }

} // namespace eigenfed::federation
