#pragma once

// Minimal blocking TCP with line framing and per-message timeouts.
// Endpoints are "host:port" strings; only IPv4 loopback-style hosts are
// expected but any numeric host works.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>

namespace epr::net {

struct NetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Timeout : NetError {
  Timeout() : NetError("timed out waiting for message") {}
};

inline std::pair<std::string, std::uint16_t> split_endpoint(const std::string& ep) {
  const auto colon = ep.rfind(':');
  if (colon == std::string::npos) throw NetError("endpoint must be host:port, got " + ep);
  const std::string host = ep.substr(0, colon);
  const int port = std::stoi(ep.substr(colon + 1));
  if (port < 1 || port > 65535) throw NetError("bad port in endpoint " + ep);
  return {host, static_cast<std::uint16_t>(port)};
}

class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd) : fd_(fd) {
    if (fd_ >= 0) {
      int one = 1;
      ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }
  }
  Connection(Connection&& other) noexcept : fd_(std::exchange(other.fd_, -1)),
                                            buf_(std::move(other.buf_)) {}
  Connection& operator=(Connection&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
      buf_ = std::move(other.buf_);
    }
    return *this;
  }
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection() { close(); }

  bool open() const { return fd_ >= 0; }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  static Connection dial(const std::string& endpoint) {
    const auto [host, port] = split_endpoint(endpoint);
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw NetError("socket: " + std::string(std::strerror(errno)));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw NetError("bad host " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const std::string msg = std::strerror(errno);
      ::close(fd);
      throw NetError("connect " + endpoint + ": " + msg);
    }
    return Connection(fd);
  }

  void send_line(const std::string& line) {
    std::string framed = line;
    framed.push_back('\n');
    std::size_t off = 0;
    while (off < framed.size()) {
      const ssize_t wrote = ::send(fd_, framed.data() + off, framed.size() - off, MSG_NOSIGNAL);
      if (wrote < 0) {
        if (errno == EINTR) continue;
        throw NetError("send: " + std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(wrote);
    }
  }

  // One newline-terminated message; timeout_ms < 0 blocks forever.
  std::string recv_line(int timeout_ms) {
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      if (timeout_ms >= 0) {
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, timeout_ms);
        if (ready == 0) throw Timeout();
        if (ready < 0 && errno != EINTR) throw NetError("poll: " + std::string(std::strerror(errno)));
        if (ready < 0) continue;
      }
      char chunk[4096];
      const ssize_t got = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (got == 0) throw NetError("peer closed connection");
      if (got < 0) {
        if (errno == EINTR) continue;
        throw NetError("recv: " + std::string(std::strerror(errno)));
      }
      buf_.append(chunk, static_cast<std::size_t>(got));
    }
  }

 private:
  int fd_{-1};
  std::string buf_;
};

class Listener {
 public:
  // port 0 picks an ephemeral port; bound_endpoint() reports the real one
  explicit Listener(const std::string& host = "127.0.0.1", std::uint16_t port = 0) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw NetError("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd_);
      throw NetError("bad host " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd_, 8) != 0) {
      const std::string msg = std::strerror(errno);
      ::close(fd_);
      throw NetError("bind/listen " + host + ": " + msg);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    char buf[INET_ADDRSTRLEN];
    ::inet_ntop(AF_INET, &bound.sin_addr, buf, sizeof(buf));
    endpoint_ = std::string(buf) + ":" + std::to_string(ntohs(bound.sin_port));
  }
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener() {
    if (fd_ >= 0) ::close(fd_);
  }

  const std::string& bound_endpoint() const { return endpoint_; }

  Connection accept(int timeout_ms = -1) {
    if (timeout_ms >= 0) {
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, timeout_ms);
      if (ready == 0) throw Timeout();
      if (ready < 0) throw NetError("poll: " + std::string(std::strerror(errno)));
    }
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw NetError("accept: " + std::string(std::strerror(errno)));
    return Connection(fd);
  }

 private:
  int fd_{-1};
  std::string endpoint_;
};

}  // namespace epr::net
