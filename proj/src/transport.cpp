#include "socnav/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace socnav {

namespace {

std::string os_error(const std::string& what) { return what + ": " + std::strerror(errno); }

int poll_ms(double timeout_s) {
  if (timeout_s < 0.0) return -1;
  return static_cast<int>(std::min(timeout_s * 1000.0, 2.0e9));
}

struct Resolved {
  sockaddr_storage storage{};
  socklen_t length = 0;
  int family = AF_INET;
};

Resolved resolve(const Address& a) {
  Resolved r;
  if (a.kind == Address::Kind::kUnix) {
    sockaddr_un un{};
    un.sun_family = AF_UNIX;
    if (a.path.size() >= sizeof(un.sun_path)) throw TransportError("socket path too long: " + a.path);
    std::memcpy(un.sun_path, a.path.c_str(), a.path.size() + 1);
    std::memcpy(&r.storage, &un, sizeof(un));
    r.length = sizeof(un);
    r.family = AF_UNIX;
    return r;
  }
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(a.port);
  if (int rc = getaddrinfo(a.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + a.str() + ": " + gai_strerror(rc));
  }
  std::memcpy(&r.storage, res->ai_addr, res->ai_addrlen);
  r.length = res->ai_addrlen;
  r.family = res->ai_family;
  freeaddrinfo(res);
  return r;
}

}  // namespace

std::string Address::str() const {
  if (kind == Kind::kUnix) return "unix:" + path;
  return host + ":" + std::to_string(port);
}

Address parse_address(const std::string& text) {
  Address a;
  if (text.rfind("unix:", 0) == 0) {
    a.kind = Address::Kind::kUnix;
    a.path = text.substr(5);
    if (a.path.empty()) throw UsageError("empty socket path in '" + text + "'");
    return a;
  }
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw UsageError("expected HOST:PORT, got '" + text + "'");
  }
  a.host = text.substr(0, colon);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw UsageError("bad port in '" + text + "'");
  }
  if (port < 0 || port > 65535) throw UsageError("port out of range in '" + text + "'");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

Connection::Connection(Connection&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), buffer_(std::move(other.buffer_)) {}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

Connection::~Connection() { close(); }

void Connection::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

bool Connection::wait_readable(double timeout_s) {
  if (buffer_.find('\n') != std::string::npos) return true;
  if (fd_ < 0) return false;
  pollfd p{fd_, POLLIN, 0};
  const int rc = ::poll(&p, 1, poll_ms(timeout_s));
  if (rc < 0 && errno != EINTR) throw TransportError(os_error("poll"));
  return rc > 0;
}

std::optional<std::string> Connection::read_line(double timeout_s) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double>(timeout_s));
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (fd_ < 0) throw TransportError("connection closed");
    const double left = std::chrono::duration<double>(deadline - clock::now()).count();
    if (left <= 0.0) throw TransportError("receive deadline exceeded");
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, poll_ms(left));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(os_error("poll"));
    }
    if (rc == 0) continue;
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(os_error("recv"));
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      throw TransportError("connection closed mid-message");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Connection::write(const std::string& data) {
  if (fd_ < 0) throw TransportError("connection closed");
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(os_error("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

Listener::Listener(const Address& address) : address_(address) {
  const Resolved r = resolve(address);
  fd_ = ::socket(r.family, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw TransportError(os_error("socket"));
  if (address.kind == Address::Kind::kUnix) {
    ::unlink(address.path.c_str());
  } else {
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  }
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&r.storage), r.length) < 0) {
    const std::string msg = os_error("cannot bind " + address.str());
    ::close(fd_);
    throw TransportError(msg);
  }
  if (::listen(fd_, 4) < 0) {
    const std::string msg = os_error("listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  if (address.kind == Address::Kind::kTcp) {
    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    if (bound.ss_family == AF_INET) {
      address_.port = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else if (bound.ss_family == AF_INET6) {
      address_.port = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
  }
}

Listener::Listener(Listener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), address_(std::move(other.address_)) {}

Listener::~Listener() {
  if (fd_ >= 0) {
    ::close(fd_);
    if (address_.kind == Address::Kind::kUnix) ::unlink(address_.path.c_str());
  }
}

Connection Listener::accept(double timeout_s) {
  pollfd p{fd_, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&p, 1, poll_ms(timeout_s));
  } while (rc < 0 && errno == EINTR);
  if (rc < 0) throw TransportError(os_error("poll"));
  if (rc == 0) throw TransportError("no client connected to " + address_.str() + " within the accept timeout");
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw TransportError(os_error("accept"));
  if (address_.kind == Address::Kind::kTcp) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  return Connection(fd);
}

Connection connect_to(const Address& address, double timeout_s) {
  const Resolved r = resolve(address);
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double>(timeout_s));
  while (true) {
    const int fd = ::socket(r.family, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw TransportError(os_error("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&r.storage), r.length) == 0) {
      if (address.kind == Address::Kind::kTcp) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      }
      return Connection(fd);
    }
    const std::string msg = os_error("cannot connect to " + address.str());
    ::close(fd);
    if (clock::now() >= deadline) throw TransportError(msg);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace socnav
