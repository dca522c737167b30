#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "socnav/sim.hpp"

namespace socnav {

/// "host:port", or "unix:PATH" for a local-domain socket.
struct Address {
  enum class Kind { kTcp, kUnix } kind = Kind::kTcp;
  std::string host = "127.0.0.1";
  std::uint16_t port = 6400;
  std::string path;

  std::string str() const;
};

Address parse_address(const std::string& text);

/// A connected stream socket exchanging newline-terminated lines.
class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd) : fd_(fd) {}
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  bool open() const { return fd_ >= 0; }
  /// Next line without its terminator; nullopt on orderly close.
  /// Throws TransportError after `timeout_s` seconds without a complete line.
  std::optional<std::string> read_line(double timeout_s);
  /// True if a complete line is buffered or data arrives within `timeout_s`.
  bool wait_readable(double timeout_s);
  void write(const std::string& data);
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

class Listener {
 public:
  explicit Listener(const Address& address);
  Listener(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  /// Bound address; the port is filled in when 0 was requested.
  const Address& address() const { return address_; }
  /// Throws TransportError when nobody connects within `timeout_s`.
  Connection accept(double timeout_s);

 private:
  int fd_ = -1;
  Address address_;
};

Connection connect_to(const Address& address, double timeout_s = 10.0);

}  // namespace socnav
