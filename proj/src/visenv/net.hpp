#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace visenv::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();
  // Unblocks any thread sitting in accept/recv on this socket.
  void shutdown() const;

 private:
  int fd_ = -1;
};

// Binds and listens; port 0 picks an ephemeral port.
Socket listen_tcp(const std::string& bind_address, std::uint16_t port, int backlog = 64);
std::uint16_t local_port(const Socket& socket);
// Returns an invalid socket once the listener has been shut down.
Socket accept_tcp(const Socket& listener);
Socket connect_tcp(const std::string& host, std::uint16_t port);

void send_all(const Socket& socket, std::span<const std::uint8_t> data);
// False on clean EOF before the first byte; throws on EOF mid-read or error.
bool recv_exact(const Socket& socket, std::span<std::uint8_t> out);

}  // namespace visenv::net
