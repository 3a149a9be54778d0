#include "holo/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "holo/error.hpp"

namespace holo::transport {

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> bytes;
  bool closed = false;
};

class MemoryStream final : public Stream {
 public:
  MemoryStream(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryStream() override { close(); }

  void write_all(std::span<const std::uint8_t> data) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw Error("transport.closed", "in-memory stream closed");
    out_->bytes.insert(out_->bytes.end(), data.begin(), data.end());
    out_->cv.notify_all();
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::unique_lock lock(in_->mu);
    std::size_t got = 0;
    while (got < out.size()) {
      in_->cv.wait(lock, [&] { return !in_->bytes.empty() || in_->closed; });
      if (in_->bytes.empty()) throw Error("transport.closed", "in-memory stream closed");
      while (got < out.size() && !in_->bytes.empty()) {
        out[got++] = in_->bytes.front();
        in_->bytes.pop_front();
      }
    }
  }

  void close() override {
    for (auto* p : {in_.get(), out_.get()}) {
      std::lock_guard lock(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Pipe> in_;
  std::shared_ptr<Pipe> out_;
};

class TcpStream final : public Stream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpStream() override {
    close();
    ::close(fd_);
  }

  void write_all(std::span<const std::uint8_t> data) override {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error("transport.closed", std::string("send failed: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::size_t got = 0;
    while (got < out.size()) {
      const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n == 0) throw Error("transport.closed", "peer closed the connection");
      if (n < 0) throw Error("transport.closed", std::string("recv failed: ") + std::strerror(errno));
      got += static_cast<std::size_t>(n);
    }
  }

  void close() override { ::shutdown(fd_, SHUT_RDWR); }

 private:
  int fd_;
};

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_memory_pair() {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<MemoryStream>(b_to_a, a_to_b),
          std::make_unique<MemoryStream>(a_to_b, b_to_a)};
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error("transport.socket", std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    throw Error("transport.bind", "cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Stream> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw Error("transport.closed", "listener closed");
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) return nullptr;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw Error("transport.accept", std::strerror(errno));
  return std::make_unique<TcpStream>(fd);
}

std::unique_ptr<Stream> tcp_connect(const std::string& host, std::uint16_t port,
                                    std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error("transport.resolve", "cannot resolve " + host);
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) throw Error("transport.socket", std::strerror(errno));
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      return std::make_unique<TcpStream>(fd);
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error("transport.connect", "cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

void send_message(Stream& s, const proto::Message& msg) {
  const auto bytes = proto::encode(msg);
  s.write_all(bytes);
}

proto::Message receive_message(Stream& s) {
  std::vector<std::uint8_t> frame(proto::kCommonHeaderSize);
  s.read_exact(frame);
  const proto::FrameHeader h = proto::decode_header(frame);
  frame.resize(proto::kCommonHeaderSize + h.body_len);
  s.read_exact(std::span<std::uint8_t>(frame).subspan(proto::kCommonHeaderSize));
  return proto::decode(frame);
}

}  // namespace holo::transport
