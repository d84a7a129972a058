#include "sofanet/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>

#include "sofanet/errors.hpp"

namespace sofanet {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Hello: return "HELLO";
    case MsgKind::HiddenBatch: return "HIDDEN_BATCH";
    case MsgKind::HiddenGrad: return "HIDDEN_GRAD";
    case MsgKind::Params: return "PARAMS";
    case MsgKind::Metrics: return "METRICS";
    case MsgKind::Bye: return "BYE";
  }
  return "UNKNOWN";
}

bool is_known_kind(std::uint8_t k) { return k >= 1 && k <= 6; }

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out;
  out.reserve(9 + f.payload.size());
  out.push_back(static_cast<std::uint8_t>(f.kind));
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>((f.round >> shift) & 0xff));
  const std::uint32_t len = static_cast<std::uint32_t>(f.payload.size());
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>((len >> shift) & 0xff));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

std::vector<std::uint8_t> encode_matrix(const Mat& m) {
  std::vector<std::uint8_t> out(8 + m.size() * sizeof(double));
  const std::uint32_t r = static_cast<std::uint32_t>(m.rows);
  const std::uint32_t c = static_cast<std::uint32_t>(m.cols);
  std::memcpy(out.data(), &r, 4);
  std::memcpy(out.data() + 4, &c, 4);
  std::memcpy(out.data() + 8, m.v.data(), m.size() * sizeof(double));
  return out;
}

Mat decode_matrix(const std::vector<std::uint8_t>& payload) {
  if (payload.size() < 8) throw TruncatedPayload("matrix payload shorter than its header");
  std::uint32_t r = 0, c = 0;
  std::memcpy(&r, payload.data(), 4);
  std::memcpy(&c, payload.data() + 4, 4);
  const std::size_t need = 8 + static_cast<std::size_t>(r) * c * sizeof(double);
  if (payload.size() != need) throw TruncatedPayload("matrix payload length disagrees with header");
  Mat m(r, c);
  std::memcpy(m.v.data(), payload.data() + 8, m.size() * sizeof(double));
  return m;
}

void ChannelTap::record(char dir, const Frame& f) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back(TranscriptEntry{dir, f});
}

std::vector<TranscriptEntry> ChannelTap::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

void write_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open transcript file " + path);
  for (const auto& e : entries) {
    out.put(e.dir);
    const std::vector<std::uint8_t> bytes = encode_frame(e.frame);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<TranscriptEntry> read_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open transcript file " + path);
  std::vector<TranscriptEntry> out;
  while (true) {
    const int dir = in.get();
    if (dir == EOF) break;
    std::uint8_t head[9];
    in.read(reinterpret_cast<char*>(head), 9);
    if (in.gcount() != 9) throw TruncatedPayload("transcript ends inside a frame header");
    Frame f;
    f.kind = static_cast<MsgKind>(head[0]);
    f.round = (static_cast<std::uint32_t>(head[1]) << 24) | (static_cast<std::uint32_t>(head[2]) << 16) |
              (static_cast<std::uint32_t>(head[3]) << 8) | static_cast<std::uint32_t>(head[4]);
    const std::uint32_t len = (static_cast<std::uint32_t>(head[5]) << 24) |
                              (static_cast<std::uint32_t>(head[6]) << 16) |
                              (static_cast<std::uint32_t>(head[7]) << 8) | static_cast<std::uint32_t>(head[8]);
    f.payload.resize(len);
    if (len) {
      in.read(reinterpret_cast<char*>(f.payload.data()), len);
      if (in.gcount() != static_cast<std::streamsize>(len))
        throw TruncatedPayload("transcript ends inside a frame payload");
    }
    out.push_back(TranscriptEntry{static_cast<char>(dir), std::move(f)});
  }
  return out;
}

namespace {

struct FrameQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> frames;
  bool closed = false;

  void push(Frame f) {
    {
      std::lock_guard<std::mutex> lock(mu);
      frames.push_back(std::move(f));
    }
    cv.notify_one();
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mu);
      closed = true;
    }
    cv.notify_all();
  }

  Frame pop() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [this] { return !frames.empty() || closed; });
    if (frames.empty()) throw PeerClosed("peer endpoint closed");
    Frame f = std::move(frames.front());
    frames.pop_front();
    return f;
  }
};

class InProcChannel final : public Channel {
 public:
  InProcChannel(std::shared_ptr<FrameQueue> in, std::shared_ptr<FrameQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~InProcChannel() override { out_->close(); }

  void send(const Frame& f) override {
    tap_record('>', f);
    out_->push(f);
  }

  Frame recv() override {
    Frame f = in_->pop();
    tap_record('<', f);
    return f;
  }

 private:
  std::shared_ptr<FrameQueue> in_;
  std::shared_ptr<FrameQueue> out_;
};

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::write(fd, data + off, len - off);
    if (n <= 0) throw PeerClosed("socket write failed");
    off += static_cast<std::size_t>(n);
  }
}

bool read_all(int fd, std::uint8_t* data, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::read(fd, data + off, len - off);
    if (n == 0) return false;
    if (n < 0) throw PeerClosed("socket read failed");
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// A writer thread drains the outgoing queue so that both peers may send
// before either receives without deadlocking on full kernel buffers.
class SocketChannel final : public Channel {
 public:
  explicit SocketChannel(int fd) : fd_(fd) {
    writer_ = std::thread([this] {
      try {
        while (true) {
          Frame f = outq_.pop();
          const std::vector<std::uint8_t> bytes = encode_frame(f);
          write_all(fd_, bytes.data(), bytes.size());
        }
      } catch (const PeerClosed&) {
        // queue closed or peer went away; either way the writer is done
      }
    });
  }

  ~SocketChannel() override {
    outq_.close();
    if (writer_.joinable()) writer_.join();
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }

  void send(const Frame& f) override {
    tap_record('>', f);
    outq_.push(f);
  }

  Frame recv() override {
    std::uint8_t head[9];
    if (!read_all(fd_, head, 9)) throw PeerClosed("peer closed the connection");
    Frame f;
    f.kind = static_cast<MsgKind>(head[0]);
    f.round = (static_cast<std::uint32_t>(head[1]) << 24) | (static_cast<std::uint32_t>(head[2]) << 16) |
              (static_cast<std::uint32_t>(head[3]) << 8) | static_cast<std::uint32_t>(head[4]);
    const std::uint32_t len = (static_cast<std::uint32_t>(head[5]) << 24) |
                              (static_cast<std::uint32_t>(head[6]) << 16) |
                              (static_cast<std::uint32_t>(head[7]) << 8) | static_cast<std::uint32_t>(head[8]);
    f.payload.resize(len);
    if (len && !read_all(fd_, f.payload.data(), len))
      throw PeerClosed("peer closed the connection mid-frame");
    tap_record('<', f);
    return f;
  }

 private:
  int fd_;
  FrameQueue outq_;
  std::thread writer_;
};

sockaddr_in make_sockaddr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw ConfigInvalid("cannot parse IPv4 address " + host);
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair() {
  auto q_ab = std::make_shared<FrameQueue>();
  auto q_ba = std::make_shared<FrameQueue>();
  return {std::make_unique<InProcChannel>(q_ba, q_ab), std::make_unique<InProcChannel>(q_ab, q_ba)};
}

std::unique_ptr<Channel> listen_channel(const std::string& host, std::uint16_t port) {
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw IoFailure("socket() failed");
  const int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = make_sockaddr(host, port);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(lfd);
    throw IoFailure("bind to " + host + ":" + std::to_string(port) + " failed");
  }
  if (::listen(lfd, 1) != 0) {
    ::close(lfd);
    throw IoFailure("listen failed");
  }
  const int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) throw IoFailure("accept failed");
  const int nodelay = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &nodelay, sizeof nodelay);
  return std::make_unique<SocketChannel>(fd);
}

std::unique_ptr<Channel> connect_channel(const std::string& host, std::uint16_t port) {
  sockaddr_in addr = make_sockaddr(host, port);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw IoFailure("socket() failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
      const int nodelay = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &nodelay, sizeof nodelay);
      return std::make_unique<SocketChannel>(fd);
    }
    ::close(fd);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  throw IoFailure("cannot connect to " + host + ":" + std::to_string(port));
}

std::pair<std::string, std::uint16_t> parse_addr(const std::string& addr) {
  const std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigInvalid("address must look like host:port");
  const std::string host = addr.substr(0, colon);
  const int port = std::stoi(addr.substr(colon + 1));
  if (port <= 0 || port > 65535) throw ConfigInvalid("port out of range");
  return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(port)};
}

}  // namespace sofanet
