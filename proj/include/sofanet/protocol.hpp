#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sofanet/mat.hpp"

namespace sofanet {

enum class MsgKind : std::uint8_t {
  Hello = 1,
  HiddenBatch = 2,
  HiddenGrad = 3,
  Params = 4,
  Metrics = 5,
  Bye = 6,
};

const char* msg_kind_name(MsgKind k);
bool is_known_kind(std::uint8_t k);

// Frame layout on the wire: 1-byte kind, 4-byte round (big-endian),
// 4-byte payload length (big-endian), payload bytes.
struct Frame {
  MsgKind kind = MsgKind::Bye;
  std::uint32_t round = 0;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);

// Matrix payload: u32 rows, u32 cols (little-endian), then row-major f64.
std::vector<std::uint8_t> encode_matrix(const Mat& m);
Mat decode_matrix(const std::vector<std::uint8_t>& payload);

// Read-only observer of every frame crossing one endpoint, in order.
struct TranscriptEntry {
  char dir;  // '>' sent, '<' received
  Frame frame;
};

class ChannelTap {
 public:
  void record(char dir, const Frame& f);
  std::vector<TranscriptEntry> entries() const;

 private:
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

void write_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path);
std::vector<TranscriptEntry> read_transcript(const std::string& path);

// Blocking duplex frame channel. send() never blocks on the peer (frames are
// queued and drained independently), recv() blocks until a frame arrives and
// throws PeerClosed at end of stream.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& f) = 0;
  virtual Frame recv() = 0;
  void attach_tap(std::shared_ptr<ChannelTap> tap) { tap_ = std::move(tap); }

 protected:
  void tap_record(char dir, const Frame& f) {
    if (tap_) tap_->record(dir, f);
  }

 private:
  std::shared_ptr<ChannelTap> tap_;
};

// Two in-process endpoints joined by a pair of frame queues.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair();

// TCP endpoints. listen_channel binds, accepts one peer and returns;
// connect_channel retries until the listener is up (bounded).
std::unique_ptr<Channel> listen_channel(const std::string& host, std::uint16_t port);
std::unique_ptr<Channel> connect_channel(const std::string& host, std::uint16_t port);

// "host:port" helper for the CLI.
std::pair<std::string, std::uint16_t> parse_addr(const std::string& addr);

}  // namespace sofanet
