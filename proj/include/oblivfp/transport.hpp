#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oblivfp/common.hpp"

namespace oblivfp {

// One message between two parties. On the wire this is
//   u32 payload length | u8 sender id | u32 round tag | payload bytes
// with all integers little-endian and the payload a sequence of 16-byte
// field elements (or 17-byte share records during input dealing).
struct Frame {
  unsigned char sender = 0;
  u32 round = 0;
  std::vector<unsigned char> payload;

  std::vector<unsigned char> encode() const {
    std::vector<unsigned char> out(9 + payload.size());
    u32 len = (u32)payload.size();
    for (int i = 0; i < 4; ++i) out[i] = (unsigned char)(len >> (8 * i));
    out[4] = sender;
    for (int i = 0; i < 4; ++i) out[5 + i] = (unsigned char)(round >> (8 * i));
    std::copy(payload.begin(), payload.end(), out.begin() + 9);
    return out;
  }
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(int to, Frame frame) = 0;
  virtual Frame recv(int from, std::chrono::milliseconds timeout) = 0;
};

namespace detail {
struct FrameQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> q;
  bool closed = false;

  void push(Frame f) {
    {
      std::lock_guard<std::mutex> lk(mu);
      q.push_back(std::move(f));
    }
    cv.notify_one();
  }
  Frame pop(std::chrono::milliseconds timeout, const char* what) {
    std::unique_lock<std::mutex> lk(mu);
    if (!cv.wait_for(lk, timeout, [&] { return !q.empty() || closed; }))
      throw TransportError(std::string("timed out waiting for message from ") + what +
                           " (likely protocol deadlock: mismatched message counts)");
    if (q.empty()) throw TransportError(std::string("channel from ") + what + " closed");
    Frame f = std::move(q.front());
    q.pop_front();
    return f;
  }
};
}  // namespace detail

// In-process transport: an n*n mesh of FIFO queues shared by all party
// threads of one run.
class InProcHub {
 public:
  explicit InProcHub(int n) : n_(n), queues_(size_t(n + 1) * size_t(n + 1)) {
    for (auto& q : queues_) q = std::make_unique<detail::FrameQueue>();
  }
  detail::FrameQueue& queue(int from, int to) { return *queues_[size_t(from) * (n_ + 1) + to]; }

 private:
  int n_;
  std::vector<std::unique_ptr<detail::FrameQueue>> queues_;
};

class InProcTransport : public Transport {
 public:
  InProcTransport(InProcHub* hub, int my_id) : hub_(hub), id_(my_id) {}
  void send(int to, Frame frame) override { hub_->queue(id_, to).push(std::move(frame)); }
  Frame recv(int from, std::chrono::milliseconds timeout) override {
    return hub_->queue(from, id_).pop(timeout, std::to_string(from).c_str());
  }

 private:
  InProcHub* hub_;
  int id_;
};

// Topology file: one line per party, "id host port".
struct PeerAddr {
  int id;
  std::string host;
  int port;
};

inline std::vector<PeerAddr> parse_topology(std::istream& in) {
  std::vector<PeerAddr> peers;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PeerAddr p;
    if (!(ls >> p.id >> p.host >> p.port))
      throw ParseError("topology line " + std::to_string(lineno) + ": expected 'id host port'");
    peers.push_back(p);
  }
  return peers;
}

inline std::vector<PeerAddr> load_topology(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open topology file: " + path);
  return parse_topology(f);
}

// TCP mesh: every party listens on its own port and keeps one full-duplex
// socket per peer. Lower ids connect to higher ids' listeners.
class TcpTransport : public Transport {
 public:
  TcpTransport(int my_id, const std::vector<PeerAddr>& peers,
               std::chrono::milliseconds connect_timeout = std::chrono::seconds(30))
      : id_(my_id) {
    int n = (int)peers.size();
    socks_.assign(n + 1, -1);
    queues_.resize(n + 1);
    for (auto& q : queues_) q = std::make_unique<detail::FrameQueue>();

    const PeerAddr* me = nullptr;
    for (const auto& p : peers)
      if (p.id == my_id) me = &p;
    if (!me) throw ConfigError("own party id missing from topology");

    int listener = -1;
    int accept_count = 0;
    for (const auto& p : peers)
      if (p.id < my_id) ++accept_count;
    if (accept_count > 0) {
      listener = ::socket(AF_INET, SOCK_STREAM, 0);
      if (listener < 0) throw TransportError("socket() failed");
      int one = 1;
      ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_addr.s_addr = INADDR_ANY;
      addr.sin_port = htons((uint16_t)me->port);
      if (::bind(listener, (sockaddr*)&addr, sizeof(addr)) != 0) {
        ::close(listener);
        throw TransportError("bind() failed on port " + std::to_string(me->port));
      }
      ::listen(listener, accept_count);
    }

    auto deadline = std::chrono::steady_clock::now() + connect_timeout;
    // Connect out to every higher id.
    for (const auto& p : peers) {
      if (p.id <= my_id) continue;
      int s = -1;
      for (;;) {
        s = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons((uint16_t)p.port);
        if (::inet_pton(AF_INET, p.host.c_str(), &addr.sin_addr) != 1) {
          ::close(s);
          throw ConfigError("bad peer address: " + p.host);
        }
        if (::connect(s, (sockaddr*)&addr, sizeof(addr)) == 0) break;
        ::close(s);
        if (std::chrono::steady_clock::now() > deadline)
          throw TransportError("connect to party " + std::to_string(p.id) + " timed out");
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      unsigned char hello = (unsigned char)my_id;
      write_all(s, &hello, 1);
      set_nodelay(s);
      socks_[p.id] = s;
    }
    // Accept from every lower id; a 1-byte hello identifies the peer.
    for (int k = 0; k < accept_count; ++k) {
      int s = ::accept(listener, nullptr, nullptr);
      if (s < 0) throw TransportError("accept() failed");
      unsigned char hello = 0;
      read_all(s, &hello, 1);
      if (hello < 1 || hello >= socks_.size() || socks_[hello] != -1) {
        ::close(s);
        throw TransportError("unexpected peer hello");
      }
      set_nodelay(s);
      socks_[hello] = s;
    }
    if (listener >= 0) ::close(listener);

    for (size_t pid = 1; pid < socks_.size(); ++pid) {
      if ((int)pid == my_id || socks_[pid] < 0) continue;
      readers_.emplace_back([this, pid] { reader_loop((int)pid); });
    }
  }

  ~TcpTransport() override {
    for (int s : socks_)
      if (s >= 0) ::shutdown(s, SHUT_RDWR);
    for (auto& t : readers_)
      if (t.joinable()) t.join();
    for (int s : socks_)
      if (s >= 0) ::close(s);
  }

  void send(int to, Frame frame) override {
    auto bytes = frame.encode();
    std::lock_guard<std::mutex> lk(send_mu_);
    write_all(socks_[to], bytes.data(), bytes.size());
  }

  Frame recv(int from, std::chrono::milliseconds timeout) override {
    return queues_[from]->pop(timeout, std::to_string(from).c_str());
  }

 private:
  static void set_nodelay(int s) {
    int one = 1;
    ::setsockopt(s, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  static void write_all(int fd, const unsigned char* p, size_t len) {
    while (len > 0) {
      ssize_t w = ::write(fd, p, len);
      if (w <= 0) throw TransportError("socket write failed");
      p += w;
      len -= size_t(w);
    }
  }
  static bool read_all(int fd, unsigned char* p, size_t len) {
    while (len > 0) {
      ssize_t r = ::read(fd, p, len);
      if (r <= 0) return false;
      p += r;
      len -= size_t(r);
    }
    return true;
  }

  void reader_loop(int pid) {
    int s = socks_[pid];
    for (;;) {
      unsigned char hdr[9];
      if (!read_all(s, hdr, 9)) break;
      u32 len = 0, round = 0;
      for (int i = 0; i < 4; ++i) len |= u32(hdr[i]) << (8 * i);
      for (int i = 0; i < 4; ++i) round |= u32(hdr[5 + i]) << (8 * i);
      Frame f;
      f.sender = hdr[4];
      f.round = round;
      f.payload.resize(len);
      if (len > 0 && !read_all(s, f.payload.data(), len)) break;
      queues_[pid]->push(std::move(f));
    }
    std::lock_guard<std::mutex> lk(queues_[pid]->mu);
    queues_[pid]->closed = true;
    queues_[pid]->cv.notify_all();
  }

  int id_;
  std::vector<int> socks_;
  std::vector<std::unique_ptr<detail::FrameQueue>> queues_;
  std::vector<std::thread> readers_;
  std::mutex send_mu_;
};

}  // namespace oblivfp
