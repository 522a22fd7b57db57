#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <thread>

#include "oblivfp/fixed_point.hpp"
#include "oblivfp/prss.hpp"
#include "oblivfp/shamir.hpp"
#include "oblivfp/transport.hpp"

namespace oblivfp {

enum class TruncMode { kProbabilistic, kDeterministic };

// One "interactive operation" is one secret-shared multiplication or one
// opening; a round is one batch of parallel interactive operations.
// Comparisons, truncations etc. count the multiplications/openings they are
// built from.
struct CostReport {
  u64 interactive_ops = 0;
  u64 rounds = 0;
  u64 bytes_sent = 0;
  struct Sub {
    u64 ops = 0;
    u64 rounds = 0;
  };
  std::map<std::string, Sub> per_protocol;
  std::map<std::string, u64> counters;  // free-form instrumentation
};

enum class OpenTag {
  kMaskedInternal,  // statistically masked value (comparison/truncation)
  kRandomSquare,    // square of a fresh random value (shared-bit generation)
  kDeclared,        // protocol-level open, carries a label
  kOutput,
};

struct OpenRecord {
  std::string scope;
  OpenTag tag;
  std::string label;
  Fe value;
};

struct TranscriptEntry {
  int peer;
  bool outgoing;
  u32 round;
  u32 bytes;
  u64 payload_hash;

  friend bool operator==(const TranscriptEntry& a, const TranscriptEntry& b) {
    return a.peer == b.peer && a.outgoing == b.outgoing && a.round == b.round &&
           a.bytes == b.bytes && a.payload_hash == b.payload_hash;
  }
  // Shape equality ignores contents: same peers, directions, rounds, sizes.
  bool same_shape(const TranscriptEntry& b) const {
    return peer == b.peer && outgoing == b.outgoing && round == b.round && bytes == b.bytes;
  }
};

inline u64 hash_bytes(const unsigned char* p, size_t len) {
  u64 h = 0x243f6a8885a308d3ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct RunConfig {
  ShamirConfig shamir;
  FxFormat fmt;
  u64 seed = 1;
  TruncMode trunc = TruncMode::kProbabilistic;
  std::chrono::milliseconds round_timeout = std::chrono::seconds(30);
  bool audit_opens = false;
  bool capture_transcript = false;

  enum Mode { kLocal, kTcp } mode = kLocal;
  std::vector<PeerAddr> topology;  // tcp mode
  int tcp_party = 0;               // tcp mode: the party this process hosts

  void validate() const {
    shamir.validate();
    fmt.validate();
    if (mode == kTcp) {
      if ((int)topology.size() != shamir.n) throw ConfigError("topology size != party count");
      if (tcp_party < 1 || tcp_party > shamir.n) throw ConfigError("bad tcp party id");
    }
  }
};

class PartyContext {
 public:
  PartyContext(const RunConfig& rc, int id, Transport* transport)
      : id_(id),
        cfg_(rc.shamir),
        fmt_(rc.fmt),
        trunc_mode_(rc.trunc),
        timeout_(rc.round_timeout),
        audit_(rc.audit_opens),
        capture_(rc.capture_transcript),
        transport_(transport),
        rng_(mix_seed(rc.seed, 0xAC71, (u64)id)),
        deal_rng_(mix_seed(rc.seed, 0xDEA1)),
        prss_(rc.shamir, rc.seed, id) {
    std::vector<int> ids(cfg_.n);
    for (int i = 0; i < cfg_.n; ++i) ids[i] = i + 1;
    lagrange_full_ = lagrange_at_zero(ids);
  }

  int id() const { return id_; }
  const ShamirConfig& cfg() const { return cfg_; }
  const FxFormat& fmt() const { return fmt_; }
  TruncMode trunc_mode() const { return trunc_mode_; }
  CostReport& cost() { return cost_; }
  const CostReport& cost() const { return cost_; }
  std::mt19937_64& rng() { return rng_; }
  Prss& prss() { return prss_; }
  const std::vector<OpenRecord>& opened_log() const { return opened_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

  // ---- cost scoping ----------------------------------------------------
  void push_scope(const std::string& name) { scopes_.push_back(name); }
  void pop_scope() { scopes_.pop_back(); }
  void bump_counter(const std::string& name, u64 by = 1) { cost_.counters[name] += by; }

  // ---- sharing helpers ---------------------------------------------------
  Share share_of_public(Fe v) const { return Share{id_, v, ShareDegree::kTau}; }
  Share share_of_public_i64(i64 v) const { return share_of_public(Fe::from_signed(v)); }

  // Deal inputs from the run-level dealing stream: every party derives the
  // same polynomials and keeps its own evaluation, so no communication is
  // needed and all modes produce identical shares.
  std::vector<Share> deal_input(std::span<const i64> values) {
    std::vector<Share> mine(values.size());
    auto draw = [&] { return deal_rng_(); };
    for (size_t i = 0; i < values.size(); ++i) {
      auto all = share_secret(Fe::from_signed(values[i]), cfg_, draw);
      mine[i] = all[id_ - 1];
    }
    return mine;
  }

  // ---- collective primitives --------------------------------------------
  // All parties must reach these calls in the same order with the same
  // shapes; protocol code is straight-line and data-oblivious, so they do.

  class Batch;

  std::vector<Share> mul_vec(std::span<const Share> a, std::span<const Share> b);
  std::vector<Fe> open_vec(std::span<const Share> s, OpenTag tag, const std::string& label = {});

  Share mul(const Share& a, const Share& b) {
    return mul_vec(std::span(&a, 1), std::span(&b, 1))[0];
  }
  Fe open(const Share& s, OpenTag tag, const std::string& label = {}) {
    return open_vec(std::span(&s, 1), tag, label)[0];
  }

  // Non-interactive joint randomness.
  Share rand_shared() { return Share{id_, prss_.uniform_share(), ShareDegree::kTau}; }
  Share rand_bounded(int bits) { return Share{id_, prss_.bounded_share(bits), ShareDegree::kTau}; }
  int rand_bounded_slack() const { return prss_.bound_slack_bits(); }

  // Batched shared random bits (square-root method): two rounds for any
  // count, 2 interactive operations per bit.
  std::vector<Share> rand_bit_vec(size_t count);
  Share rand_bit() { return rand_bit_vec(1)[0]; }

  // Bit pool: lets multi-stage operations generate their whole bit demand up
  // front so later stages don't pay extra rounds.
  void prefetch_bits(size_t count) {
    if (bit_pool_.size() < count) {
      auto more = rand_bit_vec(count - bit_pool_.size());
      for (auto& b : more) bit_pool_.push_back(b);
    }
  }
  std::vector<Share> take_bits(size_t count) {
    prefetch_bits(count);
    std::vector<Share> out(bit_pool_.begin(), bit_pool_.begin() + (long)count);
    bit_pool_.erase(bit_pool_.begin(), bit_pool_.begin() + (long)count);
    return out;
  }

  // ---- outputs ------------------------------------------------------------
  void publish(const std::string& name, Fe v) { outputs_[name] = v; }
  const std::map<std::string, Fe>& outputs() const { return outputs_; }

 private:
  friend class Batch;

  void account(u64 ops, u64 bytes) {
    cost_.interactive_ops += ops;
    cost_.rounds += 1;
    cost_.bytes_sent += bytes;
    for (const auto& s : scopes_) {
      auto& sub = cost_.per_protocol[s];
      sub.ops += ops;
      sub.rounds += 1;
    }
  }

  void record_open(OpenTag tag, const std::string& label, Fe v) {
    if (!audit_) return;
    std::string scope;
    for (const auto& s : scopes_) {
      scope += '/';
      scope += s;
    }
    opened_.push_back(OpenRecord{scope, tag, label, v});
  }

  int id_;
  ShamirConfig cfg_;
  FxFormat fmt_;
  TruncMode trunc_mode_;
  std::chrono::milliseconds timeout_;
  bool audit_;
  bool capture_;
  Transport* transport_;
  std::mt19937_64 rng_;
  std::mt19937_64 deal_rng_;
  Prss prss_;
  std::vector<Fe> lagrange_full_;
  CostReport cost_;
  std::vector<std::string> scopes_;
  std::vector<OpenRecord> opened_;
  std::vector<TranscriptEntry> transcript_;
  std::deque<Share> bit_pool_;
  u32 round_seq_ = 0;
  std::map<std::string, Fe> outputs_;
};

struct CostScope {
  PartyContext& ctx;
  CostScope(PartyContext& c, const std::string& name) : ctx(c) { ctx.push_scope(name); }
  ~CostScope() { ctx.pop_scope(); }
};

// A batch of independent interactive requests served by one round of
// communication: each party sends one frame to every peer and receives one
// frame from every peer, regardless of how many requests are queued.
class PartyContext::Batch {
 public:
  explicit Batch(PartyContext& ctx) : ctx_(ctx) {}

  void add_mul(const Share& a, const Share& b, Share* out) {
    if (a.degree != ShareDegree::kTau || b.degree != ShareDegree::kTau)
      throw ProtocolError("mul requires degree-tau operands");
    muls_.push_back(MulReq{a.value * b.value, out});
  }
  void add_open(const Share& s, Fe* out, OpenTag tag, std::string label = {}) {
    opens_.push_back(OpenReq{s.value, out, tag, std::move(label)});
  }

  size_t size() const { return muls_.size() + opens_.size(); }

  // One communication phase. Multiplications degree-reduce via fresh
  // resharing of the local products; openings broadcast the share.
  void flush() {
    if (size() == 0) return;
    const int n = ctx_.cfg_.n;
    const int tau = ctx_.cfg_.tau;
    const u32 round = ctx_.round_seq_++;

    // Per-request resharing polynomials; remember own evaluations.
    std::vector<std::vector<Fe>> mul_evals(muls_.size());
    auto draw = [&] { return ctx_.rng_(); };
    for (size_t r = 0; r < muls_.size(); ++r) {
      std::vector<Fe> coeff(tau);
      for (auto& c : coeff) c = random_fe(draw);
      auto& evals = mul_evals[r];
      evals.resize(n + 1);
      for (int j = 1; j <= n; ++j) {
        Fe xj = Fe::from_u64((u64)j), acc = muls_[r].local_product, xp = xj;
        for (int t = 0; t < tau; ++t) {
          acc += coeff[t] * xp;
          xp *= xj;
        }
        evals[j] = acc;
      }
    }

    u64 sent = 0;
    for (int j = 1; j <= n; ++j) {
      if (j == ctx_.id_) continue;
      Frame f;
      f.sender = (unsigned char)ctx_.id_;
      f.round = round;
      f.payload.resize(16 * size());
      size_t off = 0;
      for (size_t r = 0; r < muls_.size(); ++r, off += 16)
        mul_evals[r][j].encode(f.payload.data() + off);
      for (size_t r = 0; r < opens_.size(); ++r, off += 16)
        opens_[r].value.encode(f.payload.data() + off);
      sent += f.payload.size() + 9;
      if (ctx_.capture_)
        ctx_.transcript_.push_back(TranscriptEntry{j, true, round, (u32)f.payload.size(),
                                                   hash_bytes(f.payload.data(), f.payload.size())});
      ctx_.transport_->send(j, std::move(f));
    }

    // Gather peer contributions; per-sender FIFO keeps rounds aligned.
    std::vector<std::vector<unsigned char>> incoming(n + 1);
    for (int j = 1; j <= n; ++j) {
      if (j == ctx_.id_) continue;
      Frame f = ctx_.transport_->recv(j, ctx_.timeout_);
      if (f.round != round)
        throw ProtocolError("round tag mismatch: parties diverged");
      if (f.payload.size() != 16 * size())
        throw ProtocolError("frame size mismatch: parties diverged");
      if (ctx_.capture_)
        ctx_.transcript_.push_back(TranscriptEntry{j, false, round, (u32)f.payload.size(),
                                                   hash_bytes(f.payload.data(), f.payload.size())});
      incoming[j] = std::move(f.payload);
    }

    for (size_t r = 0; r < muls_.size(); ++r) {
      Fe acc(0);
      for (int j = 1; j <= n; ++j) {
        Fe v = (j == ctx_.id_) ? mul_evals[r][ctx_.id_]
                               : Fe::decode(incoming[j].data() + 16 * r);
        acc += ctx_.lagrange_full_[j - 1] * v;
      }
      *muls_[r].out = Share{ctx_.id_, acc, ShareDegree::kTau};
    }
    size_t base = 16 * muls_.size();
    for (size_t r = 0; r < opens_.size(); ++r) {
      Fe acc(0);
      for (int j = 1; j <= n; ++j) {
        Fe v = (j == ctx_.id_) ? opens_[r].value
                               : Fe::decode(incoming[j].data() + base + 16 * r);
        acc += ctx_.lagrange_full_[j - 1] * v;
      }
      *opens_[r].out = acc;
      ctx_.record_open(opens_[r].tag, opens_[r].label, acc);
    }

    ctx_.account(size(), sent);
    muls_.clear();
    opens_.clear();
  }

 private:
  struct MulReq {
    Fe local_product;
    Share* out;
  };
  struct OpenReq {
    Fe value;
    Fe* out;
    OpenTag tag;
    std::string label;
  };
  PartyContext& ctx_;
  std::vector<MulReq> muls_;
  std::vector<OpenReq> opens_;
};

inline std::vector<Share> PartyContext::mul_vec(std::span<const Share> a,
                                                std::span<const Share> b) {
  if (a.size() != b.size()) throw ArityError("mul_vec: size mismatch");
  std::vector<Share> out(a.size());
  Batch batch(*this);
  for (size_t i = 0; i < a.size(); ++i) batch.add_mul(a[i], b[i], &out[i]);
  batch.flush();
  return out;
}

inline std::vector<Fe> PartyContext::open_vec(std::span<const Share> s, OpenTag tag,
                                              const std::string& label) {
  std::vector<Fe> out(s.size());
  Batch batch(*this);
  for (size_t i = 0; i < s.size(); ++i) batch.add_open(s[i], &out[i], tag, label);
  batch.flush();
  return out;
}

inline std::vector<Share> PartyContext::rand_bit_vec(size_t count) {
  std::vector<Share> bits(count);
  std::vector<size_t> todo(count);
  for (size_t i = 0; i < count; ++i) todo[i] = i;
  const Fe inv2 = Fe::from_u64(2).inv();
  while (!todo.empty()) {
    std::vector<Share> r(todo.size());
    for (auto& s : r) s = rand_shared();
    auto sq = mul_vec(r, r);
    auto opened = open_vec(sq, OpenTag::kRandomSquare);
    std::vector<size_t> retry;
    for (size_t i = 0; i < todo.size(); ++i) {
      if (opened[i] == Fe(0)) {  // r was zero; try again
        retry.push_back(todo[i]);
        continue;
      }
      Fe t = opened[i].sqrt();
      // r/t is uniform in {-1, +1}; map to {0, 1}.
      Fe bit = (r[i].value * t.inv() + Fe(1)) * inv2;
      bits[todo[i]] = Share{id_, bit, ShareDegree::kTau};
    }
    todo = std::move(retry);
  }
  return bits;
}

// ---------------------------------------------------------------------------

using Program = std::function<void(PartyContext&)>;

class RunHandle {
 public:
  RunHandle(const RunConfig& rc, Program program) : rc_(rc) {
    rc_.validate();
    hub_ = std::make_unique<InProcHub>(rc_.shamir.n);
    contexts_.resize(rc_.shamir.n);
    transports_.resize(rc_.shamir.n);
    errors_.resize(rc_.shamir.n);
    for (int i = 1; i <= rc_.shamir.n; ++i) {
      transports_[i - 1] = std::make_unique<InProcTransport>(hub_.get(), i);
      contexts_[i - 1] = std::make_unique<PartyContext>(rc_, i, transports_[i - 1].get());
    }
    for (int i = 0; i < rc_.shamir.n; ++i) {
      threads_.emplace_back([this, i, program] {
        try {
          program(*contexts_[i]);
        } catch (...) {
          errors_[i] = std::current_exception();
        }
      });
    }
  }

  ~RunHandle() {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
  }

  void join() {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
    for (auto& e : errors_)
      if (e) std::rethrow_exception(e);
  }

  PartyContext& party(int id) { return *contexts_[id - 1]; }
  int n() const { return rc_.shamir.n; }

  const CostReport& cost_report() { return party(1).cost(); }

  // The named output, checked for agreement across all parties.
  Fe output(const std::string& name) {
    Fe v = party(1).outputs().at(name);
    for (int i = 2; i <= n(); ++i)
      if (!(party(i).outputs().at(name) == v)) throw ProtocolError("parties disagree on " + name);
    return v;
  }

 private:
  RunConfig rc_;
  std::unique_ptr<InProcHub> hub_;
  std::vector<std::unique_ptr<InProcTransport>> transports_;
  std::vector<std::unique_ptr<PartyContext>> contexts_;
  std::vector<std::thread> threads_;
  std::vector<std::exception_ptr> errors_;
};

// Spawn n in-process parties running the same program.
inline RunHandle spawn_parties(const RunConfig& rc, Program program) {
  if (rc.mode != RunConfig::kLocal) throw ConfigError("spawn_parties is for local mode");
  return RunHandle(rc, std::move(program));
}

// Run one party of a TCP deployment in the calling thread; the returned
// bundle keeps the transport alive alongside the context.
struct TcpPartyRun {
  std::unique_ptr<TcpTransport> transport;
  std::unique_ptr<PartyContext> ctx;
};

inline TcpPartyRun run_tcp_party(const RunConfig& rc, Program program) {
  rc.validate();
  if (rc.mode != RunConfig::kTcp) throw ConfigError("run_tcp_party needs tcp mode");
  TcpPartyRun run;
  run.transport = std::make_unique<TcpTransport>(rc.tcp_party, rc.topology, rc.round_timeout);
  run.ctx = std::make_unique<PartyContext>(rc, rc.tcp_party, run.transport.get());
  program(*run.ctx);
  return run;
}

}  // namespace oblivfp
