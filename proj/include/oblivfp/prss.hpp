#pragma once

#include <vector>

#include "oblivfp/shamir.hpp"

namespace oblivfp {

// Non-interactive pseudorandom secret sharing (replicated-key style).
//
// For every subset A of tau parties there is a key k_A held by the parties
// outside A, and a degree-tau polynomial f_A with f_A(0) = 1 and f_A(j) = 0
// for j in A. A joint random sharing is r_i = sum_A prg(k_A, ctr) * f_A(i);
// the secret is sum_A prg(k_A, ctr). No messages are exchanged, so drawing
// shared randomness is free in both the operation and round counters.
//
// Keys are derived from the run seed, which every computational party knows
// in this artifact; the sharing still has the degree/consistency shape the
// interactive protocols rely on, and unit tests check both.
class Prss {
 public:
  Prss() = default;

  Prss(const ShamirConfig& cfg, u64 run_seed, int my_id) {
    std::vector<int> subset;
    enumerate(cfg, run_seed, my_id, subset, 1);
    subset_count_ = 1;
    // C(n, tau) for range accounting of bounded draws
    u64 c = 1;
    for (int t = 1; t <= cfg.tau; ++t) c = c * u64(cfg.n - t + 1) / u64(t);
    subset_count_ = c;
  }

  // log2 upper bound on the number of summands in a bounded draw
  int bound_slack_bits() const { return ceil_log2(subset_count_); }

  // Share of a fresh uniform field element.
  Fe uniform_share() {
    u64 ctr = ctr_++;
    Fe acc(0);
    for (const auto& e : entries_) {
      u64 widx = 0;
      auto draw = [&] { return word(e.key, ctr, widx++); };
      acc += random_fe(draw) * e.weight;
    }
    return acc;
  }

  // Share of a fresh random value equal to the sum of one uniform b-bit
  // integer per subset key (so the opened value is < C(n,tau) * 2^bits).
  Fe bounded_share(int bits) {
    u64 ctr = ctr_++;
    Fe acc(0);
    for (const auto& e : entries_) {
      u64 widx = 0;
      auto draw = [&] { return word(e.key, ctr, widx++); };
      acc += random_bits_fe(draw, bits) * e.weight;
    }
    return acc;
  }

 private:
  struct Entry {
    u64 key;
    Fe weight;  // f_A evaluated at my party id
  };

  static u64 word(u64 key, u64 ctr, u64 widx) { return mix_seed(key ^ 0x5052535341ULL, ctr, widx); }

  void enumerate(const ShamirConfig& cfg, u64 run_seed, int my_id, std::vector<int>& subset,
                 int from) {
    if ((int)subset.size() == cfg.tau) {
      bool mine = true;
      for (int j : subset)
        if (j == my_id) mine = false;
      if (mine) {
        u64 mask = 0;
        for (int j : subset) mask |= (u64(1) << j);
        Fe w(1);
        for (int j : subset) {
          // f_A(x) = prod_{j in A} (j - x) / j
          w *= Fe::from_signed(j - my_id) * Fe::from_u64((u64)j).inv();
        }
        entries_.push_back(Entry{mix_seed(run_seed, 0x70727373ULL, mask), w});
      }
      return;
    }
    for (int j = from; j <= cfg.n; ++j) {
      subset.push_back(j);
      enumerate(cfg, run_seed, my_id, subset, j + 1);
      subset.pop_back();
    }
  }

  std::vector<Entry> entries_;
  u64 ctr_ = 0;
  u64 subset_count_ = 1;
};

}  // namespace oblivfp
