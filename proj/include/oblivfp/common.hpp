#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace oblivfp {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Error classes, one per failure domain. The CLI maps them to exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised by the randomized selection protocol once its retry budget is spent.
struct AbortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline u64 splitmix64(u64& state) {
  u64 z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless mix of several words into one, used to derive stream seeds.
inline u64 mix_seed(u64 a, u64 b, u64 c = 0) {
  u64 s = a;
  (void)splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL;
  (void)splitmix64(s);
  s ^= c + 0xc2b2ae3d27d4eb4fULL;
  return splitmix64(s);
}

inline int ceil_log2(u64 x) {
  int b = 0;
  u64 v = 1;
  while (v < x) {
    v <<= 1;
    ++b;
  }
  return b;
}

inline u64 next_pow2(u64 x) {
  u64 v = 1;
  while (v < x) v <<= 1;
  return v;
}

}  // namespace oblivfp
