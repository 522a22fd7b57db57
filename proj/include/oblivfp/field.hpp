#pragma once

#include <array>
#include <cstring>

#include "oblivfp/common.hpp"

namespace oblivfp {

// Arithmetic modulo the Mersenne prime p = 2^127 - 1.
//
// Elements are kept reduced to [0, p). The 127-bit width leaves enough
// headroom over the 56-bit value range for statistically masked openings
// (kappa slack bits) plus the degree tags used by the sharing layer.
class Fe {
 public:
  static constexpr u128 modulus() { return (u128(1) << 127) - 1; }

  constexpr Fe() : v_(0) {}
  explicit constexpr Fe(u128 v) : v_(v % modulus()) {}

  static Fe from_u64(u64 v) { return Fe(u128(v)); }

  // Signed embedding: x >= 0 maps to x, x < 0 maps to p - |x|.
  static Fe from_signed(i128 x) {
    if (x >= 0) return Fe(u128(x));
    return Fe(modulus() - u128(-x));
  }

  // Inverse of the signed embedding for values known to fit in `bits` bits.
  i128 to_signed() const {
    if (v_ > modulus() / 2) return -i128(modulus() - v_);
    return i128(v_);
  }

  u128 raw() const { return v_; }

  friend Fe operator+(Fe a, Fe b) {
    u128 s = a.v_ + b.v_;  // < 2^128, no overflow
    if (s >= modulus()) s -= modulus();
    return Fe::reduced(s);
  }
  friend Fe operator-(Fe a, Fe b) {
    u128 s = a.v_ >= b.v_ ? a.v_ - b.v_ : a.v_ + (modulus() - b.v_);
    return Fe::reduced(s);
  }
  friend Fe operator*(Fe a, Fe b) { return mul(a, b); }
  Fe operator-() const { return v_ == 0 ? *this : Fe::reduced(modulus() - v_); }

  Fe& operator+=(Fe o) { return *this = *this + o; }
  Fe& operator-=(Fe o) { return *this = *this - o; }
  Fe& operator*=(Fe o) { return *this = *this * o; }

  friend bool operator==(Fe a, Fe b) { return a.v_ == b.v_; }
  friend bool operator!=(Fe a, Fe b) { return a.v_ != b.v_; }

  static Fe mul(Fe a, Fe b) {
    // 64x64 limb products, then Mersenne fold: H*2^127 + L == H + L (mod p).
    u64 a0 = u64(a.v_), a1 = u64(a.v_ >> 64);
    u64 b0 = u64(b.v_), b1 = u64(b.v_ >> 64);
    u128 lo = u128(a0) * b0;
    u128 mid1 = u128(a0) * b1;
    u128 mid2 = u128(a1) * b0;
    u128 hi = u128(a1) * b1;  // a1,b1 < 2^63 so hi < 2^126

    // Accumulate the 256-bit product into (high, low) 128-bit halves.
    u128 mid = mid1 + mid2;  // < 2^128 (each < 2^127)
    u128 carry = mid < mid1 ? (u128(1) << 64) : 0;
    u128 low = lo + (mid << 64);
    u128 high = hi + (mid >> 64) + carry + (low < lo ? 1 : 0);

    // product = high*2^128 + low = 2*high*2^127 + low
    u128 folded = (low & modulus()) + (low >> 127) + ((high % modulus()) * 2);
    while (folded >= modulus()) folded -= modulus();
    return Fe::reduced(folded);
  }

  Fe pow(u128 e) const {
    Fe r(1), base = *this;
    while (e != 0) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  Fe inv() const {
    if (v_ == 0) throw DomainError("field inverse of zero");
    return pow(modulus() - 2);
  }

  // Square root for quadratic residues; p == 3 (mod 4) so x^((p+1)/4) works.
  // Returns the root in [0, p/2] (the canonical one).
  Fe sqrt() const {
    Fe r = pow((modulus() + 1) / 4);
    if (r * r != *this) throw DomainError("field sqrt of non-residue");
    if (r.v_ > modulus() / 2) r = -r;
    return r;
  }

  // 16-byte little-endian encoding (top bit of the last byte always clear).
  void encode(unsigned char out[16]) const {
    u128 v = v_;
    for (int i = 0; i < 16; ++i) out[i] = (unsigned char)(v >> (8 * i));
  }
  static Fe decode(const unsigned char in[16]) {
    u128 v = 0;
    for (int i = 0; i < 16; ++i) v |= u128(in[i]) << (8 * i);
    if (v >= modulus()) throw ParseError("field element out of range");
    return Fe::reduced(v);
  }

 private:
  static constexpr Fe reduced(u128 v) {
    Fe f;
    f.v_ = v;
    return f;
  }
  u128 v_;
};

// Uniform field element from a 64-bit PRG stream. p = 2^127 - 1, so masking
// to 127 bits is uniform except for the single value p, which is rejected.
template <class Prg>
Fe random_fe(Prg&& draw) {
  for (;;) {
    u128 v = (u128(draw()) << 64) | draw();
    v &= Fe::modulus();  // clear bit 127
    if (v != Fe::modulus()) return Fe(v);
  }
}

// Uniform value in [0, 2^bits) as a field element, bits <= 126.
template <class Prg>
Fe random_bits_fe(Prg&& draw, int bits) {
  u128 v = (u128(draw()) << 64) | draw();
  if (bits < 128) v &= (u128(1) << bits) - 1;
  return Fe(v);
}

}  // namespace oblivfp
