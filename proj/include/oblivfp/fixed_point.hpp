#pragma once

#include <cmath>
#include <string>

#include "oblivfp/common.hpp"

namespace oblivfp {

// Signed fixed-point format: ell total bits, k of them after the radix point.
// Two's-complement semantics over the ell-bit range; this is the same signed
// embedding the secret-sharing layer uses.
struct FxFormat {
  int ell = 56;
  int k = 32;

  void validate() const {
    if (ell <= 0 || ell > 62) throw ConfigError("ell must be in (0, 62]");
    if (k <= 0 || k >= ell) throw ConfigError("k must satisfy 0 < k < ell");
    if (ell % 2 != 0 || k % 2 != 0) throw ConfigError("ell and k must be even");
  }
  i64 max_raw() const { return (i64(1) << (ell - 1)) - 1; }
  i64 min_raw() const { return -(i64(1) << (ell - 1)); }
  bool raw_in_range(i128 raw) const { return raw >= min_raw() && raw <= max_raw(); }

  friend bool operator==(const FxFormat& a, const FxFormat& b) {
    return a.ell == b.ell && a.k == b.k;
  }
};

struct FxValue {
  i64 raw = 0;
  FxFormat fmt;

  long double to_real() const { return (long double)raw / std::exp2l((long double)fmt.k); }
};

inline FxValue fx_from_raw(i64 raw, FxFormat fmt) {
  if (!fmt.raw_in_range(raw)) throw RangeError("fixed-point raw value out of range");
  return FxValue{raw, fmt};
}

// raw = floor(r * 2^k). Requires |r| < 2^(ell-k-1).
inline FxValue fx_encode(long double r, FxFormat fmt) {
  long double scaled = std::floorl(r * std::exp2l((long double)fmt.k));
  if (!(scaled >= (long double)fmt.min_raw() && scaled <= (long double)fmt.max_raw()))
    throw RangeError("fx_encode: value out of representable range");
  return FxValue{(i64)scaled, fmt};
}

inline FxValue fx_encode_int(i64 v, FxFormat fmt) {
  i128 raw = i128(v) << fmt.k;
  if (!fmt.raw_in_range(raw)) throw RangeError("fx_encode_int: out of range");
  return FxValue{(i64)raw, fmt};
}

inline FxValue fx_add(FxValue a, FxValue b) {
  if (!(a.fmt == b.fmt)) throw RangeError("fx_add: format mismatch");
  i128 r = i128(a.raw) + b.raw;
  if (!a.fmt.raw_in_range(r)) throw RangeError("fx_add: overflow");
  return FxValue{(i64)r, a.fmt};
}

inline FxValue fx_sub(FxValue a, FxValue b) {
  if (!(a.fmt == b.fmt)) throw RangeError("fx_sub: format mismatch");
  i128 r = i128(a.raw) - b.raw;
  if (!a.fmt.raw_in_range(r)) throw RangeError("fx_sub: overflow");
  return FxValue{(i64)r, a.fmt};
}

inline FxValue fx_neg(FxValue a) {
  i128 r = -i128(a.raw);
  if (!a.fmt.raw_in_range(r)) throw RangeError("fx_neg: overflow");
  return FxValue{(i64)r, a.fmt};
}

// raw = floor(a.raw * b.raw / 2^k); truncation is toward minus infinity so
// the deterministic oracle matches the floor that probabilistic truncation
// rounds around.
inline FxValue fx_mul(FxValue a, FxValue b) {
  if (!(a.fmt == b.fmt)) throw RangeError("fx_mul: format mismatch");
  i128 prod = i128(a.raw) * i128(b.raw);
  i128 r = prod >> a.fmt.k;  // arithmetic shift: floor for negatives too
  if (!a.fmt.raw_in_range(r)) throw RangeError("fx_mul: overflow");
  return FxValue{(i64)r, a.fmt};
}

// floor(a / b) in fixed point, exact integer arithmetic.
inline FxValue fx_div_floor(FxValue a, FxValue b) {
  if (!(a.fmt == b.fmt)) throw RangeError("fx_div_floor: format mismatch");
  if (b.raw == 0) throw DomainError("fx_div_floor: division by zero");
  i128 num = i128(a.raw) << a.fmt.k;
  i128 q = num / b.raw;
  if ((num % b.raw) != 0 && ((num < 0) != (b.raw < 0))) --q;
  if (!a.fmt.raw_in_range(q)) throw RangeError("fx_div_floor: overflow");
  return FxValue{(i64)q, a.fmt};
}

// Truncate all fractional bits, toward minus infinity.
inline i64 fx_to_int_floor(FxValue a) { return a.raw >> a.fmt.k; }

// Exact value comparison helpers for tests.
inline long double fx_ulp(FxFormat fmt) { return std::exp2l((long double)-fmt.k); }

}  // namespace oblivfp
