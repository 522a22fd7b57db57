#pragma once

#include <mpfr.h>

#include "oblivfp/fixed_point.hpp"

namespace oblivfp {

// Reference evaluations at 256 bits of working precision (comfortably more
// than twice any supported ell), used as the ground-truth oracle against
// which every secure numeric protocol is checked.
namespace refdetail {

constexpr mpfr_prec_t kPrec = 256;

class Scoped {
 public:
  Scoped() { mpfr_init2(v, kPrec); }
  explicit Scoped(long double x) : Scoped() { mpfr_set_ld(v, x, MPFR_RNDN); }
  ~Scoped() { mpfr_clear(v); }
  Scoped(const Scoped&) = delete;
  Scoped& operator=(const Scoped&) = delete;
  mpfr_t v;
};

inline void set_fx(mpfr_t out, FxValue a) {
  mpfr_set_sj(out, (intmax_t)a.raw, MPFR_RNDN);
  mpfr_div_2si(out, out, a.fmt.k, MPFR_RNDN);
}

// Round the high-precision result to the nearest representable fixed-point
// value.
inline FxValue to_fx(mpfr_t x, FxFormat fmt) {
  Scoped t;
  mpfr_mul_2si(t.v, x, fmt.k, MPFR_RNDN);
  mpfr_round(t.v, t.v);
  intmax_t raw = mpfr_get_sj(t.v, MPFR_RNDN);
  if (!fmt.raw_in_range((i128)raw)) throw RangeError("reference result out of range");
  return FxValue{(i64)raw, fmt};
}

}  // namespace refdetail

// Degrees in, dimensionless out.
inline long double ref_sin_deg(long double deg) {
  refdetail::Scoped x(deg), pi, r;
  mpfr_const_pi(pi.v, MPFR_RNDN);
  mpfr_mul(x.v, x.v, pi.v, MPFR_RNDN);
  mpfr_div_si(x.v, x.v, 180, MPFR_RNDN);
  mpfr_sin(r.v, x.v, MPFR_RNDN);
  return mpfr_get_ld(r.v, MPFR_RNDN);
}

inline long double ref_cos_deg(long double deg) {
  refdetail::Scoped x(deg), pi, r;
  mpfr_const_pi(pi.v, MPFR_RNDN);
  mpfr_mul(x.v, x.v, pi.v, MPFR_RNDN);
  mpfr_div_si(x.v, x.v, 180, MPFR_RNDN);
  mpfr_cos(r.v, x.v, MPFR_RNDN);
  return mpfr_get_ld(r.v, MPFR_RNDN);
}

inline long double ref_arctan(long double x) {
  refdetail::Scoped a(x), r;
  mpfr_atan(r.v, a.v, MPFR_RNDN);
  return mpfr_get_ld(r.v, MPFR_RNDN);
}

inline long double ref_sqrt(long double x) {
  if (x < 0) throw DomainError("ref_sqrt: negative input");
  refdetail::Scoped a(x), r;
  mpfr_sqrt(r.v, a.v, MPFR_RNDN);
  return mpfr_get_ld(r.v, MPFR_RNDN);
}

inline long double ref_div(long double a, long double b) {
  if (b == 0) throw DomainError("ref_div: division by zero");
  refdetail::Scoped x(a), y(b), r;
  mpfr_div(r.v, x.v, y.v, MPFR_RNDN);
  return mpfr_get_ld(r.v, MPFR_RNDN);
}

enum class RefFn { kSinDeg, kCosDeg, kArctan, kSqrt, kDiv };

// Fixed-point front end: exact fixed-point input, correctly rounded
// fixed-point output.
inline FxValue ref_eval(RefFn fn, FxValue a, const FxValue* b = nullptr) {
  refdetail::Scoped x, r, pi;
  refdetail::set_fx(x.v, a);
  switch (fn) {
    case RefFn::kSinDeg:
      mpfr_const_pi(pi.v, MPFR_RNDN);
      mpfr_mul(x.v, x.v, pi.v, MPFR_RNDN);
      mpfr_div_si(x.v, x.v, 180, MPFR_RNDN);
      mpfr_sin(r.v, x.v, MPFR_RNDN);
      break;
    case RefFn::kCosDeg:
      mpfr_const_pi(pi.v, MPFR_RNDN);
      mpfr_mul(x.v, x.v, pi.v, MPFR_RNDN);
      mpfr_div_si(x.v, x.v, 180, MPFR_RNDN);
      mpfr_cos(r.v, x.v, MPFR_RNDN);
      break;
    case RefFn::kArctan:
      mpfr_atan(r.v, x.v, MPFR_RNDN);
      break;
    case RefFn::kSqrt:
      if (a.raw < 0) throw DomainError("ref_eval: sqrt of negative value");
      mpfr_sqrt(r.v, x.v, MPFR_RNDN);
      break;
    case RefFn::kDiv: {
      if (b == nullptr) throw ArityError("ref_eval: div needs two arguments");
      if (b->raw == 0) throw DomainError("ref_eval: division by zero");
      refdetail::Scoped y;
      refdetail::set_fx(y.v, *b);
      mpfr_div(r.v, x.v, y.v, MPFR_RNDN);
      break;
    }
  }
  return refdetail::to_fx(r.v, a.fmt);
}

}  // namespace oblivfp
