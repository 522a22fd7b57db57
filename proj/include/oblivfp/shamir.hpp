#pragma once

#include <random>
#include <span>
#include <vector>

#include "oblivfp/field.hpp"

namespace oblivfp {

// Degree tag carried by every share: tau after resharing, 2*tau right after a
// local product of two degree-tau shares.
enum class ShareDegree : unsigned char { kTau = 0, kTwoTau = 1 };

struct ShamirConfig {
  int n = 3;          // party count, ids 1..n
  int tau = 1;        // corruption threshold, tau < n/2
  int kappa = 48;     // statistical security parameter (bits)

  void validate() const {
    if (n < 3) throw ConfigError("at least 3 parties required");
    if (tau < 1 || 2 * tau >= n) throw ConfigError("threshold must satisfy 1 <= tau < n/2");
    if (kappa < 8 || kappa > 100) throw ConfigError("kappa out of range");
  }
};

struct Share {
  int party_id = 0;  // 1..n
  Fe value;
  ShareDegree degree = ShareDegree::kTau;
};

// Wire encoding: 16-byte little-endian field value followed by a 1-byte
// degree tag.
inline void encode_share(const Share& s, unsigned char out[17]) {
  s.value.encode(out);
  out[16] = (unsigned char)s.degree;
}
inline Share decode_share(const unsigned char in[17], int party_id) {
  Share s;
  s.party_id = party_id;
  s.value = Fe::decode(in);
  if (in[16] > 1) throw ParseError("bad share degree tag");
  s.degree = (ShareDegree)in[16];
  return s;
}

// Lagrange coefficients for interpolating f(0) from points xs (party ids).
inline std::vector<Fe> lagrange_at_zero(std::span<const int> xs) {
  std::vector<Fe> w(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    Fe num(1), den(1);
    Fe xj = Fe::from_signed(xs[j]);
    for (size_t t = 0; t < xs.size(); ++t) {
      if (t == j) continue;
      Fe xt = Fe::from_signed(xs[t]);
      num *= xt;        // (0 - x_t) up to sign
      den *= xt - xj;   // (x_j - x_t) up to the same sign
    }
    w[j] = num * den.inv();
  }
  return w;
}

// Split x into n shares on a random degree-tau polynomial.
template <class Prg>
std::vector<Share> share_secret(Fe x, const ShamirConfig& cfg, Prg&& draw) {
  cfg.validate();
  std::vector<Fe> coeff(cfg.tau);
  for (auto& c : coeff) c = random_fe(draw);
  std::vector<Share> out(cfg.n);
  for (int i = 1; i <= cfg.n; ++i) {
    Fe xi = Fe::from_u64((u64)i);
    Fe acc = x, xp = xi;
    for (int t = 0; t < cfg.tau; ++t) {
      acc += coeff[t] * xp;
      xp *= xi;
    }
    out[i - 1] = Share{i, acc, ShareDegree::kTau};
  }
  return out;
}

// Interpolate the secret from any tau+1 (degree tau) or 2tau+1 (degree 2tau)
// shares with distinct party ids.
inline Fe reconstruct(std::span<const Share> shares, const ShamirConfig& cfg) {
  if (shares.empty()) throw ArityError("no shares given");
  ShareDegree d = shares[0].degree;
  size_t need = (d == ShareDegree::kTau) ? size_t(cfg.tau + 1) : size_t(2 * cfg.tau + 1);
  if (shares.size() < need) throw ArityError("not enough shares to reconstruct");
  std::vector<int> ids;
  ids.reserve(shares.size());
  for (const auto& s : shares) {
    if (s.degree != d) throw ArityError("mixed share degrees");
    for (int seen : ids)
      if (seen == s.party_id) throw ArityError("duplicate party id");
    ids.push_back(s.party_id);
  }
  auto w = lagrange_at_zero(ids);
  Fe acc(0);
  for (size_t j = 0; j < shares.size(); ++j) acc += w[j] * shares[j].value;
  return acc;
}

}  // namespace oblivfp
