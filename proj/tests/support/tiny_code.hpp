#pragma once

// Test-only small block codes and an exhaustive error-probability oracle.
// Nothing here reuses the library's recovery or estimation paths.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "codednfv/error.hpp"
#include "codednfv/gf2.hpp"
#include "codednfv/nfv.hpp"

namespace codednfv::testing {

/// Linear block code given by a k x n generator matrix.
class BlockCode {
 public:
  explicit BlockCode(BitMatrix generator) : g_(std::move(generator)) {}

  static BlockCode repetition(std::size_t n) {
    BitMatrix g(1, n);
    for (std::size_t j = 0; j < n; ++j) g.set(0, j, true);
    return BlockCode(g);
  }

  std::size_t k() const { return g_.rows(); }
  std::size_t n() const { return g_.cols(); }
  const BitMatrix& generator() const { return g_; }

  BitVec encode(const BitVec& u) const { return g_.left_multiply(u); }

 private:
  BitMatrix g_;
};

inline BitVec bits_of(std::uint64_t value, std::size_t len) {
  BitVec v(len);
  for (std::size_t i = 0; i < len; ++i) v.set(i, (value >> i) & 1U);
  return v;
}

/// Brute-force ML decoder; among equidistant codewords the smallest message
/// index wins.
class BlockDecoder {
 public:
  explicit BlockDecoder(const BlockCode& code) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << code.k()); ++m) {
      messages_.push_back(bits_of(m, code.k()));
      codewords_.push_back(code.encode(messages_.back()));
    }
  }

  BitVec decode(const BitVec& y) {
    std::size_t best = 0;
    std::size_t best_dist = (codewords_[0] ^ y).weight();
    for (std::size_t m = 1; m < codewords_.size(); ++m) {
      const std::size_t d = (codewords_[m] ^ y).weight();
      if (d < best_dist) {
        best = m;
        best_dist = d;
      }
    }
    return messages_[best];
  }

 private:
  std::vector<BitVec> messages_;
  std::vector<BitVec> codewords_;
};

inline BlockDecoder make_decoder(const BlockCode& code) { return BlockDecoder(code); }

/// Exact end-to-end error probability by enumerating every message tuple,
/// every noise pattern on all K frames and every availability pattern.
/// Success means exactly one message tuple agrees with the outputs of the
/// available, correctly-decoding servers.
inline double oracle_perr_tiny(const BlockCode& code, const NfvScheme& scheme, double p, double q) {
  const std::size_t k = code.k();
  const std::size_t n = code.n();
  const std::size_t frames = scheme.n_frames();
  const std::size_t servers = scheme.n_servers();
  if (n > 14 || frames > 2 || servers > 3) throw Error(ErrorKind::TooLarge, "oracle limited to n<=14, K<=2, N<=3");
  const BitMatrix& g = scheme.matrix();

  // Independent ML decoding by exhaustive distance comparison.
  auto ml_decode = [&](std::uint64_t word) {
    std::uint64_t best = 0;
    std::size_t best_dist = n + 1;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
      std::uint64_t cw = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if ((m >> i) & 1U) {
          for (std::size_t j = 0; j < n; ++j) {
            if (code.generator().get(i, j)) cw ^= std::uint64_t{1} << j;
          }
        }
      }
      const auto d = static_cast<std::size_t>(std::popcount(cw ^ word));
      if (d < best_dist) {
        best_dist = d;
        best = m;
      }
    }
    return best;
  };
  auto encode_int = [&](std::uint64_t m) {
    std::uint64_t cw = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if ((m >> i) & 1U) {
        for (std::size_t j = 0; j < n; ++j) {
          if (code.generator().get(i, j)) cw ^= std::uint64_t{1} << j;
        }
      }
    }
    return cw;
  };

  const std::uint64_t msg_count = std::uint64_t{1} << k;
  const std::uint64_t tuple_count = std::uint64_t{1} << (k * frames);
  const std::uint64_t noise_count = std::uint64_t{1} << (n * frames);
  const std::uint64_t mask_n = (std::uint64_t{1} << n) - 1;
  const std::uint64_t mask_k = msg_count - 1;

  double success = 0.0;
  for (std::uint64_t tuple = 0; tuple < tuple_count; ++tuple) {
    std::vector<std::uint64_t> u(frames);
    for (std::size_t i = 0; i < frames; ++i) u[i] = (tuple >> (i * k)) & mask_k;
    for (std::uint64_t noise = 0; noise < noise_count; ++noise) {
      const int flips = std::popcount(noise);
      const double p_noise = std::pow(p, flips) * std::pow(1.0 - p, static_cast<int>(n * frames) - flips);
      if (p_noise == 0.0) continue;
      std::vector<std::uint64_t> decoded(servers);
      std::vector<bool> correct(servers);
      for (std::size_t j = 0; j < servers; ++j) {
        std::uint64_t input = 0;
        std::uint64_t target = 0;
        for (std::size_t i = 0; i < frames; ++i) {
          if (g.get(i, j)) {
            input ^= encode_int(u[i]) ^ ((noise >> (i * n)) & mask_n);
            target ^= u[i];
          }
        }
        decoded[j] = ml_decode(input);
        correct[j] = decoded[j] == target;
      }
      for (std::uint64_t avail = 0; avail < (std::uint64_t{1} << servers); ++avail) {
        const int up = std::popcount(avail);
        const double p_avail = std::pow(1.0 - q, up) * std::pow(q, static_cast<int>(servers) - up);
        if (p_avail == 0.0) continue;
        std::size_t consistent = 0;
        for (std::uint64_t cand = 0; cand < tuple_count; ++cand) {
          bool ok = true;
          for (std::size_t j = 0; j < servers && ok; ++j) {
            if (!((avail >> j) & 1U) || !correct[j]) continue;
            std::uint64_t combo = 0;
            for (std::size_t i = 0; i < frames; ++i) {
              if (g.get(i, j)) combo ^= (cand >> (i * k)) & mask_k;
            }
            ok = combo == decoded[j];
          }
          if (ok) ++consistent;
        }
        if (consistent == 1) success += p_noise * p_avail / static_cast<double>(tuple_count);
      }
    }
  }
  return 1.0 - success;
}

}  // namespace codednfv::testing
