#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "codednfv/error.hpp"
#include "codednfv/gf2.hpp"

namespace codednfv {

enum class StreamPurpose : std::uint64_t {
  Message = 1,
  Noise = 2,
  Availability = 3,
  Search = 4,
};

/// Random stream keyed by (master seed, trial index, purpose). The key is
/// hashed into the seed of a private engine, so a trial's draws do not
/// depend on which worker runs it or in what order.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t trial, StreamPurpose purpose)
      : engine_(mix(mix(mix(master_seed) ^ trial) ^ static_cast<std::uint64_t>(purpose))) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability `prob`; exact at 0 and 1.
  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArg, std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

struct BscChannel {
  double p;

  explicit BscChannel(double crossover) : p(crossover) { check_probability(p, "crossover probability p"); }
};

struct ServerFailureModel {
  double q;
  std::size_t n_servers;

  ServerFailureModel(double failure_prob, std::size_t servers) : q(failure_prob), n_servers(servers) {
    check_probability(q, "failure probability q");
    if (n_servers > 64) throw Error(ErrorKind::TooLarge, "availability masks hold at most 64 servers");
  }
};

/// Server-indexed bit set; bit j refers to server j + 1.
using ServerMask = std::uint64_t;

inline BitVec sample_noise(const BscChannel& ch, std::size_t len, RngStream& rng) {
  BitVec z(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.bernoulli(ch.p)) z.set(i, true);
  }
  return z;
}

/// Probability that the XOR of d independent Bernoulli(p) bits is 1, i.e.
/// (1 - (1 - 2p)^d) / 2. Evaluated by the parity recurrence so that d = 1
/// returns p and d = 2 returns 2p(1 - p) without rounding drift.
inline double effective_p(double p, std::size_t d) {
  check_probability(p, "p");
  if (d == 0) throw Error(ErrorKind::InvalidArg, "effective_p needs d >= 1");
  double e = p;
  for (std::size_t i = 1; i < d; ++i) e = e * (1.0 - p) + (1.0 - e) * p;
  return e;
}

/// Bit j set when server j + 1 is available.
inline ServerMask sample_availability(const ServerFailureModel& model, RngStream& rng) {
  ServerMask mask = 0;
  for (std::size_t j = 0; j < model.n_servers; ++j) {
    if (!rng.bernoulli(model.q)) mask |= ServerMask{1} << j;
  }
  return mask;
}

}  // namespace codednfv
