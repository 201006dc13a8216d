#pragma once

// Error-probability estimators for an NFV scheme on top of a linear channel
// code: Monte Carlo estimation of the joint decode-correctness distribution,
// the two closed forms that weight it by server availability, and a full
// end-to-end simulation used to cross-check them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codednfv/channel.hpp"
#include "codednfv/convcode.hpp"
#include "codednfv/error.hpp"
#include "codednfv/gf2.hpp"
#include "codednfv/nfv.hpp"
#include "codednfv/parallel.hpp"

namespace codednfv {

/// A binary linear (n, k) code with an associated decoder type obtained via
/// make_decoder(code). Decoders carry scratch state and are used per worker.
template <class C>
concept LinearCode = requires(const C& code, const BitVec& v) {
  { code.k() } -> std::convertible_to<std::size_t>;
  { code.n() } -> std::convertible_to<std::size_t>;
  { code.encode(v) } -> std::same_as<BitVec>;
  { make_decoder(code).decode(v) } -> std::same_as<BitVec>;
};

/// Counts of trials by decode-correctness mask. Bit j of a mask is set when
/// server j + 1 decoded its input correctly.
struct JointDecodePmf {
  std::size_t n_servers = 0;
  std::map<ServerMask, std::uint64_t> counts;
  std::uint64_t trials = 0;

  double probability(ServerMask mask) const {
    const auto it = counts.find(mask);
    return it == counts.end() || trials == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(trials);
  }

  /// Fraction of trials in which server j + 1 decoded incorrectly.
  double marginal_error(std::size_t j) const {
    std::uint64_t wrong = 0;
    for (const auto& [mask, count] : counts) {
      if (!((mask >> j) & 1U)) wrong += count;
    }
    return trials == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(trials);
  }

  void add(ServerMask mask, std::uint64_t count = 1) {
    counts[mask] += count;
    trials += count;
  }

  void merge(const JointDecodePmf& other) {
    for (const auto& [mask, count] : other.counts) add(mask, count);
  }

  static JointDecodePmf concentrated(std::size_t n_servers, ServerMask mask, std::uint64_t trials = 1) {
    JointDecodePmf pmf;
    pmf.n_servers = n_servers;
    pmf.add(mask, trials);
    return pmf;
  }
};

enum class EstimatorKind { ExactEnum, PaperFormula, FullMc };

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::ExactEnum: return "exact";
    case EstimatorKind::PaperFormula: return "paper";
    case EstimatorKind::FullMc: return "fullmc";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator(std::string_view s) {
  if (s == "exact") return EstimatorKind::ExactEnum;
  if (s == "paper") return EstimatorKind::PaperFormula;
  if (s == "fullmc") return EstimatorKind::FullMc;
  throw Error(ErrorKind::Parse, "unknown estimator '" + std::string(s) + "'");
}

struct ErrEstimate {
  double p_err = 0.0;
  /// 95% half-width.
  double ci_halfwidth = 0.0;
  std::uint64_t trials = 0;
  EstimatorKind estimator = EstimatorKind::ExactEnum;
  /// FullMc only: trials that failed, and the subset where recovery
  /// returned wrong messages without noticing.
  std::uint64_t failures = 0;
  std::uint64_t undetected = 0;

  double sigma() const noexcept { return ci_halfwidth / kZ95; }

  static constexpr double kZ95 = 1.959963984540054;
};

/// Wilson score interval half-width for `failures` out of `trials`.
inline double wilson_halfwidth(double failures, double trials) {
  if (trials <= 0) return 0.0;
  const double z = ErrEstimate::kZ95;
  const double p = failures / trials;
  const double denom = 1.0 + z * z / trials;
  return z * std::sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom;
}

/// Normal-approximation half-width, switching to Wilson when fewer than ten
/// failures were seen.
inline double binomial_halfwidth(std::uint64_t failures, std::uint64_t trials) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  if (failures < 10) return wilson_halfwidth(static_cast<double>(failures), n);
  const double p = static_cast<double>(failures) / n;
  return ErrEstimate::kZ95 * std::sqrt(p * (1.0 - p) / n);
}

// ---------------------------------------------------------------------------
// Per-trial simulation

namespace detail {

template <LinearCode Code>
std::vector<BitVec> draw_messages(const Code& code, std::size_t frames, std::uint64_t seed, std::uint64_t trial,
                                  DetectionMode mode) {
  RngStream rng(seed, trial, StreamPurpose::Message);
  std::vector<BitVec> messages;
  messages.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    BitVec u(code.k());
    for (std::size_t b = 0; b < code.k(); ++b) {
      if (rng() >> 63) u.set(b, true);
    }
    if (mode == DetectionMode::Crc16) append_crc16(u);
    messages.push_back(std::move(u));
  }
  return messages;
}

template <LinearCode Code>
std::vector<BitVec> receive(const Code& code, std::span<const BitVec> messages, double p, std::uint64_t seed,
                            std::uint64_t trial) {
  RngStream rng(seed, trial, StreamPurpose::Noise);
  const BscChannel channel(p);
  std::vector<BitVec> received;
  received.reserve(messages.size());
  for (const auto& u : messages) received.push_back(code.encode(u) ^ sample_noise(channel, code.n(), rng));
  return received;
}

/// Weighted success probabilities w(C) over the pmf's masks, turned into an
/// estimate of 1 - E[w]. The half-width treats the pmf as a multinomial
/// sample of `trials` draws.
inline ErrEstimate estimate_from_success(const JointDecodePmf& pmf, EstimatorKind kind,
                                         const std::function<double(ServerMask)>& success) {
  if (pmf.trials == 0) throw Error(ErrorKind::InvalidArg, "empty joint pmf");
  double mean = 0.0;
  double second = 0.0;
  for (const auto& [mask, count] : pmf.counts) {
    const double f = 1.0 - success(mask);
    const double w = static_cast<double>(count) / static_cast<double>(pmf.trials);
    mean += w * f;
    second += w * f * f;
  }
  ErrEstimate est;
  est.p_err = std::clamp(mean, 0.0, 1.0);
  est.trials = pmf.trials;
  est.estimator = kind;
  const double n = static_cast<double>(pmf.trials);
  if (est.p_err * n < 10.0) {
    est.ci_halfwidth = wilson_halfwidth(est.p_err * n, n);
  } else {
    est.ci_halfwidth = ErrEstimate::kZ95 * std::sqrt(std::max(0.0, second - mean * mean) / n);
  }
  return est;
}

}  // namespace detail

/// Monte Carlo estimate of Pr(S): per trial, K random messages are encoded,
/// sent through independent BSC(p) noise, combined per the scheme, decoded
/// at every server, and each output is compared with that server's target.
/// The masks are sampled jointly, so correlation between servers that share
/// noise is preserved.
template <LinearCode Code>
JointDecodePmf estimate_joint_pmf(const Code& code, const NfvScheme& scheme, double p, std::uint64_t trials,
                                  std::uint64_t seed, std::size_t workers = default_workers()) {
  check_probability(p, "p");
  if (trials == 0) throw Error(ErrorKind::InvalidArg, "trials must be at least 1");
  if (scheme.n_servers() > 64) throw Error(ErrorKind::TooLarge, "at most 64 servers");
  struct Acc {
    JointDecodePmf pmf;
    decltype(make_decoder(code)) decoder;
  };
  Acc total = parallel_trials<Acc>(
      trials, workers,
      [&] { return Acc{JointDecodePmf{scheme.n_servers(), {}, 0}, make_decoder(code)}; },
      [&](Acc& acc, std::uint64_t t) {
        const auto messages = detail::draw_messages(code, scheme.n_frames(), seed, t, DetectionMode::Genie);
        const auto received = detail::receive(code, messages, p, seed, t);
        const auto inputs = server_inputs(scheme, received);
        const auto targets = server_targets(scheme, messages);
        ServerMask mask = 0;
        for (std::size_t j = 0; j < scheme.n_servers(); ++j) {
          if (acc.decoder.decode(inputs[j]) == targets[j]) mask |= ServerMask{1} << j;
        }
        acc.pmf.add(mask);
      },
      [](Acc& into, const Acc& from) { into.pmf.merge(from.pmf); });
  return std::move(total.pmf);
}

enum class PaperScheme { Diversity3x2, Coded3x2 };

/// Identifies the two N = 3, K = 2 matrices the closed forms are written for.
inline std::optional<PaperScheme> paper_scheme_of(const NfvScheme& scheme) {
  if (scheme.matrix() == build_diversity(3, 2).matrix()) return PaperScheme::Diversity3x2;
  if (scheme.matrix() == build_coded_xor(3, 2).matrix()) return PaperScheme::Coded3x2;
  return std::nullopt;
}

/// 1 - sum over qualifying S of Pr(S) (1 - q)^|S|. Diversity3x2 qualifies
/// sets with |S| >= 2 containing server 1; Coded3x2 qualifies every |S| >= 2.
/// Only sets whose decoders are all up count as successes, so partially
/// available supersets contribute nothing.
inline ErrEstimate paper_formula_perr(const JointDecodePmf& pmf, double q, PaperScheme kind) {
  check_probability(q, "q");
  if (pmf.n_servers != 3) {
    throw Error(ErrorKind::InvalidArg, "closed form is defined for N = 3, K = 2 only, got N = " +
                                           std::to_string(pmf.n_servers));
  }
  return detail::estimate_from_success(pmf, EstimatorKind::PaperFormula, [&](ServerMask s) {
    const int size = std::popcount(s);
    const bool qualifies = size >= 2 && (kind == PaperScheme::Coded3x2 || (s & 1U) != 0);
    return qualifies ? std::pow(1.0 - q, size) : 0.0;
  });
}

inline constexpr std::size_t kMaxEnumerationServers = 20;

/// Exact availability average: for decode-correctness mask C, success
/// probability is the sum over available subsets T of C with recoverable T
/// of (1-q)^|T| q^(|C|-|T|). Servers outside C never help.
inline ErrEstimate exact_enum_perr(const JointDecodePmf& pmf, double q, const NfvScheme& scheme) {
  check_probability(q, "q");
  if (scheme.n_servers() > kMaxEnumerationServers) {
    throw Error(ErrorKind::TooLarge, "availability enumeration limited to " +
                                         std::to_string(kMaxEnumerationServers) + " servers");
  }
  if (pmf.n_servers != scheme.n_servers()) {
    throw Error(ErrorKind::LengthMismatch, "pmf has " + std::to_string(pmf.n_servers) + " servers, scheme has " +
                                               std::to_string(scheme.n_servers()));
  }
  return detail::estimate_from_success(pmf, EstimatorKind::ExactEnum, [&](ServerMask correct) {
    const int size = std::popcount(correct);
    double success = 0.0;
    // Iterate all submasks of `correct`, including the empty set.
    ServerMask t = correct;
    while (true) {
      if (scheme.recoverable(t)) {
        const int up = std::popcount(t);
        success += std::pow(1.0 - q, up) * std::pow(q, size - up);
      }
      if (t == 0) break;
      t = (t - 1) & correct;
    }
    return success;
  });
}

/// End-to-end simulation including availability draws and controller
/// recovery. Under CRC detection a server is trusted when its output's
/// check verifies; recoveries that return wrong messages count as failures
/// and are also tallied in `undetected`.
template <LinearCode Code>
ErrEstimate full_mc_perr(const Code& code, const NfvScheme& scheme, double p, double q, std::uint64_t trials,
                         std::uint64_t seed, DetectionMode detection = DetectionMode::Genie,
                         std::size_t workers = default_workers()) {
  check_probability(p, "p");
  const ServerFailureModel failures_model(q, scheme.n_servers());
  if (trials == 0) throw Error(ErrorKind::InvalidArg, "trials must be at least 1");
  const Trust trust = detection == DetectionMode::Genie ? Trust::Genie : Trust::Crc;
  struct Acc {
    std::uint64_t failures = 0;
    std::uint64_t undetected = 0;
    decltype(make_decoder(code)) decoder;
  };
  Acc total = parallel_trials<Acc>(
      trials, workers, [&] { return Acc{0, 0, make_decoder(code)}; },
      [&](Acc& acc, std::uint64_t t) {
        const auto messages = detail::draw_messages(code, scheme.n_frames(), seed, t, detection);
        const auto received = detail::receive(code, messages, p, seed, t);
        const auto inputs = server_inputs(scheme, received);
        const auto targets = server_targets(scheme, messages);
        RngStream avail_rng(seed, t, StreamPurpose::Availability);
        const ServerMask available = sample_availability(failures_model, avail_rng);
        std::vector<ServerOutcome> outcomes(scheme.n_servers());
        for (std::size_t j = 0; j < scheme.n_servers(); ++j) {
          if (!((available >> j) & 1U)) continue;
          outcomes[j].available = true;
          outcomes[j].decoded = acc.decoder.decode(inputs[j]);
          outcomes[j].correct = detect_error(detection, *outcomes[j].decoded, targets[j]);
        }
        const Recovery rec = recover(scheme, outcomes, trust);
        if (!rec.ok()) {
          ++acc.failures;
        } else if (rec.messages != messages) {
          ++acc.failures;
          ++acc.undetected;
        }
      },
      [](Acc& into, const Acc& from) {
        into.failures += from.failures;
        into.undetected += from.undetected;
      });
  ErrEstimate est;
  est.estimator = EstimatorKind::FullMc;
  est.trials = trials;
  est.failures = total.failures;
  est.undetected = total.undetected;
  est.p_err = static_cast<double>(total.failures) / static_cast<double>(trials);
  est.ci_halfwidth = binomial_halfwidth(total.failures, trials);
  return est;
}

}  // namespace codednfv
