#pragma once

// Feedforward rate-1/r convolutional code with a hard-decision Viterbi
// decoder, plus the error-detection wrappers used by the decoding servers.

#include <bit>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "codednfv/error.hpp"
#include "codednfv/gf2.hpp"

namespace codednfv {

enum class Termination { Unterminated, ZeroTail };

inline const char* to_string(Termination t) {
  return t == Termination::Unterminated ? "unterminated" : "zerotail";
}

inline Termination parse_termination(std::string_view s) {
  if (s == "unterminated") return Termination::Unterminated;
  if (s == "zerotail") return Termination::ZeroTail;
  throw Error(ErrorKind::Parse, "unknown termination '" + std::string(s) + "'");
}

/// Parses comma-separated octal generator polynomials, e.g. "171,133".
inline std::vector<std::uint32_t> parse_octal_taps(std::string_view text) {
  std::vector<std::uint32_t> taps;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    std::string digits;
    for (char c : item) {
      if (c == ' ' || c == '\t') continue;
      if (c < '0' || c > '7') throw Error(ErrorKind::Parse, "tap '" + item + "' is not octal");
      digits.push_back(c);
    }
    if (digits.empty()) throw Error(ErrorKind::Parse, "empty tap in '" + std::string(text) + "'");
    if (digits.size() > 10) throw Error(ErrorKind::Parse, "tap '" + item + "' too long");
    taps.push_back(static_cast<std::uint32_t>(std::stoul(digits, nullptr, 8)));
  }
  if (taps.empty()) throw Error(ErrorKind::Parse, "no taps given");
  return taps;
}

/// Code definition. Tap bit (constraint_length - 1) multiplies the current
/// input; lower bits reach progressively older inputs.
class ConvCode {
 public:
  ConvCode(unsigned constraint_length, std::vector<std::uint32_t> taps, std::size_t message_bits,
           Termination termination = Termination::Unterminated)
      : constraint_length_(constraint_length),
        taps_(std::move(taps)),
        message_bits_(message_bits),
        termination_(termination) {
    if (constraint_length_ < 2 || constraint_length_ > 16) {
      throw Error(ErrorKind::InvalidArg, "constraint length must be in [2, 16]");
    }
    if (taps_.empty() || taps_.size() > 8) throw Error(ErrorKind::InvalidArg, "need between 1 and 8 taps");
    if (message_bits_ == 0) throw Error(ErrorKind::InvalidArg, "message length must be positive");
    bool leading = false;
    for (auto t : taps_) {
      if (t >> constraint_length_) {
        throw Error(ErrorKind::InvalidArg, "tap " + std::to_string(t) + " wider than constraint length");
      }
      leading |= ((t >> (constraint_length_ - 1)) & 1U) != 0;
    }
    if (!leading) throw Error(ErrorKind::InvalidArg, "no tap reaches the current input bit");
    build_tables();
  }

  /// The [171 133], K = 7 rate-1/2 code with 70 message bits and no tail.
  static ConvCode standard_k7(std::size_t message_bits = 70, Termination t = Termination::Unterminated) {
    return ConvCode(7, {0171, 0133}, message_bits, t);
  }

  unsigned constraint_length() const noexcept { return constraint_length_; }
  const std::vector<std::uint32_t>& taps() const noexcept { return taps_; }
  std::size_t rate_inverse() const noexcept { return taps_.size(); }
  Termination termination() const noexcept { return termination_; }
  std::size_t num_states() const noexcept { return std::size_t{1} << (constraint_length_ - 1); }

  std::size_t tail_bits() const noexcept {
    return termination_ == Termination::ZeroTail ? constraint_length_ - 1 : 0;
  }
  /// Message length k.
  std::size_t k() const noexcept { return message_bits_; }
  /// Codeword length n.
  std::size_t n() const noexcept { return rate_inverse() * steps(); }
  std::size_t steps() const noexcept { return message_bits_ + tail_bits(); }

  /// Output symbol (rate_inverse bits, first tap in bit 0) for a transition.
  std::uint32_t branch_output(std::size_t state, unsigned input) const noexcept {
    return outputs_[(state << 1) | input];
  }

  /// branch_output for every (state, input), indexed by (state << 1) | input.
  const std::vector<std::uint32_t>& output_table() const noexcept { return outputs_; }

  /// Next state holds the newest input at the top bit.
  std::size_t next_state(std::size_t state, unsigned input) const noexcept {
    return ((static_cast<std::size_t>(input) << (constraint_length_ - 1)) | state) >> 1;
  }

  BitVec encode(const BitVec& message) const {
    if (message.size() != message_bits_) {
      throw Error(ErrorKind::LengthMismatch, "encode expects " + std::to_string(message_bits_) +
                                                 " bits, got " + std::to_string(message.size()));
    }
    BitVec out(n());
    std::size_t state = 0;
    const std::size_t r = rate_inverse();
    for (std::size_t t = 0; t < steps(); ++t) {
      const unsigned input = t < message_bits_ && message.get(t) ? 1U : 0U;
      const std::uint32_t sym = branch_output(state, input);
      for (std::size_t j = 0; j < r; ++j) {
        if ((sym >> j) & 1U) out.set(t * r + j, true);
      }
      state = next_state(state, input);
    }
    return out;
  }

 private:
  void build_tables() {
    const std::size_t states = num_states();
    outputs_.assign(states * 2, 0);
    for (std::size_t s = 0; s < states; ++s) {
      for (unsigned u = 0; u < 2; ++u) {
        const std::uint32_t reg = (u << (constraint_length_ - 1)) | static_cast<std::uint32_t>(s);
        std::uint32_t sym = 0;
        for (std::size_t j = 0; j < taps_.size(); ++j) {
          sym |= static_cast<std::uint32_t>(std::popcount(reg & taps_[j]) & 1) << j;
        }
        outputs_[(s << 1) | u] = sym;
      }
    }
  }

  unsigned constraint_length_;
  std::vector<std::uint32_t> taps_;
  std::size_t message_bits_;
  Termination termination_;
  std::vector<std::uint32_t> outputs_;
};

/// Hard-decision Viterbi decoder owning its trellis scratch memory. One
/// instance per thread; the referenced code must outlive it.
///
/// Every branch into a state carries the same input bit (the state's top
/// bit), so ties are between the two predecessors: the one whose shifted-out
/// bit is 0 wins. Unterminated traceback starts from the lowest-index state
/// of minimum metric; ZeroTail traceback starts from state 0.
class ViterbiDecoder {
 public:
  explicit ViterbiDecoder(const ConvCode& code) : code_(&code) {}

  const ConvCode& code() const noexcept { return *code_; }

  BitVec decode(const BitVec& received) {
    const ConvCode& code = *code_;
    if (received.size() != code.n()) {
      throw Error(ErrorKind::LengthMismatch, "decode expects " + std::to_string(code.n()) + " bits, got " +
                                                 std::to_string(received.size()));
    }
    const std::size_t states = code.num_states();
    const std::size_t steps = code.steps();
    const std::size_t r = code.rate_inverse();
    const std::size_t words_per_step = (states + 63) / 64;
    const unsigned top_shift = code.constraint_length() - 1;
    constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;

    metrics_.assign(states, kInf);
    next_.assign(states, kInf);
    decisions_.assign(steps * words_per_step, 0);
    metrics_[0] = 0;

    const std::size_t symbols = std::size_t{1} << r;
    branch_metric_.resize(symbols);
    const std::uint32_t* outputs = code.output_table().data();
    for (std::size_t t = 0; t < steps; ++t) {
      std::uint32_t symbol = 0;
      for (std::size_t j = 0; j < r; ++j) symbol |= static_cast<std::uint32_t>(received.get(t * r + j)) << j;
      for (std::size_t e = 0; e < symbols; ++e) {
        branch_metric_[e] = static_cast<std::uint32_t>(std::popcount(static_cast<std::uint32_t>(e) ^ symbol));
      }
      const std::uint32_t* bm = branch_metric_.data();
      const std::uint32_t* cur = metrics_.data();
      std::uint32_t* nxt = next_.data();
      std::uint64_t* dec = decisions_.data() + t * words_per_step;
      for (std::size_t ns = 0; ns < states; ++ns) {
        const std::size_t input = (ns >> (top_shift - 1)) & 1U;
        const std::size_t p0 = (ns << 1) & (states - 1);
        const std::size_t p1 = p0 | 1U;
        const std::uint32_t m0 = cur[p0] + bm[outputs[(p0 << 1) | input]];
        const std::uint32_t m1 = cur[p1] + bm[outputs[(p1 << 1) | input]];
        const bool take1 = m1 < m0;
        nxt[ns] = take1 ? m1 : m0;
        dec[ns / 64] |= static_cast<std::uint64_t>(take1) << (ns % 64);
      }
      metrics_.swap(next_);
    }

    std::size_t state = 0;
    if (code.termination() == Termination::Unterminated) {
      for (std::size_t s = 1; s < states; ++s) {
        if (metrics_[s] < metrics_[state]) state = s;
      }
    }
    BitVec message(code.k());
    for (std::size_t t = steps; t-- > 0;) {
      const auto input = static_cast<unsigned>((state >> (top_shift - 1)) & 1U);
      if (t < code.k() && input) message.set(t, true);
      const std::uint64_t* dec = decisions_.data() + t * words_per_step;
      const std::size_t low = (dec[state / 64] >> (state % 64)) & 1U;
      state = ((state << 1) & (states - 1)) | low;
    }
    return message;
  }

 private:
  const ConvCode* code_;
  std::vector<std::uint32_t> metrics_;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint64_t> decisions_;
  std::vector<std::uint32_t> branch_metric_;
};

inline BitVec encode(const ConvCode& code, const BitVec& message) { return code.encode(message); }

inline ViterbiDecoder make_decoder(const ConvCode& code) { return ViterbiDecoder(code); }

inline BitVec viterbi_decode(const ConvCode& code, const BitVec& received) {
  ViterbiDecoder decoder(code);
  return decoder.decode(received);
}

// ---------------------------------------------------------------------------
// Error detection

enum class DetectionMode { Genie, Crc16 };

inline const char* to_string(DetectionMode m) { return m == DetectionMode::Genie ? "genie" : "crc16"; }

inline DetectionMode parse_detection_mode(std::string_view s) {
  if (s == "genie") return DetectionMode::Genie;
  if (s == "crc16" || s == "crc") return DetectionMode::Crc16;
  throw Error(ErrorKind::Parse, "unknown detection mode '" + std::string(s) + "'");
}

inline constexpr std::size_t kCrcBits = 16;

/// CRC over x^16 + x^12 + x^5 + 1 with zero initial register and no output
/// inversion. That parameterization is GF(2)-linear, so the XOR of two framed
/// messages is again a framed message with a valid check.
inline std::uint16_t crc16(const BitVec& bits, std::size_t count) {
  std::uint16_t reg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const bool feedback = ((reg >> 15) & 1U) != static_cast<unsigned>(bits.get(i));
    reg = static_cast<std::uint16_t>(reg << 1);
    if (feedback) reg ^= 0x1021;
  }
  return reg;
}

/// Writes the check over the first k - 16 bits into the trailing 16 bits.
inline void append_crc16(BitVec& message) {
  if (message.size() <= kCrcBits) throw Error(ErrorKind::InvalidArg, "message too short to carry a CRC-16");
  const std::size_t payload = message.size() - kCrcBits;
  const std::uint16_t crc = crc16(message, payload);
  for (std::size_t i = 0; i < kCrcBits; ++i) message.set(payload + i, (crc >> (15 - i)) & 1U);
}

inline bool crc16_verifies(const BitVec& message) {
  if (message.size() <= kCrcBits) return false;
  return crc16(message, message.size()) == 0;
}

/// True when the decoded message is judged correct. Genie compares with the
/// true message; Crc16 checks the embedded trailer and ignores `truth`.
inline bool detect_error(DetectionMode mode, const BitVec& decoded, const BitVec& truth) {
  if (mode == DetectionMode::Genie) return decoded == truth;
  return crc16_verifies(decoded);
}

}  // namespace codednfv
