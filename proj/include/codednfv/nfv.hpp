#pragma once

// The NFV layer: which linear combination of received frames each decoding
// server gets, and how the controller rebuilds the K messages from whatever
// the servers return.

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codednfv/channel.hpp"
#include "codednfv/error.hpp"
#include "codednfv/gf2.hpp"

namespace codednfv {

/// A K x N generator matrix: column j lists the frames XORed into the input
/// of server j + 1.
class NfvScheme {
 public:
  NfvScheme(BitMatrix g_nfv, std::string name) : g_(std::move(g_nfv)), name_(std::move(name)) {
    if (g_.rows() == 0 || g_.cols() == 0) throw Error(ErrorKind::InvalidArg, "empty NFV generator matrix");
    if (g_.cols() > 64) throw Error(ErrorKind::TooLarge, "at most 64 servers are supported");
    for (std::size_t j = 0; j < g_.cols(); ++j) {
      if (g_.column_weight(j) == 0) {
        throw Error(ErrorKind::InvalidArg, "server " + std::to_string(j + 1) + " receives no frame");
      }
    }
    if (rank(g_) != g_.rows()) {
      throw Error(ErrorKind::RankDeficient, "NFV generator matrix has rank " + std::to_string(rank(g_)) +
                                                " below " + std::to_string(g_.rows()) + " frames");
    }
    columns_ = g_.packed_columns();
  }

  const BitMatrix& matrix() const noexcept { return g_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t n_frames() const noexcept { return g_.rows(); }
  std::size_t n_servers() const noexcept { return g_.cols(); }
  /// Column j packed with frame i at bit i.
  std::uint64_t column(std::size_t j) const noexcept { return columns_[j]; }
  std::span<const std::uint64_t> columns() const noexcept { return columns_; }

  /// Whether the servers in `mask` jointly span all K frames.
  bool recoverable(ServerMask mask) const noexcept {
    std::uint64_t selected[64];
    std::size_t count = 0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if ((mask >> j) & 1U) selected[count++] = columns_[j];
    }
    return rank_of_packed(std::span<const std::uint64_t>(selected, count)) == n_frames();
  }

  ServerMask all_servers() const noexcept {
    return n_servers() == 64 ? ~ServerMask{0} : (ServerMask{1} << n_servers()) - 1;
  }

 private:
  BitMatrix g_;
  std::string name_;
  std::vector<std::uint64_t> columns_;
};

/// Unit columns for every frame, then frames duplicated round-robin starting
/// from the last one.
inline NfvScheme build_diversity(std::size_t n_servers, std::size_t n_frames) {
  if (n_frames == 0 || n_servers < n_frames) {
    throw Error(ErrorKind::InvalidArg, "diversity needs N >= K >= 1, got N=" + std::to_string(n_servers) +
                                           " K=" + std::to_string(n_frames));
  }
  BitMatrix g(n_frames, n_servers);
  for (std::size_t i = 0; i < n_frames; ++i) g.set(i, i, true);
  for (std::size_t e = 0; e < n_servers - n_frames; ++e) {
    g.set(n_frames - 1 - (e % n_frames), n_frames + e, true);
  }
  return NfvScheme(std::move(g), "diversity");
}

/// Unit columns for every frame; each extra server gets the XOR of all frames.
inline NfvScheme build_coded_xor(std::size_t n_servers, std::size_t n_frames) {
  if (n_frames == 0 || n_servers < n_frames) {
    throw Error(ErrorKind::InvalidArg, "coded needs N >= K >= 1, got N=" + std::to_string(n_servers) +
                                           " K=" + std::to_string(n_frames));
  }
  BitMatrix g(n_frames, n_servers);
  for (std::size_t i = 0; i < n_frames; ++i) g.set(i, i, true);
  for (std::size_t j = n_frames; j < n_servers; ++j) {
    for (std::size_t i = 0; i < n_frames; ++i) g.set(i, j, true);
  }
  return NfvScheme(std::move(g), "coded");
}

/// "diversity", "coded" or "matrix:<rows>" with rows separated by '/'.
/// N and K apply to the named builders only.
inline NfvScheme parse_scheme(std::string_view spec, std::size_t n_servers = 3, std::size_t n_frames = 2) {
  if (spec == "diversity") return build_diversity(n_servers, n_frames);
  if (spec == "coded") return build_coded_xor(n_servers, n_frames);
  constexpr std::string_view prefix = "matrix:";
  if (spec.substr(0, prefix.size()) == prefix) {
    BitMatrix g = BitMatrix::parse(spec.substr(prefix.size()));
    return NfvScheme(g, "matrix:" + g.to_string('/'));
  }
  throw Error(ErrorKind::Parse, "unknown scheme '" + std::string(spec) + "'");
}

/// Server j's input is the XOR of the received frames selected by column j.
inline std::vector<BitVec> server_inputs(const NfvScheme& scheme, std::span<const BitVec> received) {
  if (received.size() != scheme.n_frames()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(scheme.n_frames()) + " frames, got " +
                                               std::to_string(received.size()));
  }
  const std::size_t len = received.front().size();
  std::vector<BitVec> inputs;
  inputs.reserve(scheme.n_servers());
  for (std::size_t j = 0; j < scheme.n_servers(); ++j) {
    BitVec in(len);
    for (std::size_t i = 0; i < scheme.n_frames(); ++i) {
      if ((scheme.column(j) >> i) & 1U) in ^= received[i];
    }
    inputs.push_back(std::move(in));
  }
  return inputs;
}

/// What each server should output when it decodes correctly. Identical in
/// form to server_inputs since the channel code is linear.
inline std::vector<BitVec> server_targets(const NfvScheme& scheme, std::span<const BitVec> messages) {
  return server_inputs(scheme, messages);
}

struct ServerOutcome {
  bool available = false;
  std::optional<BitVec> decoded;
  /// Genie or CRC verdict on `decoded`.
  bool correct = false;
};

enum class Trust { Genie, Crc };

enum class RecoveryStatus {
  Recovered,
  /// Trusted servers do not span all frames.
  Failure,
  /// Trusted outputs contradict each other; only possible under CRC trust.
  Inconsistent,
};

struct Recovery {
  RecoveryStatus status = RecoveryStatus::Failure;
  std::vector<BitVec> messages;
  ServerMask trusted = 0;

  bool ok() const noexcept { return status == RecoveryStatus::Recovered; }
};

inline Recovery recover(const NfvScheme& scheme, std::span<const ServerOutcome> outcomes, Trust trust) {
  if (outcomes.size() != scheme.n_servers()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(scheme.n_servers()) + " outcomes, got " +
                                               std::to_string(outcomes.size()));
  }
  Recovery result;
  std::vector<std::size_t> used;
  std::vector<BitVec> rhs;
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    const auto& o = outcomes[j];
    if (!o.available || !o.decoded || !o.correct) continue;
    result.trusted |= ServerMask{1} << j;
    used.push_back(j);
    rhs.push_back(*o.decoded);
  }
  if (!scheme.recoverable(result.trusted)) return result;

  // Genie trust guarantees consistency, so a spanning subset is enough.
  if (trust == Trust::Genie) {
    std::vector<std::size_t> basis;
    std::vector<BitVec> basis_rhs;
    std::vector<std::uint64_t> picked;
    for (std::size_t t = 0; t < used.size(); ++t) {
      picked.push_back(scheme.column(used[t]));
      if (rank_of_packed(picked) == basis.size() + 1) {
        basis.push_back(used[t]);
        basis_rhs.push_back(rhs[t]);
      } else {
        picked.pop_back();
      }
    }
    used = std::move(basis);
    rhs = std::move(basis_rhs);
  }
  try {
    result.messages = solve(scheme.matrix().select_columns(used), rhs);
    result.status = RecoveryStatus::Recovered;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InconsistentSystem) throw;
    result.status = RecoveryStatus::Inconsistent;
  }
  return result;
}

struct MfrResult {
  std::size_t mfr;
  /// A minimal set of servers whose removal prevents recovery.
  ServerMask witness;
};

/// Minimum failure removal: removing the support of a codeword u*G leaves
/// only columns orthogonal to u, so the minimum distance of G is the answer
/// and the lightest codeword's support is a witness.
inline MfrResult mfr_with_witness(const NfvScheme& scheme) {
  const MinWeightCodeword best = min_weight_codeword(scheme.matrix());
  ServerMask witness = 0;
  for (std::size_t j = 0; j < best.codeword.size(); ++j) {
    if (best.codeword.get(j)) witness |= ServerMask{1} << j;
  }
  return {best.weight, witness};
}

inline std::size_t mfr(const NfvScheme& scheme) { return mfr_with_witness(scheme).mfr; }

/// Direct search over removal sets in order of size. Exponential in N.
inline MfrResult mfr_by_subset_search(const NfvScheme& scheme) {
  const std::size_t n = scheme.n_servers();
  if (n > 24) throw Error(ErrorKind::TooLarge, "subset search limited to 24 servers");
  const ServerMask all = scheme.all_servers();
  MfrResult best{n + 1, 0};
  for (ServerMask removed = 0; removed <= all; ++removed) {
    const auto size = static_cast<std::size_t>(std::popcount(removed));
    if (size < best.mfr && !scheme.recoverable(all & ~removed)) best = {size, removed};
  }
  return best;
}

inline std::string format_servers(ServerMask mask) {
  std::string s = "{";
  bool first = true;
  for (std::size_t j = 0; j < 64; ++j) {
    if ((mask >> j) & 1U) {
      if (!first) s += ",";
      s += std::to_string(j + 1);
      first = false;
    }
  }
  return s + "}";
}

}  // namespace codednfv
