#include <gtest/gtest.h>

#include <random>

#include "codednfv/convcode.hpp"
#include "codednfv/nfv.hpp"

namespace codednfv {
namespace {

BitVec bits(const char* s) { return BitVec::from_string(s); }

std::vector<ServerOutcome> outcomes_for(const NfvScheme& scheme, const std::vector<BitVec>& targets,
                                        ServerMask trusted) {
  std::vector<ServerOutcome> out(scheme.n_servers());
  for (std::size_t j = 0; j < scheme.n_servers(); ++j) {
    if ((trusted >> j) & 1U) out[j] = {true, targets[j], true};
  }
  return out;
}

TEST(Builders, DiversityDuplicatesFromTheLastFrame) {
  EXPECT_EQ(build_diversity(3, 2).matrix(), BitMatrix::parse("100/011"));
  EXPECT_EQ(build_diversity(2, 2).matrix(), BitMatrix::identity(2));
  EXPECT_EQ(build_diversity(4, 2).matrix(), BitMatrix::parse("1001/0110"));
  EXPECT_EQ(build_diversity(5, 3).matrix(), BitMatrix::parse("10000/01001/00110"));
  EXPECT_THROW(build_diversity(2, 3), Error);
}

TEST(Builders, CodedAddsAllOnesColumns) {
  EXPECT_EQ(build_coded_xor(3, 2).matrix(), BitMatrix::parse("101/011"));
  EXPECT_EQ(build_coded_xor(3, 3).matrix(), BitMatrix::identity(3));
  const NfvScheme s = build_coded_xor(4, 3);
  EXPECT_EQ(s.matrix(), BitMatrix::parse("1001/0101/0011"));
  EXPECT_EQ(min_distance(s.matrix()), 2u);
  EXPECT_THROW(build_coded_xor(1, 2), Error);
}

TEST(Builders, SchemeInvariantsAreEnforced) {
  EXPECT_THROW(NfvScheme(BitMatrix::parse("100/010"), "zero column"), Error);
  try {
    NfvScheme(BitMatrix::parse("111/111"), "rank 1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(Builders, ParseSchemeNames) {
  EXPECT_EQ(parse_scheme("coded").matrix(), BitMatrix::parse("101/011"));
  EXPECT_EQ(parse_scheme("diversity", 4, 2).matrix(), BitMatrix::parse("1001/0110"));
  EXPECT_EQ(parse_scheme("matrix:110/011").matrix(), BitMatrix::parse("110/011"));
  EXPECT_EQ(parse_scheme("matrix:110/011").name(), "matrix:110/011");
  EXPECT_THROW(parse_scheme("triplication"), Error);
  EXPECT_THROW(parse_scheme("matrix:1x0/011"), Error);
}

TEST(ServerInputs, CodedThirdServerGetsTheSum) {
  const std::vector<BitVec> y{bits("110010"), bits("011011")};
  const auto in = server_inputs(build_coded_xor(3, 2), y);
  ASSERT_EQ(in.size(), 3u);
  EXPECT_EQ(in[0], y[0]);
  EXPECT_EQ(in[1], y[1]);
  EXPECT_EQ(in[2], y[0] ^ y[1]);
}

TEST(ServerInputs, IdentityPassesFramesThrough) {
  const std::vector<BitVec> y{bits("1100"), bits("0110"), bits("0001")};
  EXPECT_EQ(server_inputs(build_diversity(3, 3), y), y);
}

TEST(ServerInputs, NoiselessInputsAreCodewords) {
  std::mt19937_64 rng(1);
  const ConvCode code = ConvCode::standard_k7();
  const NfvScheme scheme = parse_scheme("matrix:1101/0111");
  std::vector<BitVec> u(2, BitVec(70));
  for (auto& v : u) {
    for (std::size_t i = 0; i < 70; ++i) v.set(i, rng() & 1U);
  }
  const std::vector<BitVec> x{code.encode(u[0]), code.encode(u[1])};
  const auto inputs = server_inputs(scheme, x);
  const auto targets = server_targets(scheme, u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(inputs[j], code.encode(targets[j]));
}

TEST(ServerInputs, RejectsMismatchedFrames) {
  const std::vector<BitVec> one{bits("1100")};
  EXPECT_THROW(server_inputs(build_coded_xor(3, 2), one), Error);
  const std::vector<BitVec> ragged{bits("1100"), bits("110")};
  EXPECT_THROW(server_inputs(build_coded_xor(3, 2), ragged), Error);
}

TEST(Recover, CodedFromServersTwoAndThree) {
  const NfvScheme coded = build_coded_xor(3, 2);
  const std::vector<BitVec> u{bits("10110"), bits("01100")};
  const auto targets = server_targets(coded, u);
  const Recovery r = recover(coded, outcomes_for(coded, targets, 0b110), Trust::Genie);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.messages[0], targets[2] ^ targets[1]);
  EXPECT_EQ(r.messages[1], targets[1]);
  EXPECT_EQ(r.messages, u);
}

TEST(Recover, DiversityWithoutServerOneFails) {
  const NfvScheme div = build_diversity(3, 2);
  const std::vector<BitVec> u{bits("10110"), bits("01100")};
  const Recovery r = recover(div, outcomes_for(div, server_targets(div, u), 0b110), Trust::Genie);
  EXPECT_EQ(r.status, RecoveryStatus::Failure);
}

TEST(Recover, SuccessTableOverAllTrustedSets) {
  const NfvScheme coded = build_coded_xor(3, 2);
  const NfvScheme div = build_diversity(3, 2);
  const std::vector<BitVec> u{bits("1"), bits("1")};
  for (ServerMask s = 0; s < 8; ++s) {
    const bool coded_expected = std::popcount(s) >= 2;
    const bool div_expected = (s & 1U) && (s & 0b110U);
    EXPECT_EQ(recover(coded, outcomes_for(coded, server_targets(coded, u), s), Trust::Genie).ok(), coded_expected)
        << s;
    EXPECT_EQ(recover(div, outcomes_for(div, server_targets(div, u), s), Trust::Genie).ok(), div_expected) << s;
  }
}

TEST(Recover, UnavailableOrUntrustedServersAreIgnored) {
  const NfvScheme coded = build_coded_xor(3, 2);
  const std::vector<BitVec> u{bits("1010"), bits("0110")};
  const auto targets = server_targets(coded, u);
  std::vector<ServerOutcome> out(3);
  out[0] = {true, bits("1111"), false};  // wrong and flagged
  out[1] = {true, targets[1], true};
  out[2] = {false, std::nullopt, false};
  EXPECT_EQ(recover(coded, out, Trust::Genie).status, RecoveryStatus::Failure);
  out[2] = {true, targets[2], true};
  const Recovery r = recover(coded, out, Trust::Genie);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.messages, u);
  EXPECT_EQ(r.trusted, ServerMask{0b110});
}

TEST(Recover, ExhaustiveOverSmallSchemesMessagesAndTrustedSets) {
  std::mt19937_64 rng(2);
  int schemes = 0;
  while (schemes < 30) {
    const std::size_t k = 1 + rng() % 3;
    const std::size_t n = k + rng() % (6 - k);
    BitMatrix g(k, n);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) g.set(i, j, rng() & 1U);
    }
    bool zero_col = false;
    for (std::size_t j = 0; j < n; ++j) zero_col |= g.column_weight(j) == 0;
    if (zero_col || rank(g) != k) continue;
    ++schemes;
    const NfvScheme scheme(g, "random");
    for (std::uint64_t msg = 0; msg < (std::uint64_t{1} << k); ++msg) {
      std::vector<BitVec> u(k, BitVec(1));
      for (std::size_t i = 0; i < k; ++i) u[i].set(0, (msg >> i) & 1U);
      const auto targets = server_targets(scheme, u);
      for (ServerMask s = 0; s < (ServerMask{1} << n); ++s) {
        for (Trust trust : {Trust::Genie, Trust::Crc}) {
          const Recovery r = recover(scheme, outcomes_for(scheme, targets, s), trust);
          ASSERT_EQ(r.ok(), scheme.recoverable(s));
          if (r.ok()) {
            ASSERT_EQ(r.messages, u);
          }
        }
      }
    }
  }
}

TEST(Recover, ContradictoryTrustedOutputsAreReportedUnderCrcTrust) {
  const NfvScheme coded = build_coded_xor(3, 2);
  std::vector<ServerOutcome> out(3);
  out[0] = {true, bits("10"), true};
  out[1] = {true, bits("01"), true};
  out[2] = {true, bits("00"), true};  // should be 11
  EXPECT_EQ(recover(coded, out, Trust::Crc).status, RecoveryStatus::Inconsistent);
  // Genie trust uses a spanning subset only and cannot notice.
  EXPECT_TRUE(recover(coded, out, Trust::Genie).ok());
}

TEST(Mfr, PaperInstancesAndIdentity) {
  const MfrResult div = mfr_with_witness(build_diversity(3, 2));
  EXPECT_EQ(div.mfr, 1u);
  EXPECT_EQ(div.witness, ServerMask{0b001});
  EXPECT_EQ(mfr(build_coded_xor(3, 2)), 2u);
  EXPECT_EQ(mfr(NfvScheme(BitMatrix::identity(4), "id")), 1u);
}

TEST(Mfr, MinDistanceMatchesDirectRemovalSearch) {
  std::mt19937_64 rng(3);
  int tested = 0;
  while (tested < 200) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t n = k + rng() % (9 - k);
    BitMatrix g(k, n);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) g.set(i, j, rng() & 1U);
    }
    bool zero_col = false;
    for (std::size_t j = 0; j < n; ++j) zero_col |= g.column_weight(j) == 0;
    if (zero_col || rank(g) != k) continue;
    ++tested;
    const NfvScheme scheme(g, "random");
    const MfrResult via_distance = mfr_with_witness(scheme);
    const MfrResult via_search = mfr_by_subset_search(scheme);
    ASSERT_EQ(via_distance.mfr, via_search.mfr) << g.to_string('/');
    // The witness really breaks recovery.
    EXPECT_EQ(static_cast<std::size_t>(std::popcount(via_distance.witness)), via_distance.mfr);
    EXPECT_FALSE(scheme.recoverable(scheme.all_servers() & ~via_distance.witness));
  }
}

TEST(Pipeline, NoiselessEndToEndRecoversOriginalMessages) {
  std::mt19937_64 rng(4);
  const ConvCode code = ConvCode::standard_k7();
  ViterbiDecoder decoder(code);
  for (const char* spec : {"diversity", "coded", "matrix:1101/0111", "matrix:11/01"}) {
    const NfvScheme scheme = parse_scheme(spec);
    std::vector<BitVec> u(scheme.n_frames(), BitVec(70));
    for (auto& v : u) {
      for (std::size_t i = 0; i < 70; ++i) v.set(i, rng() & 1U);
    }
    std::vector<BitVec> x;
    for (const auto& v : u) x.push_back(code.encode(v));
    const auto inputs = server_inputs(scheme, x);
    const auto targets = server_targets(scheme, u);
    std::vector<ServerOutcome> out(scheme.n_servers());
    for (std::size_t j = 0; j < scheme.n_servers(); ++j) {
      const BitVec d = decoder.decode(inputs[j]);
      out[j] = {true, d, detect_error(DetectionMode::Genie, d, targets[j])};
    }
    const Recovery r = recover(scheme, out, Trust::Genie);
    ASSERT_TRUE(r.ok()) << spec;
    EXPECT_EQ(r.messages, u) << spec;
  }
}

}  // namespace
}  // namespace codednfv
