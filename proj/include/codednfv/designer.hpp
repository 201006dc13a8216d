#pragma once

// NFV generator-matrix design under the erasure view: server j is lost with
// probability q + (1 - q) f(d_j), where d_j is the number of frames summed
// into its input and f(d) the decoder's error rate on that sum.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "codednfv/channel.hpp"
#include "codednfv/error.hpp"
#include "codednfv/estimators.hpp"
#include "codednfv/gf2.hpp"
#include "codednfv/nfv.hpp"
#include "codednfv/parallel.hpp"

namespace codednfv {

/// Decode-error probability by column weight d = 1 .. max_d().
class FTable {
 public:
  FTable() = default;
  explicit FTable(std::vector<double> f) : f_(std::move(f)) {
    for (double v : f_) check_probability(v, "f(d)");
  }

  static FTable constant(double f, std::size_t max_d) { return FTable(std::vector<double>(max_d, f)); }

  std::size_t max_d() const noexcept { return f_.size(); }

  double at(std::size_t d) const {
    if (d == 0 || d > f_.size()) {
      throw Error(ErrorKind::InvalidArg, "f(" + std::to_string(d) + ") not in table of " +
                                             std::to_string(f_.size()) + " entries");
    }
    return f_[d - 1];
  }

  bool non_decreasing() const noexcept { return std::is_sorted(f_.begin(), f_.end()); }

  void write_csv(std::ostream& out) const {
    out << "d,f\n";
    char buf[64];
    for (std::size_t d = 1; d <= f_.size(); ++d) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", d, f_[d - 1]);
      out << buf;
    }
  }

  /// Reads "d,f" rows (header optional). Rows must cover d = 1, 2, ... in order.
  static FTable read_csv(std::istream& in) {
    std::vector<double> f;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "d,f" || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw Error(ErrorKind::Parse, "f_table line " + std::to_string(line_no) + ": expected 'd,f'");
      }
      std::size_t d = 0;
      double v = 0.0;
      try {
        d = std::stoul(line.substr(0, comma));
        v = std::stod(line.substr(comma + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "f_table line " + std::to_string(line_no) + ": not numeric");
      }
      if (d != f.size() + 1) {
        throw Error(ErrorKind::Parse, "f_table line " + std::to_string(line_no) + ": expected d = " +
                                          std::to_string(f.size() + 1));
      }
      f.push_back(v);
    }
    return FTable(std::move(f));
  }

 private:
  std::vector<double> f_;
};

struct ErasureModel {
  double q;
  FTable f;

  ErasureModel(double failure_prob, FTable table) : q(failure_prob), f(std::move(table)) {
    check_probability(q, "q");
  }

  double erasure(std::size_t d) const { return q + (1.0 - q) * f.at(d); }
};

/// Single-frame decoder error rate on BSC(p).
template <LinearCode Code>
ErrEstimate frame_error_rate(const Code& code, double p, std::uint64_t trials, std::uint64_t seed,
                             std::size_t workers = default_workers()) {
  const NfvScheme single(BitMatrix::identity(1), "single");
  return full_mc_perr(code, single, p, 0.0, trials, seed, DetectionMode::Genie, workers);
}

/// f(d) for d = 1 .. d_max, measured on BSC(effective_p(p, d)). Every d uses
/// the same seed, so noise draws are coupled across d.
template <LinearCode Code>
FTable measure_f(const Code& code, double p, std::size_t d_max, std::uint64_t trials, std::uint64_t seed,
                 std::size_t workers = default_workers()) {
  if (d_max == 0) throw Error(ErrorKind::InvalidArg, "d_max must be at least 1");
  std::vector<double> f;
  f.reserve(d_max);
  for (std::size_t d = 1; d <= d_max; ++d) {
    f.push_back(frame_error_rate(code, effective_p(p, d), trials, seed, workers).p_err);
  }
  return FTable(std::move(f));
}

/// Exact probability that the servers surviving independent erasures do not
/// span all K frames. Enumerates the 2^N survivor patterns.
inline double erasure_perr(const BitMatrix& g, const ErasureModel& model) {
  const std::size_t n = g.cols();
  const std::size_t k = g.rows();
  if (n > kMaxEnumerationServers) {
    throw Error(ErrorKind::TooLarge, "erasure enumeration limited to " + std::to_string(kMaxEnumerationServers) +
                                         " servers");
  }
  std::vector<double> erase(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t d = g.column_weight(j);
    if (d == 0) throw Error(ErrorKind::InvalidArg, "column " + std::to_string(j + 1) + " is zero");
    erase[j] = model.erasure(d);
  }
  const auto cols = g.packed_columns();
  std::vector<std::uint64_t> survivors;
  survivors.reserve(n);
  double fail = 0.0;
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t alive = 0; alive < patterns; ++alive) {
    survivors.clear();
    double prob = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if ((alive >> j) & 1U) {
        prob *= 1.0 - erase[j];
        survivors.push_back(cols[j]);
      } else {
        prob *= erase[j];
      }
    }
    if (prob != 0.0 && rank_of_packed(survivors) < k) fail += prob;
  }
  return std::clamp(fail, 0.0, 1.0);
}

struct DesignReport {
  BitMatrix matrix;
  double p_err = 0.0;
  std::size_t min_dist = 0;
  std::size_t max_col_weight = 0;
  std::size_t mfr = 0;

  std::string to_json() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", p_err);
    std::ostringstream out;
    out << "{\"matrix\":\"" << matrix.to_string('/') << "\",\"p_err\":" << buf << ",\"min_dist\":" << min_dist
        << ",\"max_col_weight\":" << max_col_weight << ",\"mfr\":" << mfr << "}";
    return out.str();
  }
};

inline DesignReport evaluate_design(const BitMatrix& g, const ErasureModel& model) {
  DesignReport r;
  r.matrix = g;
  r.p_err = erasure_perr(g, model);
  r.min_dist = min_distance(g);
  r.max_col_weight = g.max_column_weight();
  const NfvScheme scheme(g, "candidate");
  r.mfr = scheme.n_servers() <= 12 ? mfr_by_subset_search(scheme).mfr : mfr(scheme);
  return r;
}

/// Sorted column values: two matrices that differ only by a server
/// relabeling share this form.
inline std::vector<std::uint64_t> canonical_columns(const BitMatrix& g) {
  auto cols = g.packed_columns();
  std::sort(cols.begin(), cols.end());
  return cols;
}

/// p_err rounded to 40 significant bits, so designs whose probabilities
/// differ only by summation order compare equal.
inline double ranking_key(double p) {
  if (p == 0.0) return 0.0;
  int exp = 0;
  std::frexp(p, &exp);
  const double scale = std::ldexp(1.0, 40 - exp);
  return std::round(p * scale) / scale;
}

inline bool design_precedes(const DesignReport& a, const DesignReport& b) {
  const double ka = ranking_key(a.p_err);
  const double kb = ranking_key(b.p_err);
  if (ka != kb) return ka < kb;
  if (a.max_col_weight != b.max_col_weight) return a.max_col_weight < b.max_col_weight;
  return canonical_columns(a.matrix) < canonical_columns(b.matrix);
}

/// Number of multisets of N nonzero K-bit columns, saturating at `cap`.
inline std::uint64_t count_canonical_designs(std::size_t k, std::size_t n, std::uint64_t cap) {
  // C(m + n - 1, n) with m = 2^k - 1, built up incrementally.
  const double m = std::ldexp(1.0, static_cast<int>(k)) - 1.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    c = c * (m + static_cast<double>(i) - 1.0) / static_cast<double>(i);
    if (c > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(c));
}

struct SearchOptions {
  /// Maximum number of candidate matrices evaluated.
  std::uint64_t budget = 100000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// Ranks full-rank K x N matrices without zero columns by erasure_perr, then
/// by max column weight, then by canonical form. Exhaustive over canonical
/// forms when they fit the budget, otherwise `budget` seeded random draws.
inline std::vector<DesignReport> search_gnfv(std::size_t k, std::size_t n, const ErasureModel& model,
                                             const SearchOptions& opts) {
  if (opts.budget == 0) throw Error(ErrorKind::InvalidArg, "search budget must be positive");
  if (k == 0 || n < k) {
    throw Error(ErrorKind::InvalidArg, "need N >= K >= 1, got K=" + std::to_string(k) + " N=" + std::to_string(n));
  }
  if (k > kMaxEnumerationRows) throw Error(ErrorKind::TooLarge, "K limited to " + std::to_string(kMaxEnumerationRows));
  if (n > kMaxEnumerationServers) {
    throw Error(ErrorKind::TooLarge, "N limited to " + std::to_string(kMaxEnumerationServers));
  }
  if (model.f.max_d() < k) {
    throw Error(ErrorKind::InvalidArg, "f_table covers d <= " + std::to_string(model.f.max_d()) + " but K = " +
                                           std::to_string(k));
  }
  const std::uint64_t max_col = (std::uint64_t{1} << k) - 1;

  std::vector<std::vector<std::uint64_t>> candidates;
  if (count_canonical_designs(k, n, opts.budget) <= opts.budget) {
    std::vector<std::uint64_t> cols(n, 1);
    while (true) {
      candidates.push_back(cols);
      // Next non-decreasing sequence over [1, max_col].
      std::size_t i = n;
      while (i > 0 && cols[i - 1] == max_col) --i;
      if (i == 0) break;
      const std::uint64_t v = cols[i - 1] + 1;
      for (std::size_t j = i - 1; j < n; ++j) cols[j] = v;
    }
  } else {
    RngStream rng(opts.seed, 0, StreamPurpose::Search);
    std::uniform_int_distribution<std::uint64_t> pick(1, max_col);
    for (std::uint64_t draw = 0; draw < opts.budget; ++draw) {
      std::vector<std::uint64_t> cols(n);
      for (auto& c : cols) c = pick(rng);
      std::sort(cols.begin(), cols.end());
      candidates.push_back(std::move(cols));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }

  auto reports = parallel_trials<std::vector<DesignReport>>(
      candidates.size(), opts.workers, [] { return std::vector<DesignReport>{}; },
      [&](std::vector<DesignReport>& acc, std::uint64_t i) {
        const auto& cols = candidates[i];
        if (rank_of_packed(cols) != k) return;
        acc.push_back(evaluate_design(BitMatrix::from_packed_columns(k, cols), model));
      },
      [](std::vector<DesignReport>& into, std::vector<DesignReport>& from) {
        into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
      });
  std::sort(reports.begin(), reports.end(), design_precedes);
  return reports;
}

}  // namespace codednfv
