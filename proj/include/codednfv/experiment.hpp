#pragma once

// Experiment drivers behind the command-line tool: (p, q, scheme) sweeps
// with CSV or JSON-lines output, generator-matrix design runs and MFR
// reports. Everything here writes to caller-supplied streams.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "codednfv/convcode.hpp"
#include "codednfv/designer.hpp"
#include "codednfv/error.hpp"
#include "codednfv/estimators.hpp"
#include "codednfv/nfv.hpp"

namespace codednfv {

inline std::string format_number(double v, const char* spec = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced in log10.
inline std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
    throw Error(ErrorKind::InvalidArg, "log grid needs 0 < lo <= hi and count >= 1");
  }
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

enum class OutputFormat { Csv, JsonLines };

inline OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "jsonl" || s == "json") return OutputFormat::JsonLines;
  throw Error(ErrorKind::Parse, "unknown output format '" + std::string(s) + "'");
}

struct CodeParams {
  std::vector<std::uint32_t> taps{0171, 0133};
  unsigned constraint_length = 7;
  std::size_t k = 70;
  Termination termination = Termination::Unterminated;

  ConvCode build() const { return ConvCode(constraint_length, taps, k, termination); }
};

struct SweepConfig {
  CodeParams code;
  std::size_t servers = 3;
  std::size_t frames = 2;
  std::vector<std::string> schemes{"diversity", "coded"};
  std::vector<double> p{0.05};
  std::vector<double> q{1e-4, 1e-3, 1e-2, 1e-1};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  DetectionMode detection = DetectionMode::Genie;
  std::vector<EstimatorKind> estimators{EstimatorKind::ExactEnum, EstimatorKind::PaperFormula};
  OutputFormat format = OutputFormat::Csv;
};

inline Error field_error(const std::string& field, const std::string& what) {
  return Error(ErrorKind::InvalidArg, "field '" + field + "': " + what);
}

/// Checks every field and builds the schemes; throws naming the offending field.
inline std::vector<NfvScheme> validate(const SweepConfig& cfg) {
  try {
    (void)cfg.code.build();
  } catch (const Error& e) {
    throw field_error("code", e.what());
  }
  if (cfg.p.empty()) throw field_error("p", "at least one value required");
  if (cfg.q.empty()) throw field_error("q", "at least one value required");
  for (double v : cfg.p) {
    if (!(v >= 0.0 && v <= 1.0)) throw field_error("p", format_number(v) + " outside [0, 1]");
  }
  for (double v : cfg.q) {
    if (!(v >= 0.0 && v <= 1.0)) throw field_error("q", format_number(v) + " outside [0, 1]");
  }
  if (cfg.trials == 0) throw field_error("trials", "must be at least 1");
  if (cfg.estimators.empty()) throw field_error("estimators", "at least one estimator required");
  if (cfg.schemes.empty()) throw field_error("schemes", "at least one scheme required");
  if (cfg.detection == DetectionMode::Crc16 && cfg.code.k <= kCrcBits) {
    throw field_error("detection", "crc16 needs k > 16");
  }
  std::vector<NfvScheme> schemes;
  for (const auto& name : cfg.schemes) {
    try {
      schemes.push_back(parse_scheme(name, cfg.servers, cfg.frames));
    } catch (const Error& e) {
      throw field_error("schemes", e.what());
    }
    const auto& s = schemes.back();
    for (auto est : cfg.estimators) {
      if (est == EstimatorKind::PaperFormula && !paper_scheme_of(s)) {
        throw field_error("estimators", "'paper' applies only to the N=3, K=2 diversity and coded matrices, not " +
                                            s.name());
      }
      if (est == EstimatorKind::ExactEnum && s.n_servers() > kMaxEnumerationServers) {
        throw field_error("estimators", "'exact' limited to " + std::to_string(kMaxEnumerationServers) + " servers");
      }
    }
  }
  return schemes;
}

inline constexpr const char* kSweepCsvHeader = "scheme,p,q,estimator,trials,p_err,ci_halfwidth,detection_mode,seed";

struct SweepRow {
  std::string scheme;
  double p;
  double q;
  EstimatorKind estimator;
  std::uint64_t trials;
  double p_err;
  double ci_halfwidth;
  DetectionMode detection;
  std::uint64_t seed;
};

inline void write_row(std::ostream& out, OutputFormat format, const SweepRow& r) {
  if (format == OutputFormat::Csv) {
    out << r.scheme << ',' << format_number(r.p) << ',' << format_number(r.q) << ',' << to_string(r.estimator) << ','
        << r.trials << ',' << format_number(r.p_err, "%.9e") << ',' << format_number(r.ci_halfwidth, "%.9e") << ','
        << to_string(r.detection) << ',' << r.seed << '\n';
  } else {
    out << "{\"scheme\":\"" << r.scheme << "\",\"p\":" << format_number(r.p) << ",\"q\":" << format_number(r.q)
        << ",\"estimator\":\"" << to_string(r.estimator) << "\",\"trials\":" << r.trials
        << ",\"p_err\":" << format_number(r.p_err, "%.9e") << ",\"ci_halfwidth\":" << format_number(r.ci_halfwidth, "%.9e")
        << ",\"detection_mode\":\"" << to_string(r.detection) << "\",\"seed\":" << r.seed << "}\n";
  }
}

inline constexpr const char* kPartialMarker = "#partial";

struct SweepStatus {
  bool complete = true;
  std::size_t rows = 0;
  std::string error;
};

/// For each (scheme, p) the joint pmf is estimated once and reused across
/// the q grid; fullmc rows rerun the whole pipeline per q. Output depends
/// only on the config, never on `workers`. A failure mid-sweep leaves the
/// rows written so far followed by a "#partial" marker line.
inline SweepStatus run_sweep(const SweepConfig& cfg, std::ostream& out, std::size_t workers = default_workers()) {
  const auto schemes = validate(cfg);
  const ConvCode code = cfg.code.build();
  SweepStatus status;
  if (cfg.format == OutputFormat::Csv) out << kSweepCsvHeader << '\n';
  try {
    for (const auto& scheme : schemes) {
      for (double p : cfg.p) {
        std::optional<JointDecodePmf> pmf;
        for (double q : cfg.q) {
          for (auto est : cfg.estimators) {
            ErrEstimate e;
            DetectionMode mode = DetectionMode::Genie;
            if (est == EstimatorKind::FullMc) {
              e = full_mc_perr(code, scheme, p, q, cfg.trials, cfg.seed, cfg.detection, workers);
              mode = cfg.detection;
            } else {
              if (!pmf) pmf = estimate_joint_pmf(code, scheme, p, cfg.trials, cfg.seed, workers);
              e = est == EstimatorKind::ExactEnum ? exact_enum_perr(*pmf, q, scheme)
                                                  : paper_formula_perr(*pmf, q, *paper_scheme_of(scheme));
            }
            write_row(out, cfg.format, {scheme.name(), p, q, est, e.trials, e.p_err, e.ci_halfwidth, mode, cfg.seed});
            ++status.rows;
          }
        }
      }
    }
  } catch (const std::exception& e) {
    status.complete = false;
    status.error = e.what();
    out.clear();
    out << kPartialMarker << ' ' << e.what() << '\n';
  }
  out.flush();
  return status;
}

struct DesignConfig {
  CodeParams code;
  std::size_t frames = 2;
  std::size_t servers = 3;
  double p = 0.05;
  double q = 1e-2;
  std::uint64_t trials = 20000;
  std::uint64_t budget = 100000;
  std::uint64_t seed = 1;
  /// Rows written; 0 writes every ranked design.
  std::size_t top = 10;
  /// Skips measurement when set.
  std::optional<FTable> f_table;
};

struct DesignRun {
  FTable f_table;
  std::vector<DesignReport> ranked;
};

/// Measures f(1..K) unless a table is given, searches K x N matrices and
/// writes the ranking as JSON lines.
inline DesignRun run_design(const DesignConfig& cfg, std::ostream& out, std::size_t workers = default_workers()) {
  if (cfg.budget == 0) throw field_error("budget", "must be positive");
  if (cfg.trials == 0) throw field_error("trials", "must be at least 1");
  check_probability(cfg.p, "p");
  check_probability(cfg.q, "q");
  DesignRun run;
  if (cfg.f_table) {
    run.f_table = *cfg.f_table;
  } else {
    run.f_table = measure_f(cfg.code.build(), cfg.p, cfg.frames, cfg.trials, cfg.seed, workers);
  }
  const ErasureModel model(cfg.q, run.f_table);
  run.ranked = search_gnfv(cfg.frames, cfg.servers, model, {cfg.budget, cfg.seed, workers});
  const std::size_t limit = cfg.top == 0 ? run.ranked.size() : std::min(cfg.top, run.ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    std::string json = run.ranked[i].to_json();
    out << "{\"rank\":" << i + 1 << ',' << json.substr(1) << '\n';
  }
  out.flush();
  return run;
}

inline MfrResult run_mfr(const std::string& scheme_spec, std::size_t servers, std::size_t frames, std::ostream& out) {
  const NfvScheme scheme = parse_scheme(scheme_spec, servers, frames);
  const MfrResult r = mfr_with_witness(scheme);
  out << "scheme " << scheme.name() << " (" << scheme.matrix().to_string('/') << ")\n"
      << "mfr " << r.mfr << "\n"
      << "witness " << format_servers(r.witness) << '\n';
  return r;
}

}  // namespace codednfv
