// codednfv: command-line driver for coded NFV experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "codednfv/experiment.hpp"

namespace {

using namespace codednfv;

struct CodeFlags {
  std::string taps = "171,133";
  unsigned constraint_length = 7;
  std::size_t k = 70;
  std::string termination = "unterminated";

  void bind(CLI::App* app) {
    app->add_option("--taps", taps, "Octal generator polynomials")->capture_default_str();
    app->add_option("--constraint_length", constraint_length)->capture_default_str();
    app->add_option("--k", k, "Message bits per frame")->capture_default_str();
    app->add_option("--termination", termination, "unterminated | zerotail")->capture_default_str();
  }

  CodeParams params() const {
    CodeParams c;
    try {
      c.taps = parse_octal_taps(taps);
    } catch (const Error& e) {
      throw field_error("taps", e.what());
    }
    c.constraint_length = constraint_length;
    c.k = k;
    try {
      c.termination = parse_termination(termination);
    } catch (const Error& e) {
      throw field_error("termination", e.what());
    }
    return c;
  }
};

std::size_t resolve_workers(std::size_t flag) { return flag == 0 ? default_workers() : flag; }

/// Writes to the named file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorKind::InvalidArg, "field 'output': cannot open '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

/// Fills options of `app` from a key = value file, skipping any option
/// already given on the command line.
void apply_config(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw Error(ErrorKind::Parse, "config '" + path + "': " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw field_error(key, "unknown key in config '" + path + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw field_error(key, e.what());
    }
  }
}

template <class E, class Parse>
E parse_field(const std::string& field, const std::string& value, Parse parse) {
  try {
    return parse(value);
  } catch (const Error& e) {
    throw field_error(field, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded NFV simulator: fault-tolerant uplink decoding on unreliable servers"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Error probability over a (scheme, p, q) grid");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "key = value config file; flags override it");
  CodeFlags sweep_code;
  sweep_code.bind(sweep);
  SweepConfig sweep_cfg;
  std::vector<double> q_log;
  std::vector<std::string> estimator_names{"exact", "paper"};
  std::string detection = "genie";
  std::string format = "csv";
  std::string sweep_output;
  std::size_t sweep_workers = 0;
  sweep->add_option("--servers", sweep_cfg.servers, "N")->capture_default_str();
  sweep->add_option("--frames", sweep_cfg.frames, "K")->capture_default_str();
  sweep->add_option("--schemes", sweep_cfg.schemes, "diversity, coded or matrix:<rows>")->delimiter(',');
  sweep->add_option("--p", sweep_cfg.p, "BSC crossover probabilities")->delimiter(',');
  sweep->add_option("--q", sweep_cfg.q, "Server failure probabilities")->delimiter(',');
  sweep->add_option("--q_log", q_log, "lo,hi,count: log-spaced q grid (replaces --q)")->delimiter(',')->expected(3);
  sweep->add_option("--trials", sweep_cfg.trials)->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.seed)->capture_default_str();
  sweep->add_option("--detection", detection, "genie | crc16")->capture_default_str();
  sweep->add_option("--estimators", estimator_names, "exact, paper, fullmc")->delimiter(',');
  sweep->add_option("--format", format, "csv | jsonl")->capture_default_str();
  sweep->add_option("--output", sweep_output, "Output path (default stdout)");
  sweep->add_option("--workers", sweep_workers, "Worker threads (0: $CODEDNFV_WORKERS or all cores)");

  // design
  auto* design = app.add_subcommand("design", "Search NFV generator matrices under the erasure model");
  std::string design_config;
  design->add_option("--config", design_config, "key = value config file; flags override it");
  CodeFlags design_code;
  design_code.bind(design);
  DesignConfig design_cfg;
  std::string f_table_in;
  std::string f_table_out;
  std::string design_output;
  std::size_t design_workers = 0;
  design->add_option("--frames", design_cfg.frames, "K")->capture_default_str();
  design->add_option("--servers", design_cfg.servers, "N")->capture_default_str();
  design->add_option("--p", design_cfg.p)->capture_default_str();
  design->add_option("--q", design_cfg.q)->capture_default_str();
  design->add_option("--trials", design_cfg.trials, "Trials per f(d) point")->capture_default_str();
  design->add_option("--budget", design_cfg.budget, "Maximum matrices evaluated")->capture_default_str();
  design->add_option("--seed", design_cfg.seed)->capture_default_str();
  design->add_option("--top", design_cfg.top, "Designs written (0: all)")->capture_default_str();
  design->add_option("--f_table", f_table_in, "Read f(d) from a d,f CSV instead of measuring");
  design->add_option("--f_table_out", f_table_out, "Write the f(d) table used as CSV");
  design->add_option("--output", design_output, "Output path (default stdout)");
  design->add_option("--workers", design_workers);

  // mfr
  auto* mfr_cmd = app.add_subcommand("mfr", "Minimum number of server removals that prevents recovery");
  std::string mfr_scheme;
  std::size_t mfr_servers = 3;
  std::size_t mfr_frames = 2;
  mfr_cmd->add_option("scheme", mfr_scheme, "diversity, coded or matrix:<rows>")->required();
  mfr_cmd->add_option("--servers", mfr_servers)->capture_default_str();
  mfr_cmd->add_option("--frames", mfr_frames)->capture_default_str();

  // encode / decode
  auto* encode_cmd = app.add_subcommand("encode", "Encode one message (debug)");
  CodeFlags encode_code;
  encode_code.bind(encode_cmd);
  std::string message_bits;
  encode_cmd->add_option("message", message_bits, "Message as 0/1 characters")->required();

  auto* decode_cmd = app.add_subcommand("decode", "Viterbi-decode one received word (debug)");
  CodeFlags decode_code;
  decode_code.bind(decode_cmd);
  std::string received_bits;
  decode_cmd->add_option("received", received_bits, "Received word as 0/1 characters")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      apply_config(sweep, sweep_config);
      sweep_cfg.code = sweep_code.params();
      if (!q_log.empty()) {
        try {
          sweep_cfg.q = log_space(q_log[0], q_log[1], static_cast<std::size_t>(q_log[2]));
        } catch (const Error& e) {
          throw field_error("q_log", e.what());
        }
      }
      sweep_cfg.estimators.clear();
      for (const auto& name : estimator_names) {
        sweep_cfg.estimators.push_back(parse_field<EstimatorKind>("estimators", name, parse_estimator));
      }
      sweep_cfg.detection = parse_field<DetectionMode>("detection", detection, parse_detection_mode);
      sweep_cfg.format = parse_field<OutputFormat>("format", format, parse_output_format);
      validate(sweep_cfg);
      Output out(sweep_output);
      const SweepStatus status = run_sweep(sweep_cfg, out.stream(), resolve_workers(sweep_workers));
      if (!status.complete) {
        std::cerr << "sweep incomplete after " << status.rows << " rows: " << status.error << '\n';
        return 2;
      }
    } else if (*design) {
      apply_config(design, design_config);
      design_cfg.code = design_code.params();
      if (!f_table_in.empty()) {
        std::ifstream in(f_table_in);
        if (!in) throw field_error("f_table", "cannot open '" + f_table_in + "'");
        design_cfg.f_table = FTable::read_csv(in);
      }
      Output out(design_output);
      const DesignRun run = run_design(design_cfg, out.stream(), resolve_workers(design_workers));
      if (!f_table_out.empty()) {
        std::ofstream f(f_table_out);
        if (!f) throw field_error("f_table_out", "cannot open '" + f_table_out + "'");
        run.f_table.write_csv(f);
      }
    } else if (*mfr_cmd) {
      run_mfr(mfr_scheme, mfr_servers, mfr_frames, std::cout);
    } else if (*encode_cmd) {
      const ConvCode code = encode_code.params().build();
      std::cout << code.encode(BitVec::from_string(message_bits)).to_string() << '\n';
    } else if (*decode_cmd) {
      const ConvCode code = decode_code.params().build();
      std::cout << viterbi_decode(code, BitVec::from_string(received_bits)).to_string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
