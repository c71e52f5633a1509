// Command-line front end. Links only against the C interface.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ascpd/ascpd.h"

namespace {

std::vector<uint64_t> parse_list(const std::string& text, const char* what) {
  std::vector<uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "expected comma-separated positive integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

int report(ascpd_status status) {
  if (status == ASCPD_OK) return 0;
  std::cerr << "ascpd: error: " << ascpd_status_string(status) << ": " << ascpd_last_error() << '\n';
  return 1;
}

// Owning wrappers over the C handles.
struct Tensor {
  ascpd_tensor* ptr = nullptr;
  ~Tensor() { ascpd_tensor_destroy(ptr); }
};
struct Model {
  ascpd_model* ptr = nullptr;
  ~Model() { ascpd_model_destroy(ptr); }
};
struct Result {
  ascpd_result* ptr = nullptr;
  ~Result() { ascpd_result_destroy(ptr); }
};

struct SynthArgs {
  std::string dims;
  uint64_t rank = 0;
  std::optional<double> snr;
  uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  const auto dims = parse_list(a.dims, "--dims");
  Tensor noisy;
  Model truth;
  double sigma = 0.0;
  if (int rc = report(ascpd_synthesize(dims.size(), dims.data(), a.rank, a.snr.has_value(), a.snr.value_or(0.0), a.seed,
                                       &noisy.ptr, &truth.ptr, &sigma))) {
    return rc;
  }
  if (int rc = report(ascpd_tensor_write(noisy.ptr, a.out.c_str()))) return rc;
  return report(ascpd_write_truth_sidecar(truth.ptr, a.out.c_str(), sigma, a.snr.has_value(), a.snr.value_or(0.0), a.seed));
}

struct DecomposeArgs {
  std::string in;
  std::string solver = "ascpd";
  uint64_t rank = 0;
  std::string block = "100";
  double cond = 100.0;
  std::string constraint = "nonneg";
  uint64_t seed = 1;
  uint64_t max_full_iters = 100;
  double tol = 0.0;
  double alpha = 0.1;
  double decay = 1e-6;
  double eta = 1.0;
  double ada_b = 1e-6;
  double ada_eps = 1e-6;
  uint32_t trials = 1;
  uint32_t threads = 0;
  bool round_robin = false;
  std::string csv;
  std::string model_out;
};

int cmd_decompose(const DecomposeArgs& a) {
  const auto blocks = parse_list(a.block, "--block");
  Tensor tensor;
  if (int rc = report(ascpd_tensor_read(a.in.c_str(), &tensor.ptr))) return rc;

  ascpd_config cfg;
  ascpd_config_init(&cfg);
  cfg.solver = a.solver.c_str();
  cfg.rank = a.rank;
  cfg.constraint = a.constraint.c_str();
  cfg.blocks = blocks.data();
  cfg.n_blocks = blocks.size();
  cfg.round_robin = a.round_robin;
  cfg.cond = a.cond;
  cfg.alpha = a.alpha;
  cfg.decay = a.decay;
  cfg.eta = a.eta;
  cfg.ada_b = a.ada_b;
  cfg.ada_eps = a.ada_eps;
  cfg.seed = a.seed;
  cfg.trials = a.trials;
  cfg.threads = a.threads;
  cfg.max_full_iters = a.max_full_iters;
  cfg.tol = a.tol;

  Result result;
  if (int rc = report(ascpd_decompose(tensor.ptr, &cfg, &result.ptr))) return rc;
  if (!a.csv.empty()) {
    if (int rc = report(ascpd_result_write_csv(result.ptr, a.csv.c_str()))) return rc;
  }
  if (!a.model_out.empty()) {
    // Factor files of trial 0, same layout as the synth sidecar.
    if (int rc = report(ascpd_write_truth_sidecar(ascpd_result_model(result.ptr), a.model_out.c_str(), 0.0, 0, 0.0, a.seed))) {
      return rc;
    }
  }
  const size_t avg = ascpd_result_trials(result.ptr);
  const size_t n = ascpd_result_checkpoints(result.ptr, avg);
  uint64_t full = 0;
  double m = 0.0, wall = 0.0;
  ascpd_result_checkpoint(result.ptr, avg, n - 1, &full, nullptr, &m, &wall);
  std::cout << a.solver << ": full_iter=" << full << " m_k=" << m << " (mean of " << avg << " trial(s), " << wall
            << " s)\n";
  return 0;
}

int cmd_convert(const std::string& from, const std::string& dims_text, const std::string& in, const std::string& out) {
  if (from != "raw64") {
    std::cerr << "ascpd: error: unsupported --from '" << from << "' (only raw64)\n";
    return 2;
  }
  const auto dims = parse_list(dims_text, "--dims");
  Tensor tensor;
  if (int rc = report(ascpd_tensor_read_raw64(in.c_str(), dims.size(), dims.data(), &tensor.ptr))) return rc;
  return report(ascpd_tensor_write(tensor.ptr, out.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense CP decomposition with fiber-sampled stochastic gradient solvers"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic nonnegative low-rank tensor");
  s->add_option("--dims", synth.dims, "Comma-separated dimensions")->required();
  s->add_option("--rank", synth.rank, "CP rank")->required()->check(CLI::PositiveNumber);
  s->add_option("--snr", synth.snr, "Signal-to-noise ratio in dB (omit for noiseless)");
  s->add_option("--seed", synth.seed, "RNG seed");
  s->add_option("--out", synth.out, "Output tensor file (.dten)")->required();

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Run a solver on a tensor file and write its convergence trace");
  d->add_option("--in", dec.in, "Input tensor file (.dten)")->required()->check(CLI::ExistingFile);
  d->add_option("--solver", dec.solver, "ascpd | spg | brascpd | adacpd | als")
      ->check(CLI::IsMember({"ascpd", "spg", "brascpd", "adacpd", "als"}));
  d->add_option("--rank", dec.rank, "CP rank")->required()->check(CLI::PositiveNumber);
  d->add_option("--block", dec.block, "Fibers per iteration: one value or one per mode");
  d->add_option("--cond", dec.cond, "Condition-number target for ascpd/spg");
  d->add_option("--constraint", dec.constraint, "none | nonneg")->check(CLI::IsMember({"none", "nonneg"}));
  d->add_option("--seed", dec.seed, "RNG seed (trial t uses seed + t)");
  d->add_option("--max-full-iters", dec.max_full_iters, "Budget in full-iteration equivalents");
  d->add_option("--tol", dec.tol, "Stop once m_k <= tol (0 disables)");
  d->add_option("--alpha", dec.alpha, "brascpd step scale");
  d->add_option("--decay", dec.decay, "brascpd step decay exponent");
  d->add_option("--eta", dec.eta, "adacpd step scale");
  d->add_option("--ada-b", dec.ada_b, "adacpd accumulator offset");
  d->add_option("--ada-eps", dec.ada_eps, "adacpd exponent offset");
  d->add_option("--trials", dec.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  d->add_option("--threads", dec.threads, "Worker threads (0: all cores)");
  d->add_flag("--round-robin", dec.round_robin, "Cycle modes instead of sampling them");
  d->add_option("--csv", dec.csv, "Output CSV path");
  d->add_option("--model-out", dec.model_out, "Write final factors of trial 0 next to this path");

  std::string bench_config, bench_out = "bench_out";
  auto* b = app.add_subcommand("bench", "Run a Monte-Carlo grid described by a JSON file");
  b->add_option("--config", bench_config, "JSON configuration")->required()->check(CLI::ExistingFile);
  b->add_option("--out", bench_out, "Output directory");

  std::string conv_from, conv_dims, conv_in, conv_out;
  auto* c = app.add_subcommand("convert", "Wrap a raw little-endian float64 dump as a tensor file");
  c->add_option("--from", conv_from, "Input format")->required();
  c->add_option("--dims", conv_dims, "Comma-separated dimensions")->required();
  c->add_option("--in", conv_in, "Raw input file")->required()->check(CLI::ExistingFile);
  c->add_option("--out", conv_out, "Output tensor file")->required();

  CLI11_PARSE(app, argc, argv);
  ascpd_set_quiet(quiet);

  try {
    if (*s) return cmd_synth(synth);
    if (*d) return cmd_decompose(dec);
    if (*b) return report(ascpd_bench(bench_config.c_str(), bench_out.c_str()));
    if (*c) return cmd_convert(conv_from, conv_dims, conv_in, conv_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
