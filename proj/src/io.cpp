#include "ascpd/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ascpd/error.hpp"

namespace ascpd::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
  v = to_little(v);
  return true;
}

std::vector<double> read_payload(std::istream& in, Index count, const fs::path& path) {
  std::vector<double> values(count);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<Index>(in.gcount()) != count * sizeof(double)) {
      fail(Errc::Format, path.string() + ": truncated payload (expected " + std::to_string(count) + " values, found " +
                             std::to_string(static_cast<Index>(in.gcount()) / sizeof(double)) + ")");
    }
  } else {
    for (Index n = 0; n < count; ++n)
      if (!get(in, values[n])) fail(Errc::Format, path.string() + ": truncated payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(Errc::Format, path.string() + ": trailing bytes after payload");
  for (double v : values)
    if (!std::isfinite(v)) fail(Errc::Format, path.string() + ": payload contains NaN or Inf");
  return values;
}

Index element_count(const Dims& dims, const fs::path& path) {
  Index total = 1;
  for (Index d : dims) {
    if (d == 0) fail(Errc::Format, path.string() + ": zero dimension in header");
    if (total > (std::numeric_limits<Index>::max() / sizeof(double)) / d) {
      fail(Errc::Format, path.string() + ": declared size overflows");
    }
    total *= d;
  }
  return total;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail(Errc::Io, "cannot open " + path.string() + " for writing");
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor files

void write_tensor(const DenseTensor& t, const fs::path& path) {
  if (t.order() > 0xFFFF) fail(Errc::InvalidArgument, "tensor order does not fit the file header");
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  out.write(kTensorMagic, 4);
  put<std::uint16_t>(out, kTensorVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(t.order()));
  for (Index d : t.dims()) put<std::uint64_t>(out, d);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  } else {
    for (double v : t.values()) put(out, v);
  }
  if (!out) fail(Errc::Io, "write to " + path.string() + " failed");
}

DenseTensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kTensorMagic, 4) != 0) {
    fail(Errc::Format, path.string() + ": malformed header (bad magic)");
  }
  std::uint16_t version = 0, order = 0;
  if (!get(in, version) || !get(in, order)) fail(Errc::Format, path.string() + ": malformed header (truncated)");
  if (version != kTensorVersion) fail(Errc::Format, path.string() + ": unsupported version " + std::to_string(version));
  if (order == 0) fail(Errc::Format, path.string() + ": malformed header (order 0)");
  Dims dims(order);
  for (auto& d : dims) {
    std::uint64_t v = 0;
    if (!get(in, v)) fail(Errc::Format, path.string() + ": malformed header (truncated dims)");
    d = static_cast<Index>(v);
  }
  const Index count = element_count(dims, path);
  return DenseTensor(std::move(dims), read_payload(in, count, path));
}

DenseTensor read_raw64(const fs::path& path, const Dims& dims) {
  if (dims.empty()) fail(Errc::InvalidArgument, "raw conversion needs dims");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  const Index count = element_count(dims, path);
  return DenseTensor(dims, read_payload(in, count, path));
}

// ---------------------------------------------------------------------------
// Truth sidecar

void write_truth_sidecar(const KruskalModel& truth, const fs::path& tensor_path, double sigma,
                         std::optional<double> snr_db, std::uint64_t seed) {
  json meta;
  meta["rank"] = truth.rank();
  meta["dims"] = truth.dims();
  meta["sigma"] = sigma;
  meta["snr"] = snr_db ? json(*snr_db) : json(nullptr);
  meta["seed"] = seed;
  meta["rng"] = Rng::kAlgorithm;
  json files = json::array();
  const fs::path dir = tensor_path.parent_path();
  const std::string stem = tensor_path.stem().string();
  for (std::size_t n = 0; n < truth.order(); ++n) {
    const Matrix& f = truth.factor(n);
    const fs::path file = dir / (stem + ".A" + std::to_string(n + 1) + ".dten");
    // A column-major I_n x R matrix is already the mode-1-fastest layout.
    std::vector<double> values(f.data(), f.data() + f.size());
    write_tensor(DenseTensor({static_cast<Index>(f.rows()), static_cast<Index>(f.cols())}, std::move(values)), file);
    files.push_back(file.filename().string());
  }
  meta["factors"] = files;
  auto out = open_out(fs::path(tensor_path.string() + ".truth.json"));
  out << meta.dump(2) << '\n';
}

KruskalModel read_factors(const std::vector<fs::path>& paths) {
  std::vector<Matrix> factors;
  for (const auto& p : paths) {
    const DenseTensor t = read_tensor(p);
    if (t.order() != 2) fail(Errc::Format, p.string() + ": factor files must be 2-D");
    factors.push_back(Eigen::Map<const Matrix>(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1))));
  }
  return KruskalModel(std::move(factors));
}

// ---------------------------------------------------------------------------
// CSV

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records,
                   const std::vector<std::pair<std::string, std::string>>& extra_echo) {
  if (!records.empty()) {
    for (const auto& [k, v] : records.front().config) out << "# " << k << '=' << v << '\n';
  }
  for (const auto& [k, v] : extra_echo) out << "# " << k << '=' << v << '\n';
  out << "trial,full_iter,work_units,m_k,wall_seconds\n";
  for (std::size_t t = 0; t < records.size(); ++t) {
    for (const auto& cp : records[t].checkpoints) {
      out << t << ',' << cp.full_iter << ',' << cp.work_units << ',' << num(cp.m_k) << ',' << seconds(cp.wall_seconds) << '\n';
    }
  }
}

void write_run_csv(const fs::path& path, const std::vector<RunRecord>& records,
                   const std::vector<std::pair<std::string, std::string>>& extra_echo) {
  auto out = open_out(path, std::ios::out | std::ios::trunc);
  write_run_csv(out, records, extra_echo);
  if (!out) fail(Errc::Io, "write to " + path.string() + " failed");
}

// ---------------------------------------------------------------------------
// Bench configuration

namespace {

template <typename T>
std::vector<T> one_or_many(const json& v) {
  if (v.is_array()) {
    if (v.empty()) fail(Errc::InvalidArgument, "bench config: empty parameter list");
    return v.get<std::vector<T>>();
  }
  return {v.get<T>()};
}

std::optional<double> snr_value(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

Dims parse_dims_value(const json& v) {
  if (v.is_string()) {
    Dims dims;
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) dims.push_back(static_cast<Index>(std::stoull(item)));
    return dims;
  }
  return v.get<Dims>();
}

}  // namespace

BenchConfig parse_bench_config_text(const std::string& json_text) {
  BenchConfig cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::Format, std::string("bench config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::Format, "bench config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "solvers") {
        cfg.solvers = one_or_many<std::string>(v);
        for (const auto& s : cfg.solvers) parse_solver(s);
      } else if (key == "in") {
        cfg.input = v.get<std::string>();
      } else if (key == "dims") {
        cfg.dims = parse_dims_value(v);
      } else if (key == "rank") {
        cfg.rank = v.get<Index>();
      } else if (key == "snr") {
        cfg.snr_db.clear();
        if (v.is_array()) {
          for (const auto& s : v) cfg.snr_db.push_back(snr_value(s));
        } else {
          cfg.snr_db.push_back(snr_value(v));
        }
      } else if (key == "block") {
        cfg.block = one_or_many<Index>(v);
      } else if (key == "cond") {
        cfg.cond = one_or_many<double>(v);
      } else if (key == "eta") {
        cfg.eta = one_or_many<double>(v);
      } else if (key == "constraint") {
        cfg.base.constraint = Constraint::parse(v.get<std::string>());
      } else if (key == "seed") {
        cfg.base.seed = v.get<std::uint64_t>();
      } else if (key == "trials") {
        cfg.trials = v.get<unsigned>();
      } else if (key == "threads") {
        cfg.threads = v.get<unsigned>();
      } else if (key == "max-full-iters") {
        cfg.base.max_full_iters = v.get<std::uint64_t>();
      } else if (key == "tol") {
        cfg.base.tol = v.get<double>();
      } else if (key == "alpha") {
        cfg.base.diminishing.alpha = v.get<double>();
      } else if (key == "decay") {
        cfg.base.diminishing.decay = v.get<double>();
      } else if (key == "ada-b") {
        cfg.base.adagrad.b = v.get<double>();
      } else if (key == "ada-eps") {
        cfg.base.adagrad.eps = v.get<double>();
      } else if (key == "mode-selection") {
        const auto s = v.get<std::string>();
        if (s == "uniform") {
          cfg.base.selection = ModeSelection::Uniform;
        } else if (s == "round-robin") {
          cfg.base.selection = ModeSelection::RoundRobin;
        } else {
          fail(Errc::InvalidArgument, "bench config: unknown mode-selection '" + s + "'");
        }
      } else {
        fail(Errc::InvalidArgument, "bench config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("bench config: ") + e.what());
  }
  if (cfg.solvers.empty()) fail(Errc::InvalidArgument, "bench config: 'solvers' is required");
  if (cfg.rank < 1) fail(Errc::InvalidArgument, "bench config: 'rank' >= 1 is required");
  if (!cfg.input && cfg.dims.empty()) fail(Errc::InvalidArgument, "bench config: either 'in' or 'dims' is required");
  if (cfg.trials < 1) fail(Errc::InvalidArgument, "bench config: 'trials' must be >= 1");
  cfg.base.rank = cfg.rank;
  return cfg;
}

BenchConfig parse_bench_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config_text(ss.str());
}

std::vector<RunRecord> run_bench(const BenchConfig& config, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(Errc::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::optional<DenseTensor> real;
  if (config.input) real = read_tensor(*config.input);

  const bool single_point = config.snr_db.size() == 1 && config.block.size() == 1 && config.cond.size() == 1 &&
                            config.eta.size() == 1;
  std::vector<RunRecord> averages;
  auto avg_out = open_out(out_dir / "averaged.csv", std::ios::out | std::ios::trunc);
  avg_out << "label,solver,full_iter,work_units,m_k,wall_seconds\n";

  for (const auto& snr : config.snr_db) {
    TrialData data = [&](std::uint64_t seed) {
      if (real) return *real;
      return generate_synthetic({config.dims, config.rank, snr, seed}).noisy;
    };
    for (Index block : config.block) {
      for (double cond : config.cond) {
        for (double eta : config.eta) {
          for (const auto& solver : config.solvers) {
            RunConfig rc = config.base;
            rc.solver = parse_solver(solver);
            rc.blocksizes = {block};
            rc.cond = cond;
            rc.adagrad.eta = eta;
            std::string label = solver;
            if (!single_point) {
              label += "_snr" + (snr ? num(*snr) : std::string("inf")) + "_B" + std::to_string(block) + "_C" + num(cond) +
                       "_eta" + num(eta);
            }
            TrialSet set = run_trials(data, rc, config.trials, config.threads);
            std::vector<std::pair<std::string, std::string>> extra{
                {"label", label},
                {"data", real ? config.input->string() : "synthetic"},
                {"snr", snr ? num(*snr) : "none"},
                {"trials", std::to_string(config.trials)},
            };
            write_run_csv(out_dir / (label + ".csv"), set.trials, extra);
            for (const auto& cp : set.average.checkpoints) {
              avg_out << label << ',' << solver << ',' << cp.full_iter << ',' << cp.work_units << ',' << num(cp.m_k) << ','
                      << seconds(cp.wall_seconds) << '\n';
            }
            averages.push_back(std::move(set.average));
          }
        }
      }
    }
  }
  if (!avg_out) fail(Errc::Io, "write to averaged.csv failed");
  return averages;
}

}  // namespace ascpd::io
