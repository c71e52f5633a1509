#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ascpd/experiments.hpp"
#include "ascpd/run.hpp"
#include "ascpd/tensor.hpp"

namespace ascpd::io {

// Tensor file layout, all little-endian:
//   "DTEN" | u16 version (=1) | u16 order N | N x u64 dims | prod(dims) x f64
// with values in mode-1-fastest order.
inline constexpr char kTensorMagic[4] = {'D', 'T', 'E', 'N'};
inline constexpr std::uint16_t kTensorVersion = 1;

void write_tensor(const DenseTensor& t, const std::filesystem::path& path);
DenseTensor read_tensor(const std::filesystem::path& path);

/// Wraps a headerless little-endian float64 dump in mode-1-fastest order.
DenseTensor read_raw64(const std::filesystem::path& path, const Dims& dims);

/// Writes each factor as a 2-D tensor file `<stem>.A<n>.dten` next to
/// `tensor_path`, plus `<tensor_path>.truth.json` describing them.
void write_truth_sidecar(const KruskalModel& truth, const std::filesystem::path& tensor_path, double sigma,
                         std::optional<double> snr_db, std::uint64_t seed);
KruskalModel read_factors(const std::vector<std::filesystem::path>& paths);

/// `trial,full_iter,work_units,m_k,wall_seconds` rows for every record,
/// preceded by `# key=value` echo lines.
void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records,
                   const std::vector<std::pair<std::string, std::string>>& extra_echo = {});
void write_run_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records,
                   const std::vector<std::pair<std::string, std::string>>& extra_echo = {});

/// Monte-Carlo grid: every combination of the listed parameters, for every solver.
struct BenchConfig {
  std::vector<std::string> solvers;
  std::optional<std::filesystem::path> input;  // real data; otherwise synthetic
  Dims dims;
  Index rank = 0;
  std::vector<std::optional<double>> snr_db{std::nullopt};
  std::vector<Index> block{100};
  std::vector<double> cond{100.0};
  std::vector<double> eta{1.0};
  RunConfig base;  // remaining solver settings
  unsigned trials = 10;
  unsigned threads = 0;
};

BenchConfig parse_bench_config(const std::filesystem::path& path);
BenchConfig parse_bench_config_text(const std::string& json_text);

/// Writes `<label>.csv` (per-trial rows) for each grid point and solver, and
/// `averaged.csv` with columns label,solver,full_iter,work_units,m_k,wall_seconds.
/// Returns the averaged records in write order.
std::vector<RunRecord> run_bench(const BenchConfig& config, const std::filesystem::path& out_dir);

}  // namespace ascpd::io
