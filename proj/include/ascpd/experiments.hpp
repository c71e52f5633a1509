#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ascpd/run.hpp"
#include "ascpd/tensor.hpp"

namespace ascpd {

struct SyntheticSpec {
  Dims dims;
  Index rank = 1;
  std::optional<double> snr_db;  // empty: noiseless
  std::uint64_t seed = 1;
};

struct SyntheticData {
  DenseTensor noisy;
  KruskalModel truth;
  double sigma = 0.0;
};

/// Nonnegative rank-R tensor with uniform [0,1) factors plus sigma * E,
/// E i.i.d. standard normal. sigma is solved from the realized norms so that
/// ||X0||^2 / (sigma^2 ||E||^2) equals the target SNR exactly.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Relative reconstruction error ||X - [[A]]||_F / ||X||_F.
double metric(const DenseTensor& t, const KruskalModel& model);

/// Charges tensor entries touched by (partial) MTTKRPs and converts them to
/// full iterations of 4 * prod(I_n) entries each.
class WorkAccountant {
 public:
  explicit WorkAccountant(const Dims& dims);

  /// Adds `entries` and returns how many full-iteration boundaries were crossed.
  std::uint64_t charge(std::uint64_t entries);

  std::uint64_t entries_touched() const noexcept { return entries_; }
  std::uint64_t full_iterations() const noexcept { return entries_ / cost_; }
  std::uint64_t full_iteration_cost() const noexcept { return cost_; }

 private:
  std::uint64_t entries_ = 0;
  std::uint64_t cost_ = 0;
};

/// round(4 prod(I) / mean_i(B_i I_i)): stochastic iterations per full iteration.
std::uint64_t stochastic_iters_per_full(const Dims& dims, std::span<const Index> blocksizes);

struct TrialSet {
  std::vector<RunRecord> trials;
  std::vector<KruskalModel> models;  // final factors, per trial
  RunRecord average;
};

/// Per-checkpoint mean over trials. A trial that stopped early contributes
/// its last checkpoint to later ones. The sum is taken over sorted values, so
/// the result does not depend on the order of `records`.
RunRecord average_records(std::span<const RunRecord> records);

/// Provides the data tensor for a trial given its seed.
using TrialData = std::function<DenseTensor(std::uint64_t trial_seed)>;

/// Trial t runs with seed config.seed + t on data(config.seed + t). Trials
/// run on up to `threads` threads (0: hardware concurrency); aggregation is
/// in trial order. A failing trial aborts with its seed in the message.
TrialSet run_trials(const TrialData& data, const RunConfig& config, unsigned trials, unsigned threads = 0);

}  // namespace ascpd
