#include "ascpd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "ascpd/error.hpp"

namespace ascpd {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.rank < 1) fail(Errc::InvalidArgument, "synthetic rank must be >= 1");
  if (spec.dims.empty()) fail(Errc::InvalidArgument, "synthetic dims must be non-empty");
  Rng rng(derive_seed(spec.seed, 1));
  SyntheticData out{DenseTensor{}, random_model(spec.dims, spec.rank, rng), 0.0};
  out.noisy = reconstruct(out.truth);
  if (!spec.snr_db) return out;
  if (!std::isfinite(*spec.snr_db)) fail(Errc::InvalidArgument, "SNR must be finite");

  std::vector<double> noise(out.noisy.size());
  for (double& e : noise) e = rng.normal();
  double noise_sq = 0.0;
  for (double e : noise) noise_sq += e * e;
  const double signal = frob_norm(out.noisy);
  out.sigma = signal / (std::sqrt(std::pow(10.0, *spec.snr_db / 10.0)) * std::sqrt(noise_sq));
  auto values = out.noisy.values();
  for (std::size_t n = 0; n < values.size(); ++n) values[n] += out.sigma * noise[n];
  return out;
}

double metric(const DenseTensor& t, const KruskalModel& model) {
  const double norm = frob_norm(t);
  if (!(norm > 0.0)) fail(Errc::InvalidArgument, "m_k is undefined for a zero tensor");
  return std::sqrt(objective(t, model)) / norm;
}

WorkAccountant::WorkAccountant(const Dims& dims) {
  std::uint64_t total = 1;
  for (Index d : dims) total *= d;
  cost_ = 4 * total;
  if (cost_ == 0) fail(Errc::InvalidArgument, "work accountant needs positive dims");
}

std::uint64_t WorkAccountant::charge(std::uint64_t entries) {
  const std::uint64_t before = entries_ / cost_;
  entries_ += entries;
  return entries_ / cost_ - before;
}

std::uint64_t stochastic_iters_per_full(const Dims& dims, std::span<const Index> blocksizes) {
  if (blocksizes.size() != 1 && blocksizes.size() != dims.size()) {
    fail(Errc::InvalidArgument, "expected 1 or " + std::to_string(dims.size()) + " blocksizes");
  }
  double total = 1.0;
  for (Index d : dims) total *= static_cast<double>(d);
  double per_iter = 0.0;
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const Index b = blocksizes.size() == 1 ? blocksizes[0] : blocksizes[n];
    if (b < 1) fail(Errc::InvalidArgument, "blocksizes must be >= 1");
    const Index fibers = UnfoldingIndexMap(dims, n).rows();
    per_iter += static_cast<double>(std::min(b, fibers)) * static_cast<double>(dims[n]);
  }
  per_iter /= static_cast<double>(dims.size());
  return static_cast<std::uint64_t>(std::llround(4.0 * total / per_iter));
}

RunRecord average_records(std::span<const RunRecord> records) {
  if (records.empty()) fail(Errc::InvalidArgument, "nothing to average");
  std::size_t length = 0;
  for (const auto& r : records) {
    if (r.checkpoints.empty()) fail(Errc::InvalidArgument, "cannot average an empty record");
    length = std::max(length, r.checkpoints.size());
  }
  RunRecord avg;
  avg.solver = records.front().solver;
  avg.seed = records.front().seed;
  for (const auto& r : records) avg.seed = std::min(avg.seed, r.seed);
  avg.config = records.front().config;

  const auto count = static_cast<double>(records.size());
  std::vector<double> m(records.size()), wall(records.size());
  std::vector<std::uint64_t> work(records.size());
  for (std::size_t k = 0; k < length; ++k) {
    for (std::size_t t = 0; t < records.size(); ++t) {
      const auto& cps = records[t].checkpoints;
      const auto& cp = cps[std::min(k, cps.size() - 1)];
      m[t] = cp.m_k;
      wall[t] = cp.wall_seconds;
      work[t] = cp.work_units;
    }
    std::sort(m.begin(), m.end());
    std::sort(wall.begin(), wall.end());
    double m_sum = 0.0, wall_sum = 0.0, work_sum = 0.0;
    for (std::size_t t = 0; t < records.size(); ++t) {
      m_sum += m[t];
      wall_sum += wall[t];
      work_sum += static_cast<double>(work[t]);
    }
    avg.checkpoints.push_back({static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(std::llround(work_sum / count)),
                               m_sum / count, wall_sum / count});
  }
  return avg;
}

TrialSet run_trials(const TrialData& data, const RunConfig& config, unsigned trials, unsigned threads) {
  if (trials < 1) fail(Errc::InvalidArgument, "trials must be >= 1");
  config.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, trials);

  std::vector<std::optional<RunRecord>> results(trials);
  std::vector<KruskalModel> models(trials);
  std::vector<std::exception_ptr> errors(trials);
  std::atomic<unsigned> next{0};
  auto worker = [&] {
    for (unsigned t = next++; t < trials; t = next++) {
      try {
        RunConfig trial = config;
        trial.seed = config.seed + t;
        results[t] = run(data(trial.seed), trial, &models[t]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  for (unsigned t = 0; t < trials; ++t) {
    if (!errors[t]) continue;
    const std::string seed = std::to_string(config.seed + t);
    try {
      std::rethrow_exception(errors[t]);
    } catch (const Error& e) {
      throw Error(e.code(), "trial " + std::to_string(t) + " (seed " + seed + ") failed: " + e.what());
    } catch (const std::exception& e) {
      fail(Errc::Numeric, "trial " + std::to_string(t) + " (seed " + seed + ") failed: " + e.what());
    }
  }
  TrialSet set;
  for (auto& r : results) set.trials.push_back(std::move(*r));
  set.models = std::move(models);
  set.average = average_records(set.trials);
  return set;
}

}  // namespace ascpd
