#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ascpd/constraints.hpp"
#include "ascpd/sampling.hpp"
#include "ascpd/solvers.hpp"
#include "ascpd/tensor.hpp"

namespace ascpd {

/// Solver choice and hyperparameters for one trial (or a Monte-Carlo batch).
struct RunConfig {
  SolverKind solver = SolverKind::Ascpd;
  Index rank = 0;
  Constraint constraint{};
  std::vector<Index> blocksizes{100};
  ModeSelection selection = ModeSelection::Uniform;

  double cond = 100.0;
  Diminishing diminishing{};
  Adagrad adagrad{};
  AlsOptions als{};

  std::uint64_t seed = 1;
  std::uint64_t max_full_iters = 100;
  double tol = 0.0;  // stop once m_k <= tol; 0 disables

  void validate() const;
  /// Key/value pairs echoed into output files.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct Checkpoint {
  std::uint64_t full_iter = 0;
  std::uint64_t work_units = 0;
  double m_k = 0.0;
  double wall_seconds = 0.0;
};

struct RunRecord {
  std::string solver;
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  std::vector<std::pair<std::string, std::string>> config;
};

/// Factors drawn i.i.d. uniform on [0, 1) from `rng`.
KruskalModel random_model(const Dims& dims, Index rank, Rng& rng);

/// Runs one trial until the full-iteration budget is spent or m_k <= tol.
/// A checkpoint is recorded at k = 0 and every time the work accountant
/// completes a full iteration. The result is a pure function of (t, config)
/// apart from wall_seconds. The final model is stored in `final_model` if given.
RunRecord run(const DenseTensor& t, const RunConfig& config, KruskalModel* final_model = nullptr);

}  // namespace ascpd
