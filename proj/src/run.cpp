#include "ascpd/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "ascpd/error.hpp"
#include "ascpd/experiments.hpp"

namespace ascpd {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<Index>& values) {
  std::string out;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (n) out += ',';
    out += std::to_string(values[n]);
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (rank < 1) fail(Errc::InvalidArgument, "rank must be >= 1");
  if (blocksizes.empty()) fail(Errc::InvalidArgument, "at least one blocksize is required");
  for (Index b : blocksizes)
    if (b < 1) fail(Errc::InvalidArgument, "blocksizes must be >= 1");
  if (!(cond > 1.0)) fail(Errc::InvalidArgument, "cond must exceed 1");
  if (!(diminishing.alpha >= 0.0) || !(diminishing.decay >= 0.0)) fail(Errc::InvalidArgument, "alpha and decay must be >= 0");
  if (!(adagrad.eta > 0.0) || !(adagrad.b > 0.0) || !(adagrad.eps >= 0.0)) {
    fail(Errc::InvalidArgument, "Adagrad needs eta > 0, b > 0, eps >= 0");
  }
  if (!(tol >= 0.0)) fail(Errc::InvalidArgument, "tol must be >= 0");
  if (als.inner_max_iters < 1 || !(als.inner_tol >= 0.0)) fail(Errc::InvalidArgument, "invalid ALS inner-loop settings");
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  return {
      {"solver", solver_id(solver)},
      {"rank", std::to_string(rank)},
      {"constraint", constraint.name()},
      {"block", join(blocksizes)},
      {"mode-selection", selection == ModeSelection::RoundRobin ? "round-robin" : "uniform"},
      {"cond", num(cond)},
      {"alpha", num(diminishing.alpha)},
      {"decay", num(diminishing.decay)},
      {"eta", num(adagrad.eta)},
      {"ada-b", num(adagrad.b)},
      {"ada-eps", num(adagrad.eps)},
      {"seed", std::to_string(seed)},
      {"max-full-iters", std::to_string(max_full_iters)},
      {"tol", num(tol)},
      {"rng", Rng::kAlgorithm},
  };
}

KruskalModel random_model(const Dims& dims, Index rank, Rng& rng) {
  std::vector<Matrix> factors;
  for (Index d : dims) {
    Matrix f(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank));
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = rng.uniform();
    factors.push_back(std::move(f));
  }
  return KruskalModel(std::move(factors));
}

RunRecord run(const DenseTensor& t, const RunConfig& config, KruskalModel* final_model) {
  config.validate();
  if (config.blocksizes.size() != 1 && config.blocksizes.size() != t.order()) {
    fail(Errc::InvalidArgument, "expected 1 or " + std::to_string(t.order()) + " blocksizes");
  }
  const double norm = frob_norm(t);
  if (!(norm > 0.0)) fail(Errc::InvalidArgument, "the data tensor is zero; m_k is undefined");

  Rng rng(config.seed);
  SolverState state(random_model(t.dims(), config.rank, rng));
  WorkAccountant accountant(t.dims());

  RunRecord record;
  record.solver = solver_id(config.solver);
  record.seed = config.seed;
  record.config = config.echo();

  const auto start = std::chrono::steady_clock::now();
  std::uint64_t full = 0;
  bool done = false;
  auto checkpoint = [&] {
    const double m = std::sqrt(objective(t, state.model)) / norm;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    record.checkpoints.push_back({full, accountant.entries_touched(), m, elapsed.count()});
    done = full >= config.max_full_iters || (config.tol > 0.0 && m <= config.tol);
  };
  checkpoint();

  if (config.solver == SolverKind::Als) {
    while (!done) {
      als_sweep(state, t, config.constraint, config.als);
      full += accountant.charge(accountant.full_iteration_cost());
      checkpoint();
    }
  } else {
    FiberSampler sampler(t.dims(), {config.blocksizes, config.selection});
    while (!done) {
      const FiberSample sample = sampler.draw(rng);
      switch (config.solver) {
        case SolverKind::Ascpd: ascpd_iteration(state, t, sample, config.constraint, config.cond); break;
        case SolverKind::Spg: spg_iteration(state, t, sample, config.constraint, config.cond); break;
        case SolverKind::BrasCpd: brascpd_iteration(state, t, sample, config.constraint, config.diminishing); break;
        case SolverKind::AdaCpd: adacpd_iteration(state, t, sample, config.constraint, config.adagrad); break;
        case SolverKind::Als: break;
      }
      const auto crossed = accountant.charge(sample.indices.size() * t.dim(sample.mode));
      for (std::uint64_t c = 0; c < crossed && !done; ++c) {
        ++full;
        checkpoint();
      }
    }
  }
  if (final_model) *final_model = state.model;
  return record;
}

}  // namespace ascpd
