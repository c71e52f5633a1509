#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ascpd/constraints.hpp"
#include "ascpd/sampling.hpp"
#include "ascpd/tensor.hpp"

namespace ascpd {

enum class SolverKind {
  Ascpd,    // accelerated stochastic proximal gradient
  Spg,      // same step without momentum ("locally optimal" BrasCPD)
  BrasCpd,  // diminishing step alpha / k^decay
  AdaCpd,   // Adagrad step
  Als,      // full-batch alternating least squares baseline
};

SolverKind parse_solver(std::string_view id);
std::string solver_id(SolverKind kind);
bool is_stochastic(SolverKind kind);

/// Iterate of a solver. `extrapolation` is only advanced by ASCPD and the
/// accumulator only by AdaCPD; both are sized at construction.
struct SolverState {
  KruskalModel model;
  KruskalModel extrapolation;
  std::uint64_t iteration = 0;
  std::vector<Matrix> adagrad_accumulator;
  std::uint64_t work_units = 0;

  explicit SolverState(KruskalModel initial);
};

/// Sampled Gram matrix K_F^T K_F with its extreme eigenvalues and the
/// regularized step parameters derived from them.
struct CurvatureEstimate {
  Matrix gram;
  double L = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double L_bar = 0.0;
  double mu_bar = 0.0;
  double beta = 0.0;
};

struct Diminishing {
  double alpha = 0.1;
  double decay = 1e-6;
};

struct Adagrad {
  double eta = 1.0;
  double b = 1e-6;
  double eps = 1e-6;
};

struct LocallyOptimal {
  double cond = 100.0;
};

using StepSchedule = std::variant<Diminishing, Adagrad, LocallyOptimal>;

struct SampledGradient {
  Matrix grad;
  Matrix gram;
};

/// grad = at * (K_F^T K_F) - X^(i)(F,:)^T K_F with K_F built from `model`.
SampledGradient sampled_gradient(const DenseTensor& t, const KruskalModel& model, const FiberSample& sample,
                                 const Matrix& at);

/// Largest and smallest (clamped at zero) eigenvalue of a small symmetric
/// matrix, by cyclic Jacobi rotations.
std::pair<double, double> eigen_extremes(const Matrix& gram);

/// mu if mu > 0 and L/mu < cond, otherwise L/cond.
double lambda_rule(double L, double mu, double cond);

CurvatureEstimate estimate_curvature(Matrix gram, double cond);

struct StepReport {
  std::size_t mode = 0;
  std::optional<CurvatureEstimate> curvature;
  bool skipped = false;  // all sampled Khatri-Rao rows were zero
};

/// One ASCPD iteration on sample.mode. `beta_override` replaces the
/// momentum coefficient (used to check the degenerate beta = 0 case).
StepReport ascpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                           const Constraint& constraint, double cond, std::optional<double> beta_override = {});

StepReport spg_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                         const Constraint& constraint, double cond);

StepReport brascpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                             const Constraint& constraint, const Diminishing& schedule);

StepReport adacpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                            const Constraint& constraint, const Adagrad& schedule);

struct AlsOptions {
  double inner_tol = 1e-8;
  int inner_max_iters = 50;
};

/// One Gauss-Seidel sweep over the modes. Unconstrained blocks are solved via
/// the normal equations; constrained blocks by an inner accelerated projected
/// gradient loop warm-started at the current factor.
void als_sweep(SolverState& state, const DenseTensor& t, const Constraint& constraint, const AlsOptions& options = {});

/// Hadamard product of the factor Grams over every mode except `mode`.
Matrix gram_hadamard(const KruskalModel& model, std::size_t mode);

}  // namespace ascpd
