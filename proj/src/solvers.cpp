#include "ascpd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "ascpd/error.hpp"
#include "ascpd/log.hpp"

namespace ascpd {

SolverKind parse_solver(std::string_view id) {
  if (id == "ascpd") return SolverKind::Ascpd;
  if (id == "spg") return SolverKind::Spg;
  if (id == "brascpd") return SolverKind::BrasCpd;
  if (id == "adacpd") return SolverKind::AdaCpd;
  if (id == "als") return SolverKind::Als;
  fail(Errc::InvalidArgument, "unknown solver '" + std::string(id) + "' (expected ascpd, spg, brascpd, adacpd or als)");
}

std::string solver_id(SolverKind kind) {
  switch (kind) {
    case SolverKind::Ascpd: return "ascpd";
    case SolverKind::Spg: return "spg";
    case SolverKind::BrasCpd: return "brascpd";
    case SolverKind::AdaCpd: return "adacpd";
    case SolverKind::Als: return "als";
  }
  return "unknown";
}

bool is_stochastic(SolverKind kind) { return kind != SolverKind::Als; }

SolverState::SolverState(KruskalModel initial) : model(initial), extrapolation(std::move(initial)) {
  for (const auto& f : model.factors()) adagrad_accumulator.push_back(Matrix::Zero(f.rows(), f.cols()));
}

// ---------------------------------------------------------------------------
// Sampled gradient and curvature

SampledGradient sampled_gradient(const DenseTensor& t, const KruskalModel& model, const FiberSample& sample,
                                 const Matrix& at) {
  check_compatible(t, model);
  const std::size_t i = sample.mode;
  if (i >= t.order()) fail(Errc::OutOfRange, "sample mode out of range");
  if (at.rows() != model.factor(i).rows() || at.cols() != model.factor(i).cols()) {
    fail(Errc::Shape, "gradient evaluation point has the wrong shape");
  }
  const Matrix kf = kr_rows(model, i, sample.indices);
  SampledGradient out;
  out.gram.noalias() = kf.transpose() * kf;
  out.grad.noalias() = at * out.gram;
  out.grad.noalias() -= partial_mttkrp(t, i, sample.indices, kf);
  return out;
}

std::pair<double, double> eigen_extremes(const Matrix& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) fail(Errc::Shape, "eigen_extremes needs a non-empty square matrix");
  if (!gram.allFinite()) fail(Errc::Numeric, "eigen_extremes: non-finite Gram entries");
  const Eigen::Index n = gram.rows();
  Matrix a = 0.5 * (gram + gram.transpose());
  const double scale = a.norm();
  if (scale == 0.0) return {0.0, 0.0};

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double tan = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tan * tan + 1.0);
        const double s = tan * c;
        // a <- J^T a J with the rotation acting on rows/columns p and q.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  const auto diag = a.diagonal();
  return {diag.maxCoeff(), std::max(diag.minCoeff(), 0.0)};
}

double lambda_rule(double L, double mu, double cond) {
  if (!(cond > 1.0)) fail(Errc::InvalidArgument, "condition target must exceed 1");
  if (mu < 0.0 || L < mu) fail(Errc::InvalidArgument, "lambda_rule requires L >= mu >= 0");
  if (mu > 0.0 && L / mu < cond) return mu;
  return L / cond;
}

CurvatureEstimate estimate_curvature(Matrix gram, double cond) {
  CurvatureEstimate c;
  std::tie(c.L, c.mu) = eigen_extremes(gram);
  c.mu = std::min(c.mu, c.L);
  c.gram = std::move(gram);
  c.lambda = lambda_rule(c.L, c.mu, cond);
  c.L_bar = c.L + c.lambda;
  c.mu_bar = c.mu + c.lambda;
  if (c.L_bar > 0.0) {
    const double sl = std::sqrt(c.L_bar);
    const double sm = std::sqrt(c.mu_bar);
    c.beta = (sl - sm) / (sl + sm);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Stochastic iterations

namespace {

void charge_sample(SolverState& state, const DenseTensor& t, const FiberSample& sample) {
  state.work_units += static_cast<std::uint64_t>(sample.indices.size()) * t.dim(sample.mode);
}

bool degenerate(const CurvatureEstimate& c, std::size_t mode) {
  if (c.L > 0.0) return false;
  log::warn("sampled Khatri-Rao rows of mode " + std::to_string(mode) + " are all zero; skipping iteration");
  return true;
}

}  // namespace

StepReport ascpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                           const Constraint& constraint, double cond, std::optional<double> beta_override) {
  const std::size_t i = sample.mode;
  StepReport report{i, std::nullopt, false};
  Matrix& a = state.model.factor(i);
  Matrix& y = state.extrapolation.factor(i);

  auto g = sampled_gradient(t, state.model, sample, y);
  charge_sample(state, t, sample);
  report.curvature = estimate_curvature(std::move(g.gram), cond);
  const auto& c = *report.curvature;
  ++state.iteration;
  if (degenerate(c, i)) {
    report.skipped = true;
    return report;
  }

  Matrix grad_reg = g.grad + c.lambda * (y - a);
  Matrix next = constraint.prox(y - grad_reg / c.L_bar);
  const double beta = beta_override.value_or(c.beta);
  y = next + beta * (next - a);
  a = std::move(next);
  return report;
}

StepReport spg_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                         const Constraint& constraint, double cond) {
  const std::size_t i = sample.mode;
  StepReport report{i, std::nullopt, false};
  Matrix& a = state.model.factor(i);

  auto g = sampled_gradient(t, state.model, sample, a);
  charge_sample(state, t, sample);
  report.curvature = estimate_curvature(std::move(g.gram), cond);
  const auto& c = *report.curvature;
  ++state.iteration;
  if (degenerate(c, i)) {
    report.skipped = true;
    return report;
  }
  // The proximal term vanishes at the evaluation point, so only L_bar remains.
  a = constraint.prox(a - g.grad / c.L_bar);
  state.extrapolation.factor(i) = a;
  return report;
}

StepReport brascpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                             const Constraint& constraint, const Diminishing& schedule) {
  const std::size_t i = sample.mode;
  Matrix& a = state.model.factor(i);
  const auto g = sampled_gradient(t, state.model, sample, a);
  charge_sample(state, t, sample);
  ++state.iteration;
  const double k = static_cast<double>(state.iteration);
  const double step = schedule.alpha / std::pow(k, schedule.decay) / static_cast<double>(sample.indices.size());
  a = constraint.prox(a - step * g.grad);
  state.extrapolation.factor(i) = a;
  return {i, std::nullopt, false};
}

StepReport adacpd_iteration(SolverState& state, const DenseTensor& t, const FiberSample& sample,
                            const Constraint& constraint, const Adagrad& schedule) {
  const std::size_t i = sample.mode;
  Matrix& a = state.model.factor(i);
  Matrix& acc = state.adagrad_accumulator.at(i);
  const auto g = sampled_gradient(t, state.model, sample, a);
  charge_sample(state, t, sample);
  ++state.iteration;
  acc.array() += g.grad.array().square();
  const double power = 0.5 + schedule.eps;
  // Entries with a zero gradient do not move, even when b = 0 leaves their step undefined.
  const Matrix delta = (g.grad.array() == 0.0)
                           .select(0.0, schedule.eta * g.grad.array() / (schedule.b + acc.array()).pow(power))
                           .matrix();
  a = constraint.prox(a - delta);
  state.extrapolation.factor(i) = a;
  return {i, std::nullopt, false};
}

// ---------------------------------------------------------------------------
// Alternating least squares baseline

Matrix gram_hadamard(const KruskalModel& model, std::size_t mode) {
  const auto r = static_cast<Eigen::Index>(model.rank());
  Matrix g = Matrix::Ones(r, r);
  for (std::size_t n = 0; n < model.order(); ++n) {
    if (n == mode) continue;
    g.array() *= (model.factor(n).transpose() * model.factor(n)).array();
  }
  return g;
}

namespace {

Matrix solve_normal_equations(const Matrix& gram, const Matrix& rhs) {
  // A G = M  <=>  G A^T = M^T (G symmetric).
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success) {
    Matrix sol = llt.solve(rhs.transpose()).transpose();
    if (sol.allFinite()) return sol;
  }
  const double trace = gram.trace();
  if (!(trace > 0.0)) fail(Errc::Numeric, "ALS: Gram matrix is zero; cannot repair with a ridge");
  Matrix ridged = gram;
  ridged.diagonal().array() += 1e-12 * trace / static_cast<double>(gram.rows());
  llt.compute(ridged);
  if (llt.info() != Eigen::Success) fail(Errc::Numeric, "ALS: Gram matrix singular beyond ridge repair");
  Matrix sol = llt.solve(rhs.transpose()).transpose();
  if (!sol.allFinite()) fail(Errc::Numeric, "ALS: non-finite least-squares solution");
  return sol;
}

void projected_block_solve(Matrix& a, const Matrix& gram, const Matrix& rhs, const Constraint& constraint,
                           const AlsOptions& options) {
  const auto [L, mu] = eigen_extremes(gram);
  if (!(L > 0.0)) return;
  const double beta = (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  Matrix y = a;
  for (int it = 0; it < options.inner_max_iters; ++it) {
    Matrix next = constraint.prox(y - (y * gram - rhs) / L);
    const double change = (next - a).norm();
    const double base = a.norm();
    y = next + beta * (next - a);
    a = std::move(next);
    if (change <= options.inner_tol * (base > 0.0 ? base : 1.0)) break;
  }
}

}  // namespace

void als_sweep(SolverState& state, const DenseTensor& t, const Constraint& constraint, const AlsOptions& options) {
  check_compatible(t, state.model);
  for (std::size_t i = 0; i < t.order(); ++i) {
    const Matrix gram = gram_hadamard(state.model, i);
    const Matrix rhs = mttkrp(t, state.model, i);
    state.work_units += t.size();
    Matrix& a = state.model.factor(i);
    if (constraint.kind == Constraint::Kind::Unconstrained) {
      a = solve_normal_equations(gram, rhs);
    } else {
      projected_block_solve(a, gram, rhs, constraint, options);
    }
    state.extrapolation.factor(i) = a;
  }
  ++state.iteration;
}

}  // namespace ascpd
