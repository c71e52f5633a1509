// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--cli PATH] [--workdir DIR] [N ...]
//
// With no numbers every criterion runs. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ascpd/experiments.hpp"
#include "ascpd/log.hpp"
#include "ascpd/solvers.hpp"
#include "oracles.hpp"

using namespace ascpd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g_cli;
fs::path g_workdir;

// ---------------------------------------------------------------------------

Outcome kernel_oracles() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> order_dist(2, 4);
  std::uniform_int_distribution<Index> dim_dist(1, 6);
  std::uniform_int_distribution<Index> rank_dist(1, 4);
  double worst = 0.0;
  int instances = 0;
  for (; instances < 150; ++instances) {
    Dims dims(order_dist(gen));
    for (auto& d : dims) d = dim_dist(gen);
    const Index rank = rank_dist(gen);
    const auto t = oracle::random_tensor(gen, dims);
    const auto f = oracle::random_factors(gen, dims, rank);
    const KruskalModel model(f);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const Matrix xu = oracle::unfold(t, i);
      const Matrix k = oracle::kr_chain(f, i);
      worst = std::max(worst, oracle::rel_err(unfold(t, i), xu));
      const auto back = fold(xu, i, dims);
      for (Index n = 0; n < t.size(); ++n)
        if (back.values()[n] != t.values()[n]) worst = std::max(worst, 1.0);
      worst = std::max(worst, oracle::rel_err(mttkrp(t, model, i), xu.transpose() * k));

      std::vector<Index> rows;
      std::bernoulli_distribution keep(0.5);
      for (Index j = 0; j < static_cast<Index>(k.rows()); ++j)
        if (keep(gen)) rows.push_back(j);
      if (rows.empty()) rows.push_back(0);
      const Matrix kf = oracle::select_rows(k, rows);
      worst = std::max(worst, oracle::rel_err(kr_rows(model, i, rows), kf));
      worst = std::max(worst, oracle::rel_err(partial_mttkrp(t, model, i, rows), oracle::select_rows(xu, rows).transpose() * kf));
    }
  }
  return {worst <= 1e-12, std::to_string(instances) + " instances, worst rel err " + fmt("%.2e", worst)};
}

Outcome gradient_correctness() {
  double worst_fd = 0.0, worst_full = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 gen(seed);
    const Dims dims{4, 3, 2};
    const auto t = oracle::random_tensor(gen, dims);
    const auto f = oracle::random_factors(gen, dims, 2);
    const KruskalModel model(f);
    for (std::size_t i = 0; i < 3; ++i) {
      const Index J = UnfoldingIndexMap(dims, i).rows();
      Rng rng(seed * 10 + i);
      const auto rows = sample_fibers(rng, J, std::max<Index>(2, J / 2));
      const FiberSample s{i, rows, 0};
      const Matrix xu = oracle::unfold(t, i);
      const Matrix k = oracle::kr_chain(f, i);
      const Matrix fd = oracle::central_difference(oracle::select_rows(xu, rows), oracle::select_rows(k, rows), f[i], 1e-6);
      worst_fd = std::max(worst_fd, oracle::rel_err(sampled_gradient(t, model, s, f[i]).grad, fd));

      std::vector<Index> all(J);
      std::iota(all.begin(), all.end(), Index{0});
      const Matrix full = f[i] * (k.transpose() * k) - xu.transpose() * k;
      worst_full = std::max(worst_full, oracle::rel_err(sampled_gradient(t, model, {i, all, 0}, f[i]).grad, full));
    }
  }
  return {worst_fd <= 1e-6 && worst_full <= 1e-12,
          "FD rel err " + fmt("%.2e", worst_fd) + ", full-F rel err " + fmt("%.2e", worst_full)};
}

Outcome lambda_invariants() {
  const double cond = 100.0;
  const auto data = generate_synthetic({{20, 20, 20}, 5, 20.0, 7});
  Rng rng(7);
  SolverState state(random_model(data.noisy.dims(), 5, rng));
  // Small blocks make ill-conditioned Grams common, so both branches of the rule are hit.
  FiberSampler sampler(data.noisy.dims(), {{6}, ModeSelection::Uniform});
  const auto constraint = Constraint::parse("nonneg");
  double worst_ratio = 0.0, worst_beta = 0.0, min_beta = 1.0;
  int violations = 0, clipped = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto report = ascpd_iteration(state, data.noisy, sampler.draw(rng), constraint, cond);
    const auto& c = *report.curvature;
    const double ratio = c.L_bar / c.mu_bar;
    clipped += c.lambda != c.mu;
    // One rounding step of slack: L_bar and mu_bar are each rounded once.
    if (!(ratio <= (cond + 1.0) * (1.0 + 4e-16)) || !(c.beta >= 0.0 && c.beta < 1.0)) ++violations;
    worst_ratio = std::max(worst_ratio, ratio);
    worst_beta = std::max(worst_beta, c.beta);
    min_beta = std::min(min_beta, c.beta);
  }
  return {violations == 0, "max L_bar/mu_bar " + fmt("%.12g", worst_ratio) + ", beta in [" + fmt("%.4f", min_beta) + ", " +
                               fmt("%.6f", worst_beta) + "], L/C branch " + std::to_string(clipped) +
                               "/10000, violations " + std::to_string(violations)};
}

Outcome als_monotone() {
  std::mt19937_64 gen(99);
  const Dims dims{10, 10, 10};
  const auto t = oracle::random_tensor(gen, dims);
  SolverState state{KruskalModel(oracle::random_factors(gen, dims, 4))};
  double prev = objective(t, state.model);
  double worst_rise = 0.0;
  for (int sweep = 0; sweep < 50; ++sweep) {
    als_sweep(state, t, Constraint{});
    const double now = objective(t, state.model);
    worst_rise = std::max(worst_rise, (now - prev) / prev);
    prev = now;
  }
  return {worst_rise <= 1e-10, "largest relative increase " + fmt("%.2e", worst_rise)};
}

Outcome noiseless_recovery() {
  int hits = 0;
  std::string finals;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = generate_synthetic({{20, 20, 20}, 5, std::nullopt, seed});
    RunConfig cfg;
    cfg.solver = SolverKind::Ascpd;
    cfg.rank = 5;
    cfg.constraint = Constraint::parse("nonneg");
    cfg.blocksizes = {100};
    cfg.cond = 100.0;
    cfg.seed = seed;
    cfg.max_full_iters = 200;
    cfg.tol = 1e-3;
    const auto r = run(data.noisy, cfg);
    const auto& last = r.checkpoints.back();
    if (last.m_k <= 1e-3) ++hits;
    finals += (finals.empty() ? "" : " ") + fmt("%.1e", last.m_k) + "@" + std::to_string(last.full_iter);
  }
  return {hits >= 8, std::to_string(hits) + "/10 seeds reach 1e-3 [" + finals + "]"};
}

std::map<std::string, double> grid_finals(double snr, const std::vector<SolverKind>& solvers) {
  std::map<std::string, double> out;
  for (auto solver : solvers) {
    RunConfig cfg;
    cfg.solver = solver;
    cfg.rank = 20;
    cfg.constraint = Constraint::parse("nonneg");
    cfg.blocksizes = {200};
    cfg.cond = 100.0;
    cfg.adagrad.eta = 1.0;
    cfg.seed = 1;
    cfg.max_full_iters = 100;
    TrialData data = [snr](std::uint64_t seed) { return generate_synthetic({{60, 60, 60}, 20, snr, seed}).noisy; };
    const auto set = run_trials(data, cfg, 10);
    out[solver_id(solver)] = set.average.checkpoints.back().m_k;
  }
  return out;
}

std::string describe(const std::map<std::string, double>& m) {
  std::string s;
  for (const auto& [k, v] : m) s += (s.empty() ? "" : ", ") + k + "=" + fmt("%.4e", v);
  return s;
}

Outcome high_snr_ordering() {
  const auto m = grid_finals(30.0, {SolverKind::Ascpd, SolverKind::AdaCpd, SolverKind::Spg});
  const bool ok = m.at("ascpd") <= m.at("adacpd") && m.at("ascpd") <= m.at("spg");
  return {ok, describe(m)};
}

Outcome low_snr_behavior() {
  const auto m = grid_finals(10.0, {SolverKind::Als, SolverKind::Ascpd, SolverKind::AdaCpd, SolverKind::Spg});
  bool ok = true;
  for (const auto& [k, v] : m)
    if (k != "als") ok = ok && m.at("als") <= v + 0.02;
  return {ok, describe(m)};
}

Outcome exhaustive_expectation() {
  std::mt19937_64 gen(8);
  const Dims dims{3, 2, 2};
  const auto t = oracle::random_tensor(gen, dims);
  const auto f = oracle::random_factors(gen, dims, 2);
  const KruskalModel model(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const Index J = UnfoldingIndexMap(dims, i).rows();
    Matrix mean = Matrix::Zero(f[i].rows(), 2);
    int count = 0;
    for (Index a = 0; a < J; ++a)
      for (Index b = a + 1; b < J; ++b, ++count) mean += sampled_gradient(t, model, {i, {a, b}, 0}, f[i]).grad;
    mean /= count;
    const Matrix k = oracle::kr_chain(f, i);
    const Matrix full = f[i] * (k.transpose() * k) - oracle::unfold(t, i).transpose() * k;
    worst = std::max(worst, oracle::rel_err(mean, (2.0 / static_cast<double>(J)) * full));
  }
  return {worst <= 1e-10, "worst rel err " + fmt("%.2e", worst)};
}

std::string strip_wall(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + '\n';
  }
  return out;
}

Outcome cli_determinism() {
  if (g_cli.empty()) return {false, "no --cli path given"};
  fs::create_directories(g_workdir);
  const auto quote = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const fs::path x = g_workdir / "det.dten";
  auto sh = [&](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
  if (sh(g_cli + " synth --dims 12,10,8 --rank 3 --snr 20 --seed 5 --out " + quote(x)) != 0) return {false, "synth failed"};
  int same = 0, total = 0;
  std::string bad;
  for (const std::string solver : {"ascpd", "spg", "brascpd", "adacpd", "als"}) {
    std::string csvs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path csv = g_workdir / (solver + std::to_string(rep) + ".csv");
      const std::string cmd = g_cli + " -q decompose --in " + quote(x) + " --solver " + solver +
                              " --rank 3 --block 7 --cond 100 --constraint nonneg --seed 11 --max-full-iters 6"
                              " --trials 3 --threads 3 --csv " + quote(csv);
      if (sh(cmd) != 0) return {false, solver + ": decompose failed"};
      csvs[rep] = strip_wall(csv);
    }
    ++total;
    if (csvs[0] == csvs[1] && !csvs[0].empty()) {
      ++same;
    } else {
      bad += " " + solver;
    }
  }
  return {same == total, std::to_string(same) + "/" + std::to_string(total) + " solvers byte-identical" +
                             (bad.empty() ? "" : " (differs:" + bad + ")")};
}

Outcome snr_exactness() {
  double worst = 0.0;
  for (double snr : {10.0, 30.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto d = generate_synthetic({{30, 20, 10}, 4, snr, seed});
      const auto clean = oracle::reconstruct(d.truth.factors());
      double signal = 0.0, noise = 0.0;
      for (std::size_t n = 0; n < clean.size(); ++n) {
        const double e = d.noisy.values()[n] - clean[n];
        signal += clean[n] * clean[n];
        noise += e * e;
      }
      worst = std::max(worst, std::abs(signal / noise / std::pow(10.0, snr / 10.0) - 1.0));
    }
  }
  return {worst <= 1e-12, "worst relative deviation " + fmt("%.2e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  g_workdir = fs::temp_directory_path() / "ascpd_acceptance";
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--cli" && a + 1 < argc) {
      g_cli = "'" + std::string(argv[++a]) + "'";
    } else if (arg == "--workdir" && a + 1 < argc) {
      g_workdir = argv[++a];
    } else {
      wanted.push_back(std::stoi(arg));
    }
  }
  log::set_quiet(true);

  const std::vector<Criterion> criteria{
      {1, "kernel oracle equivalence", 10, kernel_oracles},
      {2, "gradient correctness", 5, gradient_correctness},
      {3, "lambda-rule and momentum invariants", 60, lambda_invariants},
      {4, "ALS monotonicity", 5, als_monotone},
      {5, "noiseless recovery", 120, noiseless_recovery},
      {6, "high-SNR ordering", 600, high_snr_ordering},
      {7, "low-SNR behavior", 600, low_snr_behavior},
      {8, "exhaustive expectation", 60, exhaustive_expectation},
      {9, "CLI determinism", 60, cli_determinism},
      {10, "SNR exactness", 60, snr_exactness},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt("%.2f", secs) << " s" << (in_time ? "" : ", over the " + fmt("%.0f", c.time_limit) + " s limit")
              << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
