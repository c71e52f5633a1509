#include "ascpd/ascpd.h"

#include <new>
#include <string>

#include "ascpd/error.hpp"
#include "ascpd/experiments.hpp"
#include "ascpd/io.hpp"
#include "ascpd/log.hpp"
#include "ascpd/run.hpp"

struct ascpd_tensor {
  ascpd::DenseTensor value;
};

struct ascpd_model {
  ascpd::KruskalModel value;
};

struct ascpd_result {
  ascpd::TrialSet set;
  ascpd_model model;
};

namespace {

thread_local std::string g_last_error;

ascpd_status to_status(ascpd::Errc code) {
  switch (code) {
    case ascpd::Errc::InvalidArgument: return ASCPD_ERR_INVALID_ARGUMENT;
    case ascpd::Errc::Shape: return ASCPD_ERR_SHAPE;
    case ascpd::Errc::OutOfRange: return ASCPD_ERR_OUT_OF_RANGE;
    case ascpd::Errc::Io: return ASCPD_ERR_IO;
    case ascpd::Errc::Format: return ASCPD_ERR_FORMAT;
    case ascpd::Errc::Numeric: return ASCPD_ERR_NUMERIC;
  }
  return ASCPD_ERR_INTERNAL;
}

ascpd_status set_error(ascpd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ascpd_status guarded(F&& body) {
  try {
    body();
    return ASCPD_OK;
  } catch (const ascpd::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(ASCPD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(ASCPD_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(ASCPD_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) ascpd::fail(ascpd::Errc::InvalidArgument, what);
}

ascpd::Dims to_dims(size_t order, const uint64_t* dims) {
  require(order > 0 && dims != nullptr, "dims must be a non-empty array");
  return ascpd::Dims(dims, dims + order);
}

ascpd::RunConfig to_run_config(const ascpd_config& c) {
  ascpd::RunConfig rc;
  require(c.solver != nullptr, "config.solver is required");
  rc.solver = ascpd::parse_solver(c.solver);
  rc.rank = c.rank;
  rc.constraint = ascpd::Constraint::parse(c.constraint ? c.constraint : "none");
  require(c.blocks != nullptr && c.n_blocks > 0, "config.blocks must be a non-empty array");
  rc.blocksizes.assign(c.blocks, c.blocks + c.n_blocks);
  rc.selection = c.round_robin ? ascpd::ModeSelection::RoundRobin : ascpd::ModeSelection::Uniform;
  rc.cond = c.cond;
  rc.diminishing = {c.alpha, c.decay};
  rc.adagrad = {c.eta, c.ada_b, c.ada_eps};
  rc.seed = c.seed;
  rc.max_full_iters = c.max_full_iters;
  rc.tol = c.tol;
  rc.validate();
  return rc;
}

const uint64_t kDefaultBlock = 100;

}  // namespace

extern "C" {

const char* ascpd_version(void) { return "1.0.0"; }

const char* ascpd_status_string(ascpd_status status) {
  switch (status) {
    case ASCPD_OK: return "ok";
    case ASCPD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ASCPD_ERR_SHAPE: return "shape mismatch";
    case ASCPD_ERR_OUT_OF_RANGE: return "index out of range";
    case ASCPD_ERR_IO: return "I/O error";
    case ASCPD_ERR_FORMAT: return "malformed file";
    case ASCPD_ERR_NUMERIC: return "numerical failure";
    case ASCPD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ascpd_last_error(void) { return g_last_error.c_str(); }

void ascpd_set_quiet(int quiet) { ascpd::log::set_quiet(quiet != 0); }

// ---- tensors --------------------------------------------------------------

ascpd_status ascpd_tensor_create(size_t order, const uint64_t* dims, const double* values, ascpd_tensor** out) {
  return guarded([&] {
    require(out != nullptr && values != nullptr, "null argument");
    ascpd::Dims d = to_dims(order, dims);
    ascpd::Index total = 1;
    for (auto v : d) total *= v;
    *out = new ascpd_tensor{ascpd::DenseTensor(std::move(d), std::vector<double>(values, values + total))};
  });
}

ascpd_status ascpd_tensor_read(const char* path, ascpd_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ascpd_tensor{ascpd::io::read_tensor(path)};
  });
}

ascpd_status ascpd_tensor_write(const ascpd_tensor* tensor, const char* path) {
  return guarded([&] {
    require(tensor != nullptr && path != nullptr, "null argument");
    ascpd::io::write_tensor(tensor->value, path);
  });
}

ascpd_status ascpd_tensor_read_raw64(const char* path, size_t order, const uint64_t* dims, ascpd_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ascpd_tensor{ascpd::io::read_raw64(path, to_dims(order, dims))};
  });
}

void ascpd_tensor_destroy(ascpd_tensor* tensor) { delete tensor; }

size_t ascpd_tensor_order(const ascpd_tensor* tensor) { return tensor ? tensor->value.order() : 0; }

uint64_t ascpd_tensor_dim(const ascpd_tensor* tensor, size_t mode) {
  return tensor && mode < tensor->value.order() ? tensor->value.dim(mode) : 0;
}

size_t ascpd_tensor_size(const ascpd_tensor* tensor) { return tensor ? tensor->value.size() : 0; }

const double* ascpd_tensor_data(const ascpd_tensor* tensor) { return tensor ? tensor->value.data() : nullptr; }

double ascpd_tensor_frob_norm(const ascpd_tensor* tensor) { return tensor ? ascpd::frob_norm(tensor->value) : 0.0; }

// ---- models ---------------------------------------------------------------

ascpd_status ascpd_model_create(size_t order, const uint64_t* dims, uint64_t rank, const double* const* factors,
                                ascpd_model** out) {
  return guarded([&] {
    require(out != nullptr && factors != nullptr, "null argument");
    const ascpd::Dims d = to_dims(order, dims);
    std::vector<ascpd::Matrix> mats;
    for (size_t n = 0; n < order; ++n) {
      require(factors[n] != nullptr, "null factor");
      mats.emplace_back(Eigen::Map<const ascpd::Matrix>(factors[n], static_cast<Eigen::Index>(d[n]),
                                                        static_cast<Eigen::Index>(rank)));
    }
    *out = new ascpd_model{ascpd::KruskalModel(std::move(mats))};
  });
}

void ascpd_model_destroy(ascpd_model* model) { delete model; }

size_t ascpd_model_order(const ascpd_model* model) { return model ? model->value.order() : 0; }

uint64_t ascpd_model_rank(const ascpd_model* model) { return model ? model->value.rank() : 0; }

const double* ascpd_model_factor(const ascpd_model* model, size_t mode, uint64_t* rows) {
  if (!model || mode >= model->value.order()) return nullptr;
  const auto& f = model->value.factor(mode);
  if (rows) *rows = static_cast<uint64_t>(f.rows());
  return f.data();
}

ascpd_status ascpd_model_reconstruct(const ascpd_model* model, ascpd_tensor** out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = new ascpd_tensor{ascpd::reconstruct(model->value)};
  });
}

ascpd_status ascpd_metric(const ascpd_tensor* tensor, const ascpd_model* model, double* out) {
  return guarded([&] {
    require(tensor != nullptr && model != nullptr && out != nullptr, "null argument");
    *out = ascpd::metric(tensor->value, model->value);
  });
}

// ---- synthetic data -------------------------------------------------------

ascpd_status ascpd_synthesize(size_t order, const uint64_t* dims, uint64_t rank, int has_snr, double snr_db,
                              uint64_t seed, ascpd_tensor** noisy, ascpd_model** truth, double* sigma) {
  return guarded([&] {
    require(noisy != nullptr, "null argument");
    ascpd::SyntheticSpec spec{to_dims(order, dims), rank, std::nullopt, seed};
    if (has_snr) spec.snr_db = snr_db;
    auto data = ascpd::generate_synthetic(spec);
    auto* t = new ascpd_tensor{std::move(data.noisy)};
    if (truth) *truth = new ascpd_model{std::move(data.truth)};
    if (sigma) *sigma = data.sigma;
    *noisy = t;
  });
}

ascpd_status ascpd_write_truth_sidecar(const ascpd_model* truth, const char* tensor_path, double sigma, int has_snr,
                                       double snr_db, uint64_t seed) {
  return guarded([&] {
    require(truth != nullptr && tensor_path != nullptr, "null argument");
    ascpd::io::write_truth_sidecar(truth->value, tensor_path, sigma,
                                   has_snr ? std::optional<double>(snr_db) : std::nullopt, seed);
  });
}

// ---- decomposition --------------------------------------------------------

void ascpd_config_init(ascpd_config* c) {
  if (!c) return;
  *c = ascpd_config{};
  c->solver = "ascpd";
  c->rank = 0;
  c->constraint = "nonneg";
  c->blocks = &kDefaultBlock;
  c->n_blocks = 1;
  c->round_robin = 0;
  c->cond = 100.0;
  c->alpha = 0.1;
  c->decay = 1e-6;
  c->eta = 1.0;
  c->ada_b = 1e-6;
  c->ada_eps = 1e-6;
  c->seed = 1;
  c->trials = 1;
  c->threads = 0;
  c->max_full_iters = 100;
  c->tol = 0.0;
}

ascpd_status ascpd_decompose(const ascpd_tensor* tensor, const ascpd_config* config, ascpd_result** out) {
  return guarded([&] {
    require(tensor != nullptr && config != nullptr && out != nullptr, "null argument");
    require(config->trials >= 1, "config.trials must be >= 1");
    const ascpd::RunConfig rc = to_run_config(*config);
    const ascpd::DenseTensor& data = tensor->value;
    auto set = ascpd::run_trials([&](std::uint64_t) { return data; }, rc, config->trials, config->threads);
    auto* result = new ascpd_result{std::move(set), ascpd_model{}};
    result->model.value = result->set.models.front();
    *out = result;
  });
}

void ascpd_result_destroy(ascpd_result* result) { delete result; }

size_t ascpd_result_trials(const ascpd_result* result) { return result ? result->set.trials.size() : 0; }

namespace {
const ascpd::RunRecord* record_at(const ascpd_result* result, size_t trial) {
  if (!result) return nullptr;
  if (trial < result->set.trials.size()) return &result->set.trials[trial];
  if (trial == result->set.trials.size()) return &result->set.average;
  return nullptr;
}
}  // namespace

size_t ascpd_result_checkpoints(const ascpd_result* result, size_t trial) {
  const auto* r = record_at(result, trial);
  return r ? r->checkpoints.size() : 0;
}

ascpd_status ascpd_result_checkpoint(const ascpd_result* result, size_t trial, size_t index, uint64_t* full_iter,
                                     uint64_t* work_units, double* m_k, double* wall_seconds) {
  return guarded([&] {
    const auto* r = record_at(result, trial);
    if (!r || index >= r->checkpoints.size()) ascpd::fail(ascpd::Errc::OutOfRange, "checkpoint index out of range");
    const auto& cp = r->checkpoints[index];
    if (full_iter) *full_iter = cp.full_iter;
    if (work_units) *work_units = cp.work_units;
    if (m_k) *m_k = cp.m_k;
    if (wall_seconds) *wall_seconds = cp.wall_seconds;
  });
}

const ascpd_model* ascpd_result_model(const ascpd_result* result) { return result ? &result->model : nullptr; }

ascpd_status ascpd_result_write_csv(const ascpd_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr && path != nullptr, "null argument");
    ascpd::io::write_run_csv(path, result->set.trials, {{"trials", std::to_string(result->set.trials.size())}});
  });
}

ascpd_status ascpd_bench(const char* config_path, const char* out_dir) {
  return guarded([&] {
    require(config_path != nullptr && out_dir != nullptr, "null argument");
    ascpd::io::run_bench(ascpd::io::parse_bench_config(config_path), out_dir);
  });
}

}  // extern "C"
