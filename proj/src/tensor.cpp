#include "ascpd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ascpd/error.hpp"

namespace ascpd {

namespace {

// Rows per block for the blockwise kernels (mttkrp, objective, reconstruct).
constexpr Index kBlockRows = 512;

Index checked_product(const Dims& dims) {
  Index total = 1;
  for (Index d : dims) {
    if (d == 0) fail(Errc::Shape, "tensor dimensions must be positive");
    total *= d;
  }
  return total;
}

void check_mode(std::size_t mode, std::size_t order) {
  if (mode >= order) {
    fail(Errc::OutOfRange, "mode " + std::to_string(mode) + " out of range for order " + std::to_string(order));
  }
}

std::vector<Matrix> transposed_factors(const KruskalModel& model) {
  std::vector<Matrix> out;
  out.reserve(model.order());
  for (const auto& f : model.factors()) out.emplace_back(f.transpose());
  return out;
}

// K^(i)(rows,:) transposed (R x |rows|) from pre-transposed factors.
Matrix kr_rows_transposed(const std::vector<Matrix>& ft, const UnfoldingIndexMap& map, Index rank,
                          std::span<const Index> rows) {
  const std::size_t order = ft.size();
  Matrix out(rank, static_cast<Eigen::Index>(rows.size()));
  std::vector<Index> multi(order, 0);
  for (std::size_t f = 0; f < rows.size(); ++f) {
    map.multi_index(rows[f], multi);
    auto col = out.col(static_cast<Eigen::Index>(f));
    col.setOnes();
    for (std::size_t n = 0; n < order; ++n) {
      if (n == map.mode()) continue;
      col.array() *= ft[n].col(static_cast<Eigen::Index>(multi[n])).array();
    }
  }
  return out;
}

std::vector<Index> row_range(Index begin, Index end) {
  std::vector<Index> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(Dims dims) : DenseTensor(dims, std::vector<double>(checked_product(dims), 0.0)) {}

DenseTensor::DenseTensor(Dims dims, std::vector<double> values) : dims_(std::move(dims)), values_(std::move(values)) {
  if (dims_.empty()) fail(Errc::Shape, "tensor order must be at least 1");
  const Index total = checked_product(dims_);
  if (values_.size() != total) {
    fail(Errc::Shape, "tensor has " + std::to_string(values_.size()) + " values, dims require " + std::to_string(total));
  }
  strides_.resize(dims_.size());
  Index stride = 1;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    strides_[n] = stride;
    stride *= dims_[n];
  }
}

Index DenseTensor::linear_index(std::span<const Index> multi) const {
  if (multi.size() != dims_.size()) fail(Errc::Shape, "multi-index length does not match tensor order");
  Index linear = 0;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (multi[n] >= dims_[n]) fail(Errc::OutOfRange, "multi-index out of range");
    linear += multi[n] * strides_[n];
  }
  return linear;
}

bool DenseTensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// KruskalModel

KruskalModel::KruskalModel(std::vector<Matrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) fail(Errc::Shape, "a Kruskal model needs at least one factor");
  const auto rank = factors_.front().cols();
  if (rank < 1) fail(Errc::Shape, "rank must be positive");
  for (const auto& f : factors_) {
    if (f.cols() != rank) fail(Errc::Shape, "all factors must share the same column count");
    if (f.rows() < 1) fail(Errc::Shape, "factor row counts must be positive");
  }
}

KruskalModel KruskalModel::zeros(const Dims& dims, Index rank) {
  std::vector<Matrix> factors;
  for (Index d : dims) factors.push_back(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank)));
  return KruskalModel(std::move(factors));
}

Dims KruskalModel::dims() const {
  Dims d;
  for (const auto& f : factors_) d.push_back(static_cast<Index>(f.rows()));
  return d;
}

void check_compatible(const DenseTensor& t, const KruskalModel& model) {
  if (model.order() != t.order()) fail(Errc::Shape, "model order does not match tensor order");
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (static_cast<Index>(model.factor(n).rows()) != t.dim(n)) {
      fail(Errc::Shape, "factor " + std::to_string(n) + " has " + std::to_string(model.factor(n).rows()) +
                            " rows, tensor dim is " + std::to_string(t.dim(n)));
    }
  }
}

// ---------------------------------------------------------------------------
// UnfoldingIndexMap

UnfoldingIndexMap::UnfoldingIndexMap(const Dims& dims, std::size_t mode) : dims_(dims), mode_(mode) {
  check_mode(mode, dims.size());
  checked_product(dims);
  row_strides_.assign(dims.size(), 0);
  tensor_strides_.assign(dims.size(), 0);
  Index tensor_stride = 1;
  for (std::size_t n = 0; n < dims.size(); ++n) {
    tensor_strides_[n] = tensor_stride;
    tensor_stride *= dims[n];
    if (n == mode) continue;
    row_strides_[n] = rows_;
    rows_ *= dims[n];
  }
}

Index UnfoldingIndexMap::row_of(std::span<const Index> multi) const {
  if (multi.size() != dims_.size()) fail(Errc::Shape, "multi-index length does not match tensor order");
  Index row = 0;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (n == mode_) continue;
    if (multi[n] >= dims_[n]) fail(Errc::OutOfRange, "multi-index out of range");
    row += multi[n] * row_strides_[n];
  }
  return row;
}

void UnfoldingIndexMap::multi_index(Index row, std::span<Index> multi) const {
  if (row >= rows_) fail(Errc::OutOfRange, "fiber index " + std::to_string(row) + " out of range (J=" + std::to_string(rows_) + ")");
  if (multi.size() != dims_.size()) fail(Errc::Shape, "multi-index length does not match tensor order");
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (n == mode_) continue;
    multi[n] = row % dims_[n];
    row /= dims_[n];
  }
}

Index UnfoldingIndexMap::fiber_offset(Index row) const {
  if (row >= rows_) fail(Errc::OutOfRange, "fiber index " + std::to_string(row) + " out of range (J=" + std::to_string(rows_) + ")");
  Index offset = 0;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (n == mode_) continue;
    offset += (row % dims_[n]) * tensor_strides_[n];
    row /= dims_[n];
  }
  return offset;
}

// ---------------------------------------------------------------------------
// Unfolding

Matrix gather_fibers(const DenseTensor& t, std::size_t mode, std::span<const Index> rows) {
  const UnfoldingIndexMap map(t.dims(), mode);
  const Index cols = map.cols();
  const Index stride = map.fiber_stride();
  const double* data = t.data();
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const Index offset = map.fiber_offset(rows[f]);
    for (Index c = 0; c < cols; ++c) out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) = data[offset + c * stride];
  }
  return out;
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(mode, t.order());
  const UnfoldingIndexMap map(t.dims(), mode);
  return gather_fibers(t, mode, row_range(0, map.rows()));
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims) {
  check_mode(mode, dims.size());
  const UnfoldingIndexMap map(dims, mode);
  if (static_cast<Index>(m.rows()) != map.rows() || static_cast<Index>(m.cols()) != map.cols()) {
    fail(Errc::Shape, "matrix shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          " does not match the mode-" + std::to_string(mode) + " unfolding " +
                          std::to_string(map.rows()) + "x" + std::to_string(map.cols()));
  }
  DenseTensor out(dims);
  double* data = out.data();
  const Index stride = map.fiber_stride();
  for (Index row = 0; row < map.rows(); ++row) {
    const Index offset = map.fiber_offset(row);
    for (Index c = 0; c < map.cols(); ++c) data[offset + c * stride] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Khatri-Rao products

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    fail(Errc::Shape, "khatri_rao column mismatch: " + std::to_string(a.cols()) + " vs " + std::to_string(b.cols()));
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r) {
    for (Eigen::Index ia = 0; ia < a.rows(); ++ia) {
      out.col(r).segment(ia * b.rows(), b.rows()) = a(ia, r) * b.col(r);
    }
  }
  return out;
}

Matrix kr_rows(const KruskalModel& model, std::size_t mode, std::span<const Index> rows) {
  check_mode(mode, model.order());
  const UnfoldingIndexMap map(model.dims(), mode);
  return kr_rows_transposed(transposed_factors(model), map, model.rank(), rows).transpose();
}

Matrix kr_full(const KruskalModel& model, std::size_t mode) {
  check_mode(mode, model.order());
  const UnfoldingIndexMap map(model.dims(), mode);
  return kr_rows(model, mode, row_range(0, map.rows()));
}

// ---------------------------------------------------------------------------
// MTTKRP

Matrix partial_mttkrp(const DenseTensor& t, std::size_t mode, std::span<const Index> rows, const Matrix& kr_sampled) {
  check_mode(mode, t.order());
  if (static_cast<std::size_t>(kr_sampled.rows()) != rows.size()) {
    fail(Errc::Shape, "sampled Khatri-Rao rows do not match the number of fibers");
  }
  return gather_fibers(t, mode, rows).transpose() * kr_sampled;
}

Matrix partial_mttkrp(const DenseTensor& t, const KruskalModel& model, std::size_t mode, std::span<const Index> rows) {
  check_compatible(t, model);
  check_mode(mode, t.order());
  return partial_mttkrp(t, mode, rows, kr_rows(model, mode, rows));
}

Matrix mttkrp(const DenseTensor& t, const KruskalModel& model, std::size_t mode) {
  check_compatible(t, model);
  check_mode(mode, t.order());
  const UnfoldingIndexMap map(t.dims(), mode);
  const auto ft = transposed_factors(model);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(map.cols()), static_cast<Eigen::Index>(model.rank()));
  for (Index begin = 0; begin < map.rows(); begin += kBlockRows) {
    const auto rows = row_range(begin, std::min(map.rows(), begin + kBlockRows));
    const Matrix kt = kr_rows_transposed(ft, map, model.rank(), rows);
    out.noalias() += gather_fibers(t, mode, rows).transpose() * kt.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction and norms

DenseTensor reconstruct(const KruskalModel& model) {
  const Dims dims = model.dims();
  DenseTensor out(dims);
  const UnfoldingIndexMap map(dims, 0);
  const auto ft = transposed_factors(model);
  const auto i0 = static_cast<Eigen::Index>(dims[0]);
  // Mode-0 fibers are contiguous: X^(0)T is the I_0 x J column-major view of the data.
  Eigen::Map<Matrix> view(out.data(), i0, static_cast<Eigen::Index>(map.rows()));
  for (Index begin = 0; begin < map.rows(); begin += kBlockRows) {
    const Index end = std::min(map.rows(), begin + kBlockRows);
    const Matrix kt = kr_rows_transposed(ft, map, model.rank(), row_range(begin, end));
    view.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)).noalias() = model.factor(0) * kt;
  }
  return out;
}

double frob_norm(const DenseTensor& t) {
  double sum = 0.0;
  for (double v : t.values()) sum += v * v;
  return std::sqrt(sum);
}

double objective(const DenseTensor& t, const KruskalModel& model) {
  check_compatible(t, model);
  const UnfoldingIndexMap map(t.dims(), 0);
  const auto ft = transposed_factors(model);
  const auto i0 = static_cast<Eigen::Index>(t.dim(0));
  Eigen::Map<const Matrix> view(t.data(), i0, static_cast<Eigen::Index>(map.rows()));
  double sum = 0.0;
  for (Index begin = 0; begin < map.rows(); begin += kBlockRows) {
    const Index end = std::min(map.rows(), begin + kBlockRows);
    const Matrix kt = kr_rows_transposed(ft, map, model.rank(), row_range(begin, end));
    sum += (view.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) - model.factor(0) * kt)
               .squaredNorm();
  }
  return sum;
}

}  // namespace ascpd
