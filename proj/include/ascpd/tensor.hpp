#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ascpd {

using Index = std::size_t;
using Dims = std::vector<Index>;

/// Dense real matrix. Only shape and element access are part of the contract;
/// the storage order is Eigen's default (column-major).
using Matrix = Eigen::MatrixXd;

/// Order-N dense tensor stored mode-1-fastest: the 0-based multi-index
/// (i_0, ..., i_{N-1}) lives at sum_n i_n * prod_{m<n} I_m.
class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor.
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, std::vector<double> values);

  std::size_t order() const noexcept { return dims_.size(); }
  const Dims& dims() const noexcept { return dims_; }
  Index dim(std::size_t mode) const { return dims_.at(mode); }
  /// Linear stride of each mode.
  const std::vector<Index>& strides() const noexcept { return strides_; }
  Index size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const double* data() const noexcept { return values_.data(); }
  double* data() noexcept { return values_.data(); }

  Index linear_index(std::span<const Index> multi) const;
  double operator()(std::span<const Index> multi) const { return values_[linear_index(multi)]; }
  double& operator()(std::span<const Index> multi) { return values_[linear_index(multi)]; }

  bool all_finite() const noexcept;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Dims dims_;
  std::vector<Index> strides_;
  std::vector<double> values_;
};

/// N factor matrices A^(n) of shape I_n x R representing [[A^(0), ..., A^(N-1)]].
class KruskalModel {
 public:
  KruskalModel() = default;
  explicit KruskalModel(std::vector<Matrix> factors);

  static KruskalModel zeros(const Dims& dims, Index rank);

  std::size_t order() const noexcept { return factors_.size(); }
  Index rank() const noexcept { return factors_.empty() ? 0 : static_cast<Index>(factors_.front().cols()); }
  Dims dims() const;

  const Matrix& factor(std::size_t mode) const { return factors_.at(mode); }
  Matrix& factor(std::size_t mode) { return factors_.at(mode); }
  const std::vector<Matrix>& factors() const noexcept { return factors_; }

 private:
  std::vector<Matrix> factors_;
};

/// Throws Errc::Shape unless the model's factor row counts match the tensor dims.
void check_compatible(const DenseTensor& t, const KruskalModel& model);

/// Row/column bijection of the mode-i unfolding X^(i) (J^i x I_i). Row j
/// enumerates the surviving indices with the smallest surviving mode varying
/// fastest, which makes X^(i) = K^(i) A^(i)T hold with
/// K^(i) = A^(N) (.) ... (.) A^(i+1) (.) A^(i-1) (.) ... (.) A^(1).
class UnfoldingIndexMap {
 public:
  UnfoldingIndexMap(const Dims& dims, std::size_t mode);

  std::size_t mode() const noexcept { return mode_; }
  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return dims_[mode_]; }

  /// S_n for every mode; zero at the unfolded mode.
  const std::vector<Index>& row_strides() const noexcept { return row_strides_; }

  /// Row of the unfolding holding the given full multi-index.
  Index row_of(std::span<const Index> multi) const;
  /// Fills `multi[n]` for every n != mode; `multi[mode]` is left untouched.
  void multi_index(Index row, std::span<Index> multi) const;
  /// Linear tensor offset of element (row, column 0).
  Index fiber_offset(Index row) const;
  /// Linear tensor stride between consecutive columns of one row.
  Index fiber_stride() const noexcept { return tensor_strides_[mode_]; }

 private:
  Dims dims_;
  std::size_t mode_;
  Index rows_ = 1;
  std::vector<Index> row_strides_;
  std::vector<Index> tensor_strides_;
};

Matrix unfold(const DenseTensor& t, std::size_t mode);
DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims);

/// Columnwise Kronecker product; b's row index varies fastest.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// K^(i) for the given mode, J^i x R.
Matrix kr_full(const KruskalModel& model, std::size_t mode);

/// Rows of K^(i) selected by `rows`, computed as Hadamard products of factor
/// rows without forming K^(i).
Matrix kr_rows(const KruskalModel& model, std::size_t mode, std::span<const Index> rows);

/// X^(i)T K^(i), I_i x R.
Matrix mttkrp(const DenseTensor& t, const KruskalModel& model, std::size_t mode);

/// X^(i)(F,:)T K^(i)(F,:). Only the |F| * I_i entries of the sampled fibers are read.
Matrix partial_mttkrp(const DenseTensor& t, const KruskalModel& model, std::size_t mode,
                      std::span<const Index> rows);

/// Same product with K^(i)(F,:) supplied by the caller.
Matrix partial_mttkrp(const DenseTensor& t, std::size_t mode, std::span<const Index> rows,
                      const Matrix& kr_sampled);

/// Gathers X^(i)(F,:), |F| x I_i.
Matrix gather_fibers(const DenseTensor& t, std::size_t mode, std::span<const Index> rows);

DenseTensor reconstruct(const KruskalModel& model);

double frob_norm(const DenseTensor& t);

/// ||X - [[A]]||_F^2, evaluated blockwise without forming the full reconstruction.
double objective(const DenseTensor& t, const KruskalModel& model);

}  // namespace ascpd
