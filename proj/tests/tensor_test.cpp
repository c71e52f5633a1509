#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ascpd/error.hpp"
#include "ascpd/tensor.hpp"
#include "oracles.hpp"

using namespace ascpd;

namespace {

DenseTensor iota_tensor(const Dims& dims, double start = 1.0) {
  std::vector<double> v(oracle::total(dims));
  std::iota(v.begin(), v.end(), start);
  return DenseTensor(dims, std::move(v));
}

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Dims random_dims(std::mt19937_64& gen, std::size_t max_order, Index max_dim) {
  std::uniform_int_distribution<std::size_t> order(1, max_order);
  std::uniform_int_distribution<Index> dim(1, max_dim);
  Dims d(order(gen));
  for (auto& x : d) x = dim(gen);
  return d;
}

}  // namespace

TEST(DenseTensor, RejectsMismatchedValueCount) {
  EXPECT_THROW(DenseTensor({2, 2}, std::vector<double>(3)), Error);
  EXPECT_THROW(DenseTensor(Dims{2, 0}), Error);
  EXPECT_THROW(DenseTensor(Dims{}), Error);
}

TEST(DenseTensor, LayoutIsModeOneFastest) {
  const auto t = iota_tensor({2, 3, 4}, 0.0);
  const std::vector<Index> idx{1, 2, 3};
  EXPECT_EQ(t(idx), 1 + 2 * 2 + 3 * 6);
}

TEST(KruskalModel, RequiresSharedRank) {
  EXPECT_THROW(KruskalModel({Matrix::Zero(2, 2), Matrix::Zero(3, 1)}), Error);
  const auto m = KruskalModel::zeros({2, 3, 4}, 5);
  EXPECT_EQ(m.rank(), 5u);
  EXPECT_EQ(m.dims(), (Dims{2, 3, 4}));
}

TEST(Unfold, SmallExampleMode1) {
  const auto x = unfold(iota_tensor({2, 2, 2}), 0);
  EXPECT_EQ(x, rows_of({{1, 2}, {3, 4}, {5, 6}, {7, 8}}));
}

TEST(Unfold, ZeroTensor) {
  const auto x = unfold(DenseTensor(Dims{3, 4, 5}), 1);
  EXPECT_EQ(x.rows(), 15);
  EXPECT_EQ(x.cols(), 4);
  EXPECT_TRUE(x.isZero(0.0));
}

TEST(Unfold, ModeOutOfRange) { EXPECT_THROW(unfold(iota_tensor({2, 2}), 2), Error); }

TEST(Unfold, MatchesBruteForceAndRoundTrips) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Dims dims = random_dims(gen, 4, 5);
    const auto t = oracle::random_tensor(gen, dims);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const Matrix x = unfold(t, i);
      EXPECT_EQ(x, oracle::unfold(t, i));
      EXPECT_EQ(fold(x, i, dims), t);
    }
  }
}

TEST(Fold, InverseOfSmallExample) {
  const auto t = fold(rows_of({{1, 2}, {3, 4}, {5, 6}, {7, 8}}), 0, {2, 2, 2});
  EXPECT_EQ(t, iota_tensor({2, 2, 2}));
}

TEST(Fold, ScalarTensor) {
  const auto t = fold(rows_of({{7}}), 0, {1, 1, 1});
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.values()[0], 7.0);
}

TEST(Fold, ShapeMismatch) { EXPECT_THROW(fold(Matrix::Zero(3, 2), 0, {2, 2, 2}), Error); }

TEST(UnfoldingIndexMap, Bijection) {
  const Dims dims{3, 4, 5};
  for (std::size_t i = 0; i < 3; ++i) {
    const UnfoldingIndexMap map(dims, i);
    EXPECT_EQ(map.rows(), 60u / dims[i]);
    std::vector<Index> multi(3, 0);
    for (Index j = 0; j < map.rows(); ++j) {
      map.multi_index(j, multi);
      EXPECT_EQ(map.row_of(multi), j);
    }
    EXPECT_THROW(map.multi_index(map.rows(), multi), Error);
  }
}

TEST(KhatriRao, SmallExample) {
  const Matrix a = rows_of({{1, 2}, {3, 4}});
  const Matrix b = rows_of({{0, 1}, {1, 0}});
  EXPECT_EQ(khatri_rao(a, b), rows_of({{0, 2}, {1, 0}, {0, 4}, {3, 0}}));
}

TEST(KhatriRao, OnesRowIsIdentity) {
  std::mt19937_64 gen(3);
  const Matrix b = oracle::random_matrix(gen, 4, 3);
  EXPECT_EQ(khatri_rao(Matrix::Ones(1, 3), b), b);
  EXPECT_EQ(khatri_rao(b, Matrix::Ones(1, 3)), b);
}

TEST(KhatriRao, ColumnMismatch) { EXPECT_THROW(khatri_rao(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), Error); }

TEST(KrFull, MatchesChainOrdering) {
  std::mt19937_64 gen(5);
  const auto f = oracle::random_factors(gen, {3, 4, 2}, 2);
  const KruskalModel model(f);
  // N = 3, mode 2 (1-based) -> A^(3) (.) A^(1)
  EXPECT_LT(oracle::rel_err(kr_full(model, 1), khatri_rao(f[2], f[0])), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(oracle::rel_err(kr_full(model, i), oracle::kr_chain(f, i)), 1e-15);
}

TEST(KrFull, RankOneOnes) {
  const KruskalModel model({Matrix::Ones(2, 1), Matrix::Ones(3, 1), Matrix::Ones(4, 1)});
  EXPECT_EQ(kr_full(model, 0), Matrix::Ones(12, 1));
}

TEST(KrRows, SmallExample) {
  const KruskalModel model({rows_of({{1}, {2}}), rows_of({{3}, {4}}), rows_of({{5}, {6}})});
  const std::vector<Index> rows{0, 3};
  EXPECT_EQ(kr_rows(model, 0, rows), rows_of({{15}, {24}}));
}

TEST(KrRows, EmptyAndFullSelection) {
  std::mt19937_64 gen(8);
  const KruskalModel model(oracle::random_factors(gen, {3, 2, 4}, 3));
  EXPECT_EQ(kr_rows(model, 1, {}).rows(), 0);
  EXPECT_EQ(kr_rows(model, 1, {}).cols(), 3);
  std::vector<Index> all(12);
  std::iota(all.begin(), all.end(), Index{0});
  EXPECT_EQ(kr_rows(model, 1, all), kr_full(model, 1));  // bitwise
  const Matrix full = kr_full(model, 2);
  for (Index j = 0; j < 6; ++j) {
    const std::vector<Index> one{j};
    EXPECT_EQ(kr_rows(model, 2, one), full.row(static_cast<Eigen::Index>(j)));
  }
  const std::vector<Index> bad{12};
  EXPECT_THROW(kr_rows(model, 1, bad), Error);
}

TEST(Mttkrp, MatchesDenseOracle) {
  std::mt19937_64 gen(21);
  const Dims dims{3, 4, 5};
  const auto t = oracle::random_tensor(gen, dims);
  const auto f = oracle::random_factors(gen, dims, 2);
  const KruskalModel model(f);
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix expect = oracle::unfold(t, i).transpose() * oracle::kr_chain(f, i);
    EXPECT_LT(oracle::rel_err(mttkrp(t, model, i), expect), 1e-12);
  }
}

TEST(Mttkrp, ZeroTensorAndShapeErrors) {
  std::mt19937_64 gen(2);
  const KruskalModel model(oracle::random_factors(gen, {3, 4, 5}, 2));
  EXPECT_TRUE(mttkrp(DenseTensor(Dims{3, 4, 5}), model, 1).isZero(0.0));
  EXPECT_THROW(mttkrp(DenseTensor(Dims{3, 4, 6}), model, 1), Error);
}

TEST(PartialMttkrp, MatchesDenseSliceOracle) {
  std::mt19937_64 gen(4);
  const Dims dims{4, 3, 2};
  const auto t = oracle::random_tensor(gen, dims);
  const auto f = oracle::random_factors(gen, dims, 2);
  const KruskalModel model(f);
  const std::vector<Index> rows{1, 5};
  const Matrix expect = oracle::select_rows(oracle::unfold(t, 0), rows).transpose() *
                        oracle::select_rows(oracle::kr_chain(f, 0), rows);
  EXPECT_LT(oracle::rel_err(partial_mttkrp(t, model, 0, rows), expect), 1e-12);
  EXPECT_TRUE(partial_mttkrp(t, model, 0, {}).isZero(0.0));
  const std::vector<Index> bad{6};
  EXPECT_THROW(partial_mttkrp(t, model, 0, bad), Error);
}

TEST(PartialMttkrp, PartitionSumsToFull) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims dims = random_dims(gen, 4, 5);
    const auto t = oracle::random_tensor(gen, dims);
    const KruskalModel model(oracle::random_factors(gen, dims, 1 + trial % 4));
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const Index rows = UnfoldingIndexMap(dims, i).rows();
      std::vector<Index> perm(rows);
      std::iota(perm.begin(), perm.end(), Index{0});
      std::shuffle(perm.begin(), perm.end(), gen);
      const auto cut = perm.begin() + static_cast<std::ptrdiff_t>(rows / 3);
      const std::vector<Index> a(perm.begin(), cut), b(cut, perm.end());
      const Matrix sum = partial_mttkrp(t, model, i, a) + partial_mttkrp(t, model, i, b);
      const Matrix full = mttkrp(t, model, i);
      EXPECT_LT(oracle::rel_err(sum, full), 1e-12);
      EXPECT_LT(oracle::rel_err(partial_mttkrp(t, model, i, perm), full), 1e-12);
    }
  }
}

TEST(Reconstruct, RankOneOuterProduct) {
  const KruskalModel model({rows_of({{1}, {2}}), Matrix::Ones(2, 1), Matrix::Ones(2, 1)});
  const auto t = reconstruct(model);
  for (Index lin = 0; lin < 8; ++lin) EXPECT_EQ(t.values()[lin], lin % 2 == 0 ? 1.0 : 2.0);
}

TEST(Reconstruct, UnfoldingIdentityAndZeroFactor) {
  std::mt19937_64 gen(6);
  const Dims dims{3, 2, 4, 2};
  auto f = oracle::random_factors(gen, dims, 3);
  const KruskalModel model(f);
  const auto t = reconstruct(model);
  EXPECT_LT(oracle::rel_err(Eigen::Map<const Matrix>(t.data(), 48, 1), Eigen::Map<const Matrix>(oracle::reconstruct(f).data(), 48, 1)),
            1e-14);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    EXPECT_LT(oracle::rel_err(unfold(t, i), kr_full(model, i) * f[i].transpose()), 1e-14);
  }
  f[2].setZero();
  const auto z = reconstruct(KruskalModel(f));
  EXPECT_EQ(frob_norm(z), 0.0);
}

TEST(Norms, FrobeniusAndObjective) {
  EXPECT_DOUBLE_EQ(frob_norm(DenseTensor({2, 2, 2}, std::vector<double>(8, 1.0))), std::sqrt(8.0));

  std::mt19937_64 gen(13);
  const Dims dims{4, 5, 6};
  const KruskalModel exact(oracle::random_factors(gen, dims, 3));
  EXPECT_LT(objective(reconstruct(exact), exact), 1e-24);

  const auto t = oracle::random_tensor(gen, dims);
  const double f = objective(t, exact);
  for (std::size_t i = 0; i < 3; ++i) {
    const double via_unfold = (oracle::unfold(t, i) - kr_full(exact, i) * exact.factor(i).transpose()).squaredNorm();
    EXPECT_NEAR(f, via_unfold, 1e-10 * f);
  }
  EXPECT_THROW(objective(DenseTensor(Dims{4, 5, 7}), exact), Error);
}
