#include <gtest/gtest.h>

#include <random>

#include "ascpd/constraints.hpp"
#include "ascpd/error.hpp"
#include "oracles.hpp"

using namespace ascpd;

TEST(Constraint, Parse) {
  EXPECT_EQ(Constraint::parse("none").kind, Constraint::Kind::Unconstrained);
  EXPECT_EQ(Constraint::parse("nonneg").kind, Constraint::Kind::Nonnegative);
  EXPECT_EQ(Constraint::parse("nonneg").name(), "nonneg");
  EXPECT_THROW(Constraint::parse("box"), Error);
}

TEST(Constraint, NonnegativeExample) {
  Matrix m(2, 2);
  m << -1, 2, 0, -3.5;
  Matrix expect(2, 2);
  expect << 0, 2, 0, 0;
  const auto c = Constraint::parse("nonneg");
  EXPECT_EQ(c.prox(m), expect);
  EXPECT_FALSE(c.contains(m));
  EXPECT_TRUE(c.contains(expect));
}

TEST(Constraint, UnconstrainedIsIdentity) {
  std::mt19937_64 gen(1);
  const Matrix m = oracle::random_matrix(gen, 4, 3);
  EXPECT_EQ(Constraint{}.prox(m), m);
  EXPECT_TRUE(Constraint{}.contains(m));
}

TEST(Constraint, ProjectionProperties) {
  std::mt19937_64 gen(2);
  const auto c = Constraint::parse("nonneg");
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 5, 3);
    const Matrix y = oracle::random_matrix(gen, 5, 3);
    const Matrix px = c.prox(x);
    EXPECT_EQ(c.prox(px), px);
    EXPECT_TRUE(c.contains(px));
    EXPECT_LE((px - c.prox(y)).norm(), (x - y).norm() + 1e-15);
    // Variational inequality of a projection onto a convex set.
    const Matrix z = c.prox(oracle::random_matrix(gen, 5, 3));
    EXPECT_LE(((x - px).array() * (z - px).array()).sum(), 1e-15);
  }
}
