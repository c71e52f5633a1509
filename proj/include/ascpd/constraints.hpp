#pragma once

#include <string>
#include <string_view>

#include "ascpd/tensor.hpp"

namespace ascpd {

/// Constraint set of one factor, enforced through the prox of its indicator.
struct Constraint {
  enum class Kind { Unconstrained, Nonnegative };

  Kind kind = Kind::Unconstrained;

  static Constraint parse(std::string_view name);  // "none" | "nonneg"
  std::string name() const;

  /// Euclidean projection onto the set.
  Matrix prox(Matrix m) const;
  void apply(Matrix& m) const;
  bool contains(const Matrix& m) const;
};

}  // namespace ascpd
