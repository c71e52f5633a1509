#include "ascpd/constraints.hpp"

#include "ascpd/error.hpp"

namespace ascpd {

Constraint Constraint::parse(std::string_view name) {
  if (name == "none") return {Kind::Unconstrained};
  if (name == "nonneg") return {Kind::Nonnegative};
  fail(Errc::InvalidArgument, "unknown constraint '" + std::string(name) + "' (expected none or nonneg)");
}

std::string Constraint::name() const { return kind == Kind::Nonnegative ? "nonneg" : "none"; }

void Constraint::apply(Matrix& m) const {
  if (kind == Kind::Nonnegative) m = m.cwiseMax(0.0);
}

Matrix Constraint::prox(Matrix m) const {
  apply(m);
  return m;
}

bool Constraint::contains(const Matrix& m) const {
  return kind == Kind::Unconstrained || (m.array() >= 0.0).all();
}

}  // namespace ascpd
