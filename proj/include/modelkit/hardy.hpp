#pragma once

#include <vector>

#include "modelkit/linalg.hpp"

namespace modelkit {

struct CauchyTerm {
  cplx pole;
  Vector residue;
};

// sum_j c_j / (k - p_j) + const
class StructuredHardyFunction {
 public:
  StructuredHardyFunction() = default;
  explicit StructuredHardyFunction(int dim_e);

  int dim_e() const { return dim_e_; }
  const std::vector<CauchyTerm>& terms() const { return terms_; }
  const Vector& constant() const { return constant_; }
  bool has_constant() const;

  void add_term(cplx pole, const Vector& residue);
  void set_constant(const Vector& c);

  Vector operator()(cplx k) const;

  StructuredHardyFunction operator+(const StructuredHardyFunction& o) const;
  StructuredHardyFunction operator-(const StructuredHardyFunction& o) const;
  StructuredHardyFunction operator*(cplx s) const;
  // Left multiplication by a constant matrix.
  StructuredHardyFunction left_multiply(const Matrix& a) const;

  // Merge terms with identical poles and drop zero residues.
  StructuredHardyFunction simplified() const;

 private:
  int dim_e_ = 0;
  std::vector<CauchyTerm> terms_;
  Vector constant_;
};

// Plus keeps poles in the lower half-plane (boundary values of H2+),
// Minus keeps poles in the upper half-plane.
enum class HardyHalf { Plus, Minus };

// A constant term is rejected unless allow_constant is set, in which case the
// caller asserts it cancels in the difference being projected and it is dropped.
StructuredHardyFunction riesz_project(const StructuredHardyFunction& f, HardyHalf half,
                                      bool allow_constant = false);

}  // namespace modelkit
