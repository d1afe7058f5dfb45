#include "modelkit/hardy.hpp"

#include <map>

namespace modelkit {

StructuredHardyFunction::StructuredHardyFunction(int dim_e)
    : dim_e_(dim_e), constant_(Vector::Zero(dim_e)) {}

bool StructuredHardyFunction::has_constant() const {
  return constant_.size() > 0 && constant_.cwiseAbs().maxCoeff() > 0.0;
}

void StructuredHardyFunction::add_term(cplx pole, const Vector& residue) {
  if (residue.size() != dim_e_) throw DimensionError("add_term: residue has wrong length");
  if (pole.imag() == 0.0) throw DomainError("add_term: pole on the real axis");
  terms_.push_back({pole, residue});
}

void StructuredHardyFunction::set_constant(const Vector& c) {
  if (c.size() != dim_e_) throw DimensionError("set_constant: wrong length");
  constant_ = c;
}

Vector StructuredHardyFunction::operator()(cplx k) const {
  Vector out = constant_;
  for (const auto& t : terms_) out += t.residue / (k - t.pole);
  return out;
}

StructuredHardyFunction StructuredHardyFunction::operator+(
    const StructuredHardyFunction& o) const {
  if (o.dim_e_ != dim_e_) throw DimensionError("StructuredHardyFunction: dimE mismatch");
  StructuredHardyFunction r = *this;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.constant_ += o.constant_;
  return r;
}

StructuredHardyFunction StructuredHardyFunction::operator*(cplx s) const {
  StructuredHardyFunction r = *this;
  for (auto& t : r.terms_) t.residue *= s;
  r.constant_ *= s;
  return r;
}

StructuredHardyFunction StructuredHardyFunction::operator-(
    const StructuredHardyFunction& o) const {
  return *this + o * cplx(-1.0);
}

StructuredHardyFunction StructuredHardyFunction::left_multiply(const Matrix& a) const {
  if (a.cols() != dim_e_) throw DimensionError("left_multiply: wrong shape");
  StructuredHardyFunction r(static_cast<int>(a.rows()));
  for (const auto& t : terms_) r.terms_.push_back({t.pole, a * t.residue});
  r.constant_ = a * constant_;
  return r;
}

StructuredHardyFunction StructuredHardyFunction::simplified() const {
  std::vector<CauchyTerm> merged;
  for (const auto& t : terms_) {
    bool found = false;
    for (auto& m : merged) {
      if (m.pole == t.pole) {
        m.residue += t.residue;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(t);
  }
  StructuredHardyFunction r(dim_e_);
  r.constant_ = constant_;
  for (auto& m : merged)
    if (m.residue.cwiseAbs().maxCoeff() > 0.0) r.terms_.push_back(m);
  return r;
}

StructuredHardyFunction riesz_project(const StructuredHardyFunction& f, HardyHalf half,
                                      bool allow_constant) {
  if (f.has_constant() && !allow_constant)
    throw DomainError("riesz_project: constant term outside H2");
  StructuredHardyFunction r(f.dim_e());
  for (const auto& t : f.terms()) {
    if (t.pole.imag() == 0.0) throw DomainError("riesz_project: pole on the real axis");
    bool lower = t.pole.imag() < 0.0;
    if ((half == HardyHalf::Plus) == lower) r.add_term(t.pole, t.residue);
  }
  return r;
}

}  // namespace modelkit
