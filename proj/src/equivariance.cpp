// SPDX-License-Identifier: Apache-2.0
#include "denslift/equivariance.hpp"

#include <algorithm>

#include "denslift/errors.hpp"
#include "denslift/proj_quant.hpp"

namespace denslift {

namespace {

DensityOperator fn(int dim, const DiffPolynomial& f) { return DensityOperator::multiplication(dim, f); }

DensityOperator commutator(const DensityOperator& a, const DensityOperator& b) {
  return compose(a, b) - compose(b, a);
}

void reject_half(const Scalar& lambda0) {
  if (lambda0 == Scalar::rational(1, 2)) throw ExceptionalWeight("exceptional weight 1/2");
}

int order_of(const LiftingHandle& lift, const DensityOperator& delta) {
  return lift.order.value_or(delta.total_order());
}

MultiIndex pair_index(int i, int j) {
  MultiIndex a = unit_index(i);
  ++a[static_cast<std::size_t>(j - 1)];
  return a;
}

}  // namespace

LiftingHandle LiftingHandle::canonical(const Scalar& lambda0, const VolumeForm& rho) {
  LiftingHandle h;
  h.lambda0 = lambda0;
  h.rho = rho;
  return h;
}

LiftingHandle LiftingHandle::vol(const Scalar& lambda0, const VolumeForm& rho, const VolLiftParams& params,
                                 std::optional<int> order) {
  LiftingHandle h = canonical(lambda0, rho);
  h.kind = LiftKind::Vol;
  h.params = params;
  h.order = order;
  return h;
}

LiftingHandle LiftingHandle::distinguished(const Scalar& lambda0, const VolumeForm& rho, std::optional<int> order) {
  LiftingHandle h = canonical(lambda0, rho);
  h.kind = LiftKind::Distinguished;
  h.order = order;
  return h;
}

LiftingHandle LiftingHandle::first_order(const Scalar& lambda0, const Scalar& c) {
  LiftingHandle h;
  h.kind = LiftKind::FirstOrder;
  h.lambda0 = lambda0;
  h.c = c;
  return h;
}

LiftingHandle LiftingHandle::second_order_canonical(const Scalar& lambda0) {
  LiftingHandle h;
  h.kind = LiftKind::SecondOrderCanonical;
  h.lambda0 = lambda0;
  return h;
}

LiftingHandle LiftingHandle::proj(const Scalar& lambda0) {
  LiftingHandle h;
  h.kind = LiftKind::ProjLift;
  h.lambda0 = lambda0;
  return h;
}

LiftingHandle LiftingHandle::proj_regular(const Scalar& lambda0, std::vector<WeightPoly> polys) {
  LiftingHandle h;
  h.kind = LiftKind::ProjRegular;
  h.lambda0 = lambda0;
  h.polys = std::move(polys);
  return h;
}

DensityOperator LiftingHandle::operator()(const DensityOperator& delta) const {
  switch (kind) {
    case LiftKind::Canonical: return canonical_lift(delta, lambda0, rho);
    case LiftKind::Vol: return vol_lift(delta, lambda0, rho, params, order);
    case LiftKind::Distinguished: return distinguished_lift(delta, lambda0, rho, order);
    case LiftKind::FirstOrder: return first_order_lift(delta, lambda0, c);
    case LiftKind::SecondOrderCanonical: return second_order_canonical_lift(delta, lambda0);
    case LiftKind::ProjLift: return proj_lift(delta, lambda0);
    case LiftKind::ProjRegular: return proj_regular_lift(delta, lambda0, polys);
  }
  return delta;
}

DiffPolynomial divergence(const VectorField& x, const VolumeForm& rho) {
  DiffPolynomial out = divergence_flat(x);
  for (std::size_t i = 0; i < x.size(); ++i) out += x[i] * derive(rho.log_density(), static_cast<int>(i) + 1);
  return out;
}

DensityOperator ad_on_lifting(const LiftingHandle& h, const DensityOperator& delta, const VectorField& x) {
  return ad_vf(x, h(delta)) - h(restrict(ad_vf(x, delta), h.lambda0));
}

DensityOperator volume_variation(const LiftingHandle& lift, const DensityOperator& delta, const DiffPolynomial& h) {
  const int dim = delta.dim();
  const Scalar& l0 = lift.lambda0;
  if (lift.kind == LiftKind::Distinguished) reject_half(l0);
  if (lift.kind != LiftKind::Canonical && lift.kind != LiftKind::Vol && lift.kind != LiftKind::Distinguished)
    throw Error("volume variation: lifting does not depend on a volume form");
  if (delta.is_zero()) return delta;

  const DensityOperator p = canonical_lift(delta, l0, lift.rho);
  const DensityOperator hp = commutator(fn(dim, h), p);
  const WeightPoly t = weight_shift(l0);
  switch (lift.kind) {
    case LiftKind::Canonical: return t * hp;
    case LiftKind::Distinguished: {
      const int n = order_of(lift, delta);
      const Scalar inv = (Scalar(2) * l0 - Scalar(1)).inverse();
      const WeightPoly factor = t * WeightPoly({(l0 - Scalar(1)) * inv, inv});
      const DensityOperator hps = commutator(fn(dim, h), adjoint(p));
      return factor * (n % 2 ? hp + hps : hp - hps);
    }
    default: break;
  }
  const int n = order_of(lift, delta);
  const DensityOperator dp = t * hp;
  const DensityOperator dps = adjoint(dp);
  return vol_weight_A(l0, lift.params) * dp + vol_weight_B(l0, lift.params, n) * dps +
         vol_weight_C(l0, lift.params) * fn(dim, value_on_one(dp)) +
         vol_weight_D(l0, lift.params) * fn(dim, value_on_one(dps));
}

bool check_adX_variation_identity(const LiftingHandle& lift, const DensityOperator& delta, const VectorField& x) {
  return ad_on_lifting(lift, delta, x) == volume_variation(lift, delta, divergence(x, lift.rho));
}

bool check_adX_variation_identity(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                                  const VectorField& x) {
  return check_adX_variation_identity(LiftingHandle::canonical(lambda0, rho), delta, x);
}

// ---------------------------------------------------------------------------
// Divergence-free tensors
// ---------------------------------------------------------------------------

DivFreeTensor::DivFreeTensor(int dim, int rank, std::string name) : dim_(dim), rank_(rank), name_(std::move(name)) {
  if (dim < 1 || dim > kMaxDim) throw IndexOutOfRange("dimension out of range");
  if (rank < 0) throw OrderViolation("negative tensor rank");
}

DiffPolynomial DivFreeTensor::component(std::vector<int> upper) const {
  if (static_cast<int>(upper.size()) != rank_) throw IndexOutOfRange("wrong number of tensor indices");
  for (int i : upper)
    if (i < 1 || i > dim_) throw IndexOutOfRange("tensor index out of range");
  std::sort(upper.begin(), upper.end());
  return jet(name_, upper);
}

VectorField DivFreeTensor::field() const {
  if (rank_ != 1) throw OrderViolation("not a vector field");
  VectorField out;
  for (int i = 1; i <= dim_; ++i) out.push_back(component({i}));
  return out;
}

DensityOperator DivFreeTensor::as_operator() const {
  DensityOperator out(dim_);
  std::vector<int> upper(static_cast<std::size_t>(rank_), 1);
  for (;;) {
    MultiIndex alpha{};
    for (int i : upper) ++alpha[static_cast<std::size_t>(i - 1)];
    out.add_term(0, alpha, component(upper));
    int pos = rank_ - 1;
    while (pos >= 0 && upper[static_cast<std::size_t>(pos)] == dim_) upper[static_cast<std::size_t>(pos--)] = 1;
    if (pos < 0) return out;
    ++upper[static_cast<std::size_t>(pos)];
  }
}

std::optional<DiffPolynomial> DivFreeTensor::eliminate(const JetSymbol& s) const {
  const std::size_t last = static_cast<std::size_t>(dim_ - 1);
  if (rank_ == 0 || s.name() != name_ || s.deriv[last] == 0) return std::nullopt;
  auto it = std::find(s.upper.begin(), s.upper.end(), static_cast<std::uint8_t>(dim_));
  if (it == s.upper.end()) return std::nullopt;
  std::vector<int> rest;
  bool dropped = false;
  for (auto u : s.upper) {
    if (!dropped && u == dim_) {
      dropped = true;
      continue;
    }
    rest.push_back(u);
  }
  DiffPolynomial out;
  for (int j = 1; j < dim_; ++j) {
    std::vector<int> upper = rest;
    upper.push_back(j);
    MultiIndex beta = s.deriv;
    --beta[last];
    ++beta[static_cast<std::size_t>(j - 1)];
    out -= derive(component(upper), beta);
  }
  return reduce(out);
}

DiffPolynomial DivFreeTensor::reduce(const DiffPolynomial& p) const {
  return substitute(p, [this](const JetSymbol& s) { return eliminate(s); });
}

DensityOperator DivFreeTensor::reduce(const DensityOperator& op) const {
  return op.map_coefficients([this](const DiffPolynomial& p) { return reduce(p); });
}

DivFreeTensor generic_divfree_field(int dim, const std::string& name) {
  if (dim < 2) throw DimensionTooSmall("divergence-free fields need dimension >= 2");
  return DivFreeTensor(dim, 1, name);
}

DivFreeTensor generic_divfree_tensor(int dim, int rank, const std::string& name) {
  return DivFreeTensor(dim, rank, name);
}

// ---------------------------------------------------------------------------
// SDiff classification
// ---------------------------------------------------------------------------

DensityOperator apply_sdiff_map(const SdiffMapCoeffs& f, const DensityOperator& delta) {
  require_weight_free(delta, "sdiff map");
  if (!delta.is_zero() && delta.x_order() > 2) throw OrderTooHigh("operator of order > 2");
  const int dim = delta.dim();
  DensityOperator s_dd(dim), divs_d(dim), t_d(dim);
  DiffPolynomial dds, dt;
  for (int i = 1; i <= dim; ++i) {
    DiffPolynomial div_row;
    for (int j = 1; j <= dim; ++j) {
      const DiffPolynomial c = delta.coefficient(0, pair_index(i, j));
      const DiffPolynomial sij = i == j ? c : c.scaled(Scalar::rational(1, 2));
      div_row += derive(sij, j);
      dds += derive(derive(sij, i), j);
    }
    divs_d.add_term(0, unit_index(i), div_row);
    const DiffPolynomial ti = delta.coefficient(0, unit_index(i));
    t_d.add_term(0, unit_index(i), ti);
    dt += derive(ti, i);
  }
  for (const auto& [key, c] : delta.terms())
    if (degree(key.alpha) == 2) s_dd.add_term(0, key.alpha, c);
  const DiffPolynomial r = delta.coefficient(0, MultiIndex{});
  return s_dd.scaled(f.a1) + divs_d.scaled(f.a2) + fn(dim, dds).scaled(f.a3) + t_d.scaled(f.b1) +
         fn(dim, dt).scaled(f.b2) + fn(dim, r).scaled(f.c);
}

DensityOperator classify_sdiff_map(const SdiffMapCoeffs& f, int dim) {
  if (dim < 3) throw DimensionTooSmall("classification needs dimension >= 3");
  const DivFreeTensor x = generic_divfree_field(dim);
  DensityOperator delta(dim);
  for (int i = 1; i <= dim; ++i) {
    for (int j = i; j <= dim; ++j) {
      const DiffPolynomial s = jet("S", {i, j});
      delta.add_term(0, pair_index(i, j), i == j ? s : s.scaled(Scalar(2)));
    }
    delta.add_term(0, unit_index(i), jet("T", {i}));
  }
  delta.add_term(0, MultiIndex{}, jet("R"));
  const DensityOperator moved = x.reduce(ad_vf(x.field(), delta));
  return x.reduce(ad_vf(x.field(), apply_sdiff_map(f, delta)) - apply_sdiff_map(f, moved));
}

std::vector<std::vector<Scalar>> sdiff_kernel(int dim) {
  const std::vector<std::string> names = {"a1", "a2", "a3", "b1", "b2", "c"};
  const SdiffMapCoeffs f{Scalar::param("a1"), Scalar::param("a2"), Scalar::param("a3"),
                         Scalar::param("b1"), Scalar::param("b2"), Scalar::param("c")};
  Matrix eqs = linear_equations(classify_sdiff_map(f, dim), names);
  // the residual is homogeneous: drop the constant column
  for (auto& row : eqs) row.pop_back();
  return nullspace(eqs, names.size());
}

bool divfree_tensor_lift_check(int dim, int rank, const Scalar& lambda0, bool impose_constraint) {
  reject_half(lambda0);
  const DivFreeTensor s = generic_divfree_tensor(dim, rank);
  const DensityOperator delta = s.as_operator();
  const LiftingHandle pi = LiftingHandle::distinguished(lambda0, VolumeForm::coordinate(), rank);
  VectorField x;
  for (int i = 1; i <= dim; ++i) x.push_back(jet("X", {i}));
  const DensityOperator defect = ad_on_lifting(pi, delta, x);
  return (impose_constraint ? s.reduce(defect) : defect).is_zero();
}

}  // namespace denslift
