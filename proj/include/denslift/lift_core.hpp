// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "denslift/density_ops.hpp"

namespace denslift {

/// Volume form rho, stored through the jet of log(rho). The flat
/// connection is Gamma_i = -d_i log(rho).
class VolumeForm {
 public:
  static VolumeForm coordinate() { return VolumeForm(DiffPolynomial()); }
  static VolumeForm generic(std::string_view name = "ell") { return VolumeForm(jet(name)); }
  static VolumeForm from_log(DiffPolynomial log_rho) { return VolumeForm(std::move(log_rho)); }

  bool is_coordinate() const { return log_.is_zero(); }
  const DiffPolynomial& log_density() const { return log_; }
  DiffPolynomial gamma(int axis) const { return -derive(log_, axis); }

 private:
  explicit VolumeForm(DiffPolynomial log_rho) : log_(std::move(log_rho)) {}
  DiffPolynomial log_;
};

/// Parameters (b, c_1..c_n, d_1..d_n) of the affine family of regular
/// liftings built from a volume form.
struct VolLiftParams {
  Scalar b;
  std::vector<Scalar> c;
  std::vector<Scalar> d;

  /// Formal parameters named b, c1..cn, d1..dn.
  static VolLiftParams symbolic(int n);
  static VolLiftParams canonical() { return {}; }
};

/// Data of a second-order self-adjoint pencil:
/// S d d + dS d + (2L-1) gamma d + L d(gamma) + L(L-1) theta + F.
struct GeometricData {
  int dim = 1;
  std::vector<std::vector<DiffPolynomial>> S;  // symmetric, dim x dim
  VectorField gamma;
  DiffPolynomial theta;
  DiffPolynomial F;
};

/// Weight polynomial L - lambda0.
inline WeightPoly weight_shift(const Scalar& lambda0) { return WeightPoly::shifted(lambda0); }

DensityOperator canonical_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho);

/// A P + B P* + C P(1) + D P*(1) with P the canonical lift. `order`
/// overrides the order n used for the sign of B.
DensityOperator vol_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                         const VolLiftParams& params, std::optional<int> order = {});
WeightPoly vol_weight_A(const Scalar& lambda0, const VolLiftParams& p);
WeightPoly vol_weight_B(const Scalar& lambda0, const VolLiftParams& p, int n);
WeightPoly vol_weight_C(const Scalar& lambda0, const VolLiftParams& p);
WeightPoly vol_weight_D(const Scalar& lambda0, const VolLiftParams& p);

/// Throws ExceptionalWeight when lambda0 = 1/2. `order` fixes the parity
/// (defaults to the order of delta).
DensityOperator distinguished_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                                   std::optional<int> order = {});

/// Vertical polynomials (C, D) built from t = L - 1/2 with C* = (-1)^n C.
std::pair<WeightPoly, WeightPoly> sa_vertical_polynomials(int n, const Scalar& lambda0, const std::vector<Scalar>& c,
                                                          const std::vector<Scalar>& d);

struct FirstOrderParts {
  VectorField a;
  DiffPolynomial s;
};

FirstOrderParts decompose_first_order(const DensityOperator& delta, const Scalar& lambda0);
/// L_A + (1 + c (L - lambda0)) (B - lambda0 div A).
DensityOperator first_order_lift(const DensityOperator& delta, const Scalar& lambda0, const Scalar& c);
/// Lie derivative on densities of a fixed weight: X^i d_i + lambda div X.
DensityOperator lie_at_weight(const VectorField& x, const Scalar& lambda);

GeometricData extract_geometric_data(const DensityOperator& delta, const Scalar& lambda0);
DensityOperator assemble_second_order(const GeometricData& g);
DensityOperator second_order_canonical_lift(const DensityOperator& delta, const Scalar& lambda0);
DiffPolynomial cocycle_rho(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho);
/// Lifting of a normalized (R = 0) second-order operator at weight 0.
DensityOperator limit_lift(const DensityOperator& delta, const VolumeForm& rho);

std::vector<DensityOperator> taylor_expand(const DensityOperator& op, const Scalar& lambda0, const VolumeForm& rho);
DensityOperator taylor_assemble(const std::vector<DensityOperator>& coeffs, const Scalar& lambda0,
                                const VolumeForm& rho);

/// (Anti-)self-adjoint pencil through delta0 parametrized by the even
/// Taylor coefficients (half-density operators) around weight 1/2.
DensityOperator selfadjoint_family(const DensityOperator& delta0, const Scalar& lambda0, const VolumeForm& rho,
                                   const std::vector<DensityOperator>& evens);

bool is_regular_pair(const DensityOperator& delta, const DensityOperator& lift, int n);
bool is_strict_pair(const DensityOperator& delta, const DensityOperator& lift);

/// Throws HasWeightOperator if `op` contains the weight operator.
void require_weight_free(const DensityOperator& op, const char* what);

}  // namespace denslift
