// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "denslift/density_ops.hpp"

namespace denslift {

/// Polynomial in the cotangent fiber variables xi_1..xi_d with jet
/// coefficients. The key is the exponent multi-index of xi.
class SymbolPoly {
 public:
  using TermMap = std::map<MultiIndex, DiffPolynomial>;

  explicit SymbolPoly(int dim = 1);

  int dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Max |I| over stored terms; throws ZeroOperator on the zero symbol.
  int degree() const;
  DiffPolynomial coefficient(const MultiIndex& xi) const;
  void add_term(const MultiIndex& xi, const DiffPolynomial& c);
  /// Homogeneous part of degree k.
  SymbolPoly part(int k) const;

  SymbolPoly& operator+=(const SymbolPoly& o);
  SymbolPoly& operator-=(const SymbolPoly& o);
  friend SymbolPoly operator+(SymbolPoly a, const SymbolPoly& b) { return a += b; }
  friend SymbolPoly operator-(SymbolPoly a, const SymbolPoly& b) { return a -= b; }
  SymbolPoly scaled(const Scalar& c) const;
  friend bool operator==(const SymbolPoly& a, const SymbolPoly& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  int dim_;
  TermMap terms_;
};

/// Rendering such as "a*xi^2 - (2*l+1)/2*a_,1*xi + ...".
std::string to_string(const SymbolPoly& p);

/// Principal symbol of the x-order-k part of `op` (which must be free of L).
SymbolPoly principal_symbol(const DensityOperator& op, int k);

/// Translations, linear fields x^i d_k and the special fields x^i x^k d_k.
std::vector<VectorField> proj_generators(int dim);

/// c_k^(n)(lambda) for dimension d.
Scalar symbol_coeff(int n, int k, const Scalar& lambda, int dim);

SymbolPoly full_symbol(const DensityOperator& op, const Scalar& lambda);
DensityOperator quantize(const SymbolPoly& p, const Scalar& lambda);

/// Natural action of X on a symbol: X^i d_i P - (d_i X^j) xi_j dP/dxi_i.
SymbolPoly symbol_lie(const VectorField& x, const SymbolPoly& p);
/// symbol_lie(X, sigma(op)) - sigma(ad_X op), both at weight lambda.
SymbolPoly proj_equivariance_defect(const DensityOperator& op, const Scalar& lambda, const VectorField& x);

/// Q_L(sigma_l0(op)), computed by interpolation in the weight.
DensityOperator proj_lift(const DensityOperator& op, const Scalar& lambda0);
/// Replaces the polynomial dependence of every coefficient on the formal
/// parameter `name` by powers of the weight operator.
DensityOperator weight_from_param(const DensityOperator& op, std::string_view name);

std::vector<DensityOperator> proj_decompose(const DensityOperator& op, const Scalar& lambda0);
/// sum_k P_k(L) proj_lift(Delta_k); missing P_k default to 1.
DensityOperator proj_regular_lift(const DensityOperator& op, const Scalar& lambda0,
                                  const std::vector<WeightPoly>& polys);

/// [P_0..P_n] of the (anti-)self-adjoint projective liftings. c[k-1] holds
/// the k coefficients of P_{2k}, d[k-1] those of P_{2k+1}.
std::vector<WeightPoly> proj_sa_polynomials(int n, const Scalar& lambda0,
                                            const std::vector<std::vector<Scalar>>& c,
                                            const std::vector<std::vector<Scalar>>& d);
/// Same with formal parameters k<m>_<r> for P_m.
std::vector<WeightPoly> proj_sa_polynomials(int n, const Scalar& lambda0);
int proj_sa_parameter_count(int n);

/// theta - 2 gamma_x + (2/3) a_xx of a one-dimensional second-order
/// operator. `d` overrides the total derivative (used in other charts).
DiffPolynomial schwarzian_data(const DensityOperator& op, const Scalar& lambda0, const Derivation& d = {});

/// One-dimensional diffeomorphism y = y(x) given by the jets of y and the
/// reciprocal w = 1/y_x, optionally specialized by `values` at the end.
struct DiffeoJet1D {
  std::optional<JetRule> values;

  static DiffeoJet1D generic() { return {}; }
  static DiffeoJet1D identity();
  /// y = k x.
  static DiffeoJet1D scaling(const Scalar& k);
  /// y = x/(1-x) with jets evaluated at the formal point x0.
  static DiffeoJet1D moebius();

  /// Derivation d/dy = w d/dx.
  Derivation dy() const;
  /// Applies the w*y_x = 1 reduction and the specialization.
  DiffPolynomial finish(const DiffPolynomial& p) const;
  DensityOperator finish(const DensityOperator& op) const;
  DiffPolynomial y_jet(int k) const;
  DiffPolynomial w_jet() const;
  /// y_xxx w - (3/2) y_xx^2 w^2.
  DiffPolynomial schwarzian() const;
};

/// Expresses `op` in the y chart. Coefficients stay x-jets and the
/// derivative generator is d/dy.
DensityOperator coordinate_change_1d(const DensityOperator& op, const DiffeoJet1D& phi);

/// Schwarzian data of `op` computed in the y chart, as x-jets.
DiffPolynomial schwarzian_transform(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi);

/// Transforms Delta to the y chart and compares its Schwarzian data, as a
/// weight-2 density, with S - (y_xxx/y_x - (3/2)(y_xx/y_x)^2) a.
bool schwarzian_cocycle_check(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi);
/// The law actually satisfied: the transformed data, as a function, equals
/// S - (2/3)(y_xxx/y_x - (3/2)(y_xx/y_x)^2) a.
bool schwarzian_function_law_check(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi);

/// Cocycle law of the Schwarzian under composition, through third jets.
bool schwarzian_composition_check();

}  // namespace denslift
