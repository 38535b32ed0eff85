// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "denslift/jet.hpp"

namespace denslift {

/// Index of a normal-ordered term: L^r D^alpha.
struct OpKey {
  unsigned r = 0;
  MultiIndex alpha{};
  friend auto operator<=>(const OpKey&, const OpKey&) = default;
};

/// A density s(x)|Dx|^weight.
struct Density {
  DiffPolynomial coeff;
  Scalar weight;
};

using VectorField = std::vector<DiffPolynomial>;

/// Derivation used to commute D_i past coefficients; defaults to `derive`.
using Derivation = std::function<DiffPolynomial(const DiffPolynomial&, int axis)>;

/// Weight-0 operator on the algebra of densities, stored in normal order
/// as sum of c_{r,alpha}(x) L^r D^alpha where L is the weight operator.
class DensityOperator {
 public:
  using TermMap = std::map<OpKey, DiffPolynomial>;

  explicit DensityOperator(int dim = 1);

  static DensityOperator identity(int dim) { return multiplication(dim, DiffPolynomial(1)); }
  static DensityOperator weight(int dim, unsigned power = 1);
  static DensityOperator partial(int dim, int axis);
  static DensityOperator multiplication(int dim, const DiffPolynomial& f);
  static DensityOperator term(int dim, unsigned r, const MultiIndex& alpha, const DiffPolynomial& c);

  int dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  DiffPolynomial coefficient(unsigned r, const MultiIndex& alpha) const;
  void add_term(unsigned r, const MultiIndex& alpha, const DiffPolynomial& c);

  /// max(r + |alpha|); throws ZeroOperator on the zero operator.
  int total_order() const;
  /// max |alpha|; throws ZeroOperator on the zero operator.
  int x_order() const;
  bool is_vertical() const;
  bool has_weight() const;
  unsigned weight_degree() const;

  DensityOperator operator-() const;
  DensityOperator& operator+=(const DensityOperator& o);
  DensityOperator& operator-=(const DensityOperator& o);
  friend DensityOperator operator+(DensityOperator a, const DensityOperator& b) { return a += b; }
  friend DensityOperator operator-(DensityOperator a, const DensityOperator& b) { return a -= b; }
  DensityOperator scaled(const Scalar& c) const;
  /// f * A (left multiplication by a function; no reordering needed).
  DensityOperator times(const DiffPolynomial& f) const;
  /// L^k * A.
  DensityOperator weight_shifted(unsigned k) const;

  friend bool operator==(const DensityOperator& a, const DensityOperator& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const DensityOperator& a, const DensityOperator& b) { return !(a == b); }

  DensityOperator map_coefficients(const std::function<DiffPolynomial(const DiffPolynomial&)>& f) const;

 private:
  int dim_;
  TermMap terms_;
};

void check_same_dim(const DensityOperator& a, const DensityOperator& b);

DensityOperator compose(const DensityOperator& a, const DensityOperator& b, const Derivation& d = {});
DensityOperator adjoint(const DensityOperator& a);
/// Replaces the weight operator by the scalar `lambda`.
DensityOperator restrict(const DensityOperator& a, const Scalar& lambda);
Density apply(const DensityOperator& a, const Density& s);
/// The function A(1): A applied to the constant density 1 of weight 0.
DiffPolynomial value_on_one(const DensityOperator& a);

DensityOperator lie_operator(const VectorField& x);
DensityOperator ad_vf(const VectorField& x, const DensityOperator& a);
DiffPolynomial divergence_flat(const VectorField& x);

DensityOperator substitute_params(const DensityOperator& a, const std::map<std::uint32_t, Scalar>& bindings);
DensityOperator substitute_params(const DensityOperator& a, std::string_view name, const Scalar& value);
DensityOperator substitute(const DensityOperator& a, const JetRule& rule);

/// Polynomial in the weight operator with Scalar coefficients.
class WeightPoly {
 public:
  WeightPoly() = default;
  WeightPoly(const Scalar& c) : coeffs_{c} { trim(); }  // NOLINT(google-explicit-constructor)
  WeightPoly(long c) : WeightPoly(Scalar(c)) {}         // NOLINT(google-explicit-constructor)
  explicit WeightPoly(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  /// The polynomial L - c.
  static WeightPoly shifted(const Scalar& c) { return WeightPoly({-c, Scalar(1)}); }

  const std::vector<Scalar>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  Scalar eval(const Scalar& at) const;
  /// L -> 1 - L.
  WeightPoly adjoint() const;

  friend WeightPoly operator+(const WeightPoly& a, const WeightPoly& b);
  friend WeightPoly operator-(const WeightPoly& a, const WeightPoly& b);
  friend WeightPoly operator*(const WeightPoly& a, const WeightPoly& b);
  friend bool operator==(const WeightPoly& a, const WeightPoly& b) { return a.coeffs_ == b.coeffs_; }
  WeightPoly pow(unsigned e) const;

  DensityOperator to_operator(int dim) const;
  std::string to_string() const;

 private:
  void trim();
  std::vector<Scalar> coeffs_;
};

/// P(L) * A.
DensityOperator operator*(const WeightPoly& p, const DensityOperator& a);

/// Canonical rendering: terms ordered by x-order descending, then alpha,
/// then weight power ascending.
std::string to_string(const DensityOperator& a);

std::string multi_index_string(const MultiIndex& alpha, int dim);

}  // namespace denslift
