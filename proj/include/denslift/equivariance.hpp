// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "denslift/lift_core.hpp"
#include "denslift/linalg.hpp"

namespace denslift {

enum class LiftKind { Canonical, Vol, Distinguished, FirstOrder, SecondOrderCanonical, ProjLift, ProjRegular };

/// A lifting map Pi with its fixed data, so that ad_X Pi can be formed.
struct LiftingHandle {
  LiftKind kind = LiftKind::Canonical;
  Scalar lambda0;
  VolumeForm rho = VolumeForm::coordinate();
  VolLiftParams params;
  Scalar c;                      // FirstOrder
  std::vector<WeightPoly> polys; // ProjRegular
  std::optional<int> order;      // Vol and Distinguished parity

  static LiftingHandle canonical(const Scalar& lambda0, const VolumeForm& rho);
  static LiftingHandle vol(const Scalar& lambda0, const VolumeForm& rho, const VolLiftParams& params,
                           std::optional<int> order = {});
  static LiftingHandle distinguished(const Scalar& lambda0, const VolumeForm& rho, std::optional<int> order = {});
  static LiftingHandle first_order(const Scalar& lambda0, const Scalar& c);
  static LiftingHandle second_order_canonical(const Scalar& lambda0);
  static LiftingHandle proj(const Scalar& lambda0);
  static LiftingHandle proj_regular(const Scalar& lambda0, std::vector<WeightPoly> polys);

  DensityOperator operator()(const DensityOperator& delta) const;
};

/// d_i X^i + X^i d_i log(rho).
DiffPolynomial divergence(const VectorField& x, const VolumeForm& rho);

/// ad_X(Pi(Delta)) - Pi(ad_X Delta), with ad_X Delta taken at weight lambda0.
DensityOperator ad_on_lifting(const LiftingHandle& h, const DensityOperator& delta, const VectorField& x);

/// First-order change of Pi(Delta) under rho -> rho (1 + eps h). Only the
/// Canonical, Vol and Distinguished kinds depend on rho.
DensityOperator volume_variation(const LiftingHandle& lift, const DensityOperator& delta, const DiffPolynomial& h);

/// ad_on_lifting(Pi, Delta, X) == volume_variation(Pi, Delta, div_rho X).
bool check_adX_variation_identity(const LiftingHandle& lift, const DensityOperator& delta, const VectorField& x);
bool check_adX_variation_identity(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                                  const VectorField& x);

/// Generic symmetric tensor field with vanishing divergence d_j S^{I j} = 0,
/// imposed by eliminating every jet S^{I d}_{,beta} with beta_d >= 1.
class DivFreeTensor {
 public:
  DivFreeTensor(int dim, int rank, std::string name);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  /// Component with the given (1-based) upper indices.
  DiffPolynomial component(std::vector<int> upper) const;
  /// Rank-1 components as a vector field.
  VectorField field() const;
  /// S^{i_1..i_k} d_{i_1} ... d_{i_k}.
  DensityOperator as_operator() const;

  DiffPolynomial reduce(const DiffPolynomial& p) const;
  DensityOperator reduce(const DensityOperator& op) const;

 private:
  std::optional<DiffPolynomial> eliminate(const JetSymbol& s) const;

  int dim_;
  int rank_;
  std::string name_;
};

/// Divergence-free vector field; throws DimensionTooSmall for dim 1.
DivFreeTensor generic_divfree_field(int dim, const std::string& name = "X");
DivFreeTensor generic_divfree_tensor(int dim, int rank, const std::string& name = "S");

/// Coefficients of F(Delta) = a1 S dd + a2 (d_i S^ij) d_j + a3 d_i d_j S^ij
/// + b1 T d + b2 d_i T^i + c R.
struct SdiffMapCoeffs {
  Scalar a1, a2, a3, b1, b2, c;
};

DensityOperator apply_sdiff_map(const SdiffMapCoeffs& f, const DensityOperator& delta);
/// ad_X F(Delta) - F(ad_X Delta) for generic Delta of order 2 and generic
/// divergence-free X, reduced modulo the divergence constraint.
DensityOperator classify_sdiff_map(const SdiffMapCoeffs& f, int dim);
/// Basis of the (a1, a2, a3, b1, b2, c) with zero residual.
std::vector<std::vector<Scalar>> sdiff_kernel(int dim);

/// Pi_+ (even rank) or Pi_- (odd rank) on S d..d with S generic and
/// divergence-free, against a generic unconstrained X. With
/// `impose_constraint` false the divergence relations are dropped.
bool divfree_tensor_lift_check(int dim, int rank, const Scalar& lambda0, bool impose_constraint = true);

}  // namespace denslift
