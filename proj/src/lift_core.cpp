// SPDX-License-Identifier: Apache-2.0
#include "denslift/lift_core.hpp"

#include <map>

#include "denslift/errors.hpp"

namespace denslift {

namespace {

const Scalar kHalf = Scalar::rational(1, 2);

void reject_weight(const Scalar& lambda0, const Scalar& bad) {
  if (lambda0 == bad) throw ExceptionalWeight("exceptional weight " + bad.to_string());
}

void require_generic_second_order(const DensityOperator& delta, const Scalar& lambda0) {
  require_weight_free(delta, "second-order lift");
  if (!delta.is_zero() && delta.x_order() > 2) throw OrderTooHigh("operator of order > 2");
  reject_weight(lambda0, Scalar(0));
  reject_weight(lambda0, kHalf);
  reject_weight(lambda0, Scalar(1));
}

MultiIndex pair_index(int i, int j) {
  MultiIndex a = unit_index(i);
  ++a[static_cast<std::size_t>(j - 1)];
  return a;
}

// S^{ij}, T^i, R of a second-order operator.
struct SecondOrderParts {
  std::vector<std::vector<DiffPolynomial>> S;
  VectorField T;
  DiffPolynomial R;
};

SecondOrderParts split_second_order(const DensityOperator& delta) {
  const int dim = delta.dim();
  SecondOrderParts p;
  p.S.assign(static_cast<std::size_t>(dim), std::vector<DiffPolynomial>(static_cast<std::size_t>(dim)));
  for (int i = 1; i <= dim; ++i) {
    for (int j = 1; j <= dim; ++j) {
      DiffPolynomial c = delta.coefficient(0, pair_index(i, j));
      p.S[i - 1][j - 1] = i == j ? c : c.scaled(kHalf);
    }
    p.T.push_back(delta.coefficient(0, unit_index(i)));
  }
  p.R = delta.coefficient(0, MultiIndex{});
  return p;
}

// j-th component of the divergence d_i S^{ij}.
DiffPolynomial div_S(const std::vector<std::vector<DiffPolynomial>>& s, int j) {
  DiffPolynomial out;
  for (std::size_t i = 0; i < s.size(); ++i) out += derive(s[i][static_cast<std::size_t>(j - 1)], static_cast<int>(i) + 1);
  return out;
}

DensityOperator fn(int dim, const DiffPolynomial& f) { return DensityOperator::multiplication(dim, f); }

}  // namespace

void require_weight_free(const DensityOperator& op, const char* what) {
  if (op.has_weight()) throw HasWeightOperator(std::string(what) + ": operator contains the weight operator L");
}

VolLiftParams VolLiftParams::symbolic(int n) {
  VolLiftParams p;
  p.b = Scalar::param("b");
  for (int k = 1; k <= n; ++k) {
    p.c.push_back(Scalar::param("c" + std::to_string(k)));
    p.d.push_back(Scalar::param("d" + std::to_string(k)));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Canonical and Vol liftings
// ---------------------------------------------------------------------------

DensityOperator canonical_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho) {
  require_weight_free(delta, "canonical lift");
  if (rho.is_coordinate()) return delta;
  const int dim = delta.dim();
  const WeightPoly t = weight_shift(lambda0);
  std::vector<DensityOperator> shifted;
  for (int i = 1; i <= dim; ++i)
    shifted.push_back(DensityOperator::partial(dim, i) + t * fn(dim, rho.gamma(i)));

  std::map<MultiIndex, DensityOperator> powers;
  powers.emplace(MultiIndex{}, DensityOperator::identity(dim));
  auto power = [&](const MultiIndex& alpha) -> const DensityOperator& {
    auto it = powers.find(alpha);
    if (it != powers.end()) return it->second;
    // build from the largest cached prefix, axis by axis
    MultiIndex cur{};
    const DensityOperator* acc = &powers.at(cur);
    for (int axis = 1; axis <= dim; ++axis) {
      for (int k = 0; k < alpha[static_cast<std::size_t>(axis - 1)]; ++k) {
        MultiIndex next = cur;
        ++next[static_cast<std::size_t>(axis - 1)];
        auto found = powers.find(next);
        if (found == powers.end())
          found = powers.emplace(next, compose(*acc, shifted[static_cast<std::size_t>(axis - 1)])).first;
        acc = &found->second;
        cur = next;
      }
    }
    return *acc;
  };

  DensityOperator out(dim);
  for (const auto& [k, c] : delta.terms()) out += power(k.alpha).times(c);
  return out;
}

WeightPoly vol_weight_A(const Scalar& lambda0, const VolLiftParams& p) {
  return WeightPoly(1) - WeightPoly(p.b) * weight_shift(lambda0);
}

WeightPoly vol_weight_B(const Scalar& lambda0, const VolLiftParams& p, int n) {
  return WeightPoly(n % 2 ? -p.b : p.b) * weight_shift(lambda0);
}

WeightPoly vol_weight_C(const Scalar& lambda0, const VolLiftParams& p) {
  WeightPoly out;
  for (std::size_t k = 0; k < p.c.size(); ++k)
    out = out + WeightPoly(p.c[k]) * weight_shift(lambda0).pow(static_cast<unsigned>(k + 1));
  return out;
}

WeightPoly vol_weight_D(const Scalar& lambda0, const VolLiftParams& p) {
  WeightPoly out;
  for (std::size_t k = 0; k < p.d.size(); ++k)
    out = out + WeightPoly(p.d[k]) * weight_shift(lambda0).pow(static_cast<unsigned>(k + 1));
  return out;
}

DensityOperator vol_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                         const VolLiftParams& params, std::optional<int> order) {
  require_weight_free(delta, "vol lift");
  if (delta.is_zero()) return delta;
  const int n = order.value_or(delta.total_order());
  const int dim = delta.dim();
  const DensityOperator p = canonical_lift(delta, lambda0, rho);
  const DensityOperator ps = adjoint(p);
  return vol_weight_A(lambda0, params) * p + vol_weight_B(lambda0, params, n) * ps +
         vol_weight_C(lambda0, params) * fn(dim, value_on_one(p)) +
         vol_weight_D(lambda0, params) * fn(dim, value_on_one(ps));
}

DensityOperator distinguished_lift(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho,
                                   std::optional<int> order) {
  require_weight_free(delta, "distinguished lift");
  reject_weight(lambda0, kHalf);
  if (delta.is_zero()) return delta;
  const int n = order.value_or(delta.total_order());
  const Scalar inv = (Scalar(2) * lambda0 - Scalar(1)).inverse();
  const DensityOperator p = canonical_lift(delta, lambda0, rho);
  const WeightPoly a({(lambda0 - Scalar(1)) * inv, inv});     // (L + l0 - 1)/(2 l0 - 1)
  const WeightPoly b({lambda0 * inv, -inv});                   // (l0 - L)/(2 l0 - 1)
  const WeightPoly bs = n % 2 ? b * WeightPoly(-1) : b;
  return a * p + bs * adjoint(p);
}

std::pair<WeightPoly, WeightPoly> sa_vertical_polynomials(int n, const Scalar& lambda0, const std::vector<Scalar>& c,
                                                          const std::vector<Scalar>& d) {
  const int parity = n % 2;
  const int count = (n - parity) / 2;
  const WeightPoly t = weight_shift(kHalf);
  const Scalar t0 = lambda0 - kHalf;
  WeightPoly cs, ds;
  for (int k = 1; k <= count; ++k) {
    const WeightPoly basis = t.pow(static_cast<unsigned>(2 * k)) - WeightPoly(t0.pow(2 * k));
    if (static_cast<std::size_t>(k) <= c.size()) cs = cs + WeightPoly(c[static_cast<std::size_t>(k - 1)]) * basis;
    if (static_cast<std::size_t>(k) <= d.size()) ds = ds + WeightPoly(d[static_cast<std::size_t>(k - 1)]) * basis;
  }
  if (parity) {
    cs = t * cs;
    ds = t * ds;
  }
  return {cs, ds};
}

// ---------------------------------------------------------------------------
// First order
// ---------------------------------------------------------------------------

DensityOperator lie_at_weight(const VectorField& x, const Scalar& lambda) {
  return restrict(lie_operator(x), lambda);
}

FirstOrderParts decompose_first_order(const DensityOperator& delta, const Scalar& lambda0) {
  require_weight_free(delta, "first-order decomposition");
  if (!delta.is_zero() && delta.x_order() > 1) throw OrderTooHigh("operator of order > 1");
  FirstOrderParts parts;
  for (int i = 1; i <= delta.dim(); ++i) parts.a.push_back(delta.coefficient(0, unit_index(i)));
  parts.s = delta.coefficient(0, MultiIndex{}) - divergence_flat(parts.a).scaled(lambda0);
  return parts;
}

DensityOperator first_order_lift(const DensityOperator& delta, const Scalar& lambda0, const Scalar& c) {
  const FirstOrderParts parts = decompose_first_order(delta, lambda0);
  const WeightPoly factor = WeightPoly(1) + WeightPoly(c) * weight_shift(lambda0);
  return lie_operator(parts.a) + factor * fn(delta.dim(), parts.s);
}

// ---------------------------------------------------------------------------
// Second order
// ---------------------------------------------------------------------------

GeometricData extract_geometric_data(const DensityOperator& delta, const Scalar& lambda0) {
  require_generic_second_order(delta, lambda0);
  const int dim = delta.dim();
  const SecondOrderParts p = split_second_order(delta);
  const Scalar inv = (Scalar(2) * lambda0 - Scalar(1)).inverse();
  GeometricData g;
  g.dim = dim;
  g.S = p.S;
  DiffPolynomial div_t, div_div_s;
  for (int j = 1; j <= dim; ++j) {
    const DiffPolynomial ds = div_S(p.S, j);
    g.gamma.push_back((p.T[static_cast<std::size_t>(j - 1)] - ds).scaled(inv));
    div_t += derive(p.T[static_cast<std::size_t>(j - 1)], j);
    div_div_s += derive(ds, j);
  }
  const Scalar norm = (lambda0 * (lambda0 - Scalar(1))).inverse();
  g.theta = (p.R - (div_t - div_div_s).scaled(lambda0 * inv)).scaled(norm);
  return g;
}

DensityOperator assemble_second_order(const GeometricData& g) {
  const int dim = g.dim;
  DensityOperator out(dim);
  DiffPolynomial div_gamma;
  for (int i = 1; i <= dim; ++i) {
    for (int j = 1; j <= dim; ++j) out.add_term(0, pair_index(i, j), g.S[i - 1][j - 1]);
    out.add_term(0, unit_index(i), div_S(g.S, i));
    const DiffPolynomial& gi = g.gamma[static_cast<std::size_t>(i - 1)];
    out.add_term(1, unit_index(i), gi.scaled(Scalar(2)));
    out.add_term(0, unit_index(i), -gi);
    div_gamma += derive(gi, i);
  }
  out.add_term(1, MultiIndex{}, div_gamma);
  out.add_term(2, MultiIndex{}, g.theta);
  out.add_term(1, MultiIndex{}, -g.theta);
  out.add_term(0, MultiIndex{}, g.F);
  return out;
}

DensityOperator second_order_canonical_lift(const DensityOperator& delta, const Scalar& lambda0) {
  return assemble_second_order(extract_geometric_data(delta, lambda0));
}

DiffPolynomial cocycle_rho(const DensityOperator& delta, const Scalar& lambda0, const VolumeForm& rho) {
  const GeometricData g = extract_geometric_data(delta, lambda0);
  DiffPolynomial out = g.theta;
  for (int i = 1; i <= g.dim; ++i) {
    const DiffPolynomial gi = rho.gamma(i);
    out -= (g.gamma[static_cast<std::size_t>(i - 1)] * gi).scaled(Scalar(2));
    for (int j = 1; j <= g.dim; ++j) out += g.S[i - 1][j - 1] * gi * rho.gamma(j);
  }
  return out;
}

DensityOperator limit_lift(const DensityOperator& delta, const VolumeForm& rho) {
  require_weight_free(delta, "limit lift");
  if (!delta.is_zero() && delta.x_order() > 2) throw OrderTooHigh("operator of order > 2");
  if (!value_on_one(delta).is_zero()) throw NotNormalized("operator does not annihilate constants");
  const int dim = delta.dim();
  const SecondOrderParts p = split_second_order(delta);
  GeometricData g;
  g.dim = dim;
  g.S = p.S;
  DiffPolynomial theta;
  for (int i = 1; i <= dim; ++i) {
    DiffPolynomial gi = div_S(p.S, i) - p.T[static_cast<std::size_t>(i - 1)];
    DiffPolynomial upper_gamma;  // Gamma^i = S^{ik} Gamma_k
    for (int k = 1; k <= dim; ++k) upper_gamma += p.S[i - 1][k - 1] * rho.gamma(k);
    theta += derive(gi, i) - derive(upper_gamma, i) + gi * rho.gamma(i);
    g.gamma.push_back(std::move(gi));
  }
  g.theta = theta;
  return assemble_second_order(g);
}

// ---------------------------------------------------------------------------
// Taylor expansion
// ---------------------------------------------------------------------------

std::vector<DensityOperator> taylor_expand(const DensityOperator& op, const Scalar& lambda0, const VolumeForm& rho) {
  const int dim = op.dim();
  const int n = op.is_zero() ? 0 : op.total_order();
  std::vector<DensityOperator> out;
  DensityOperator rest = op;
  for (int k = 0; k <= n; ++k) {
    DensityOperator delta = restrict(rest, lambda0);
    out.push_back(delta);
    rest -= canonical_lift(delta, lambda0, rho);
    // divide by (L - lambda0) termwise: synthetic division in L for each alpha
    std::map<MultiIndex, std::map<unsigned, DiffPolynomial>> by_alpha;
    for (const auto& [key, c] : rest.terms()) by_alpha[key.alpha][key.r] = c;
    DensityOperator quotient(dim);
    for (auto& [alpha, coeffs] : by_alpha) {
      const unsigned top = coeffs.rbegin()->first;
      DiffPolynomial carry;
      for (unsigned r = top; r >= 1; --r) {
        auto it = coeffs.find(r);
        carry = (it == coeffs.end() ? DiffPolynomial() : it->second) + carry.scaled(lambda0);
        quotient.add_term(r - 1, alpha, carry);
      }
      auto it0 = coeffs.find(0);
      DiffPolynomial remainder = (it0 == coeffs.end() ? DiffPolynomial() : it0->second) + carry.scaled(lambda0);
      if (!remainder.is_zero()) throw NotExact("Taylor remainder is not divisible by (L - lambda0)");
    }
    rest = quotient;
  }
  if (!rest.is_zero()) throw NotExact("Taylor expansion did not terminate");
  return out;
}

DensityOperator taylor_assemble(const std::vector<DensityOperator>& coeffs, const Scalar& lambda0,
                                const VolumeForm& rho) {
  if (coeffs.empty()) return DensityOperator(1);
  const int dim = coeffs.front().dim();
  DensityOperator out(dim);
  WeightPoly power(1);
  for (const auto& c : coeffs) {
    require_weight_free(c, "Taylor coefficient");
    out += power * canonical_lift(c, lambda0, rho);
    power = power * weight_shift(lambda0);
  }
  return out;
}

DensityOperator selfadjoint_family(const DensityOperator& delta0, const Scalar& lambda0, const VolumeForm& rho,
                                   const std::vector<DensityOperator>& evens) {
  require_weight_free(delta0, "self-adjoint family");
  reject_weight(lambda0, kHalf);
  const int dim = delta0.dim();
  if (delta0.is_zero()) return delta0;
  const int n = delta0.total_order();
  const bool odd = n % 2;

  std::vector<DensityOperator> d(static_cast<std::size_t>(n + 2), DensityOperator(dim));
  const DensityOperator base = canonical_lift(delta0, lambda0, rho);
  d[0] = restrict(base, kHalf);
  for (std::size_t k = 0; k < evens.size(); ++k) {
    const int index = 2 * static_cast<int>(k + 1);
    const DensityOperator& e = evens[k];
    check_same_dim(delta0, e);
    require_weight_free(e, "self-adjoint family coefficient");
    if (e.is_zero()) continue;
    if (index > n || e.x_order() > n - index)
      throw OrderViolation("coefficient " + std::to_string(index) + " exceeds order " + std::to_string(n - index));
    d[static_cast<std::size_t>(index)] = e;
  }
  const Scalar two_mu = Scalar(2) * lambda0 - Scalar(1);
  auto sym = [&](const DensityOperator& a, bool plus) {
    const DensityOperator as = adjoint(a);
    return (plus != odd) ? a + as : a - as;  // a + eps a* when plus, a - eps a* otherwise
  };
  for (int k = 1; k <= n; k += 2) {
    d[static_cast<std::size_t>(k)] = sym(d[static_cast<std::size_t>(k - 1)], false).scaled(two_mu.inverse()) +
                                     sym(d[static_cast<std::size_t>(k + 1)], true).scaled(two_mu / Scalar(4));
  }
  DensityOperator tail(dim);
  const WeightPoly t = weight_shift(kHalf);
  WeightPoly power(1);
  for (int k = 1; k <= n; ++k) {
    tail += power * canonical_lift(d[static_cast<std::size_t>(k)], kHalf, rho);
    power = power * t;
  }
  return base + weight_shift(lambda0) * tail;
}

bool is_regular_pair(const DensityOperator& delta, const DensityOperator& lift, int n) {
  (void)delta;
  return lift.is_zero() || lift.total_order() <= n;
}

bool is_strict_pair(const DensityOperator& delta, const DensityOperator& lift) {
  if (lift.is_zero()) return true;
  if (delta.is_zero()) return false;
  return lift.total_order() <= delta.total_order();
}

}  // namespace denslift
