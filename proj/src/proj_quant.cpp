// SPDX-License-Identifier: Apache-2.0
#include "denslift/proj_quant.hpp"

#include <functional>

#include "denslift/errors.hpp"
#include "denslift/lift_core.hpp"

namespace denslift {

namespace {

Scalar factorial(int n) {
  Scalar out(1);
  for (int k = 2; k <= n; ++k) out *= Scalar(k);
  return out;
}

Scalar index_factorial(const MultiIndex& a) {
  Scalar out(1);
  for (auto v : a) out *= factorial(v);
  return out;
}

// Generalized binomial (falling factorial over k!) in a Scalar argument.
Scalar binomial_scalar(const Scalar& top, int k) {
  Scalar out(1);
  for (int j = 0; j < k; ++j) out *= top - Scalar(j);
  return out / factorial(k);
}

// Calls f(P) for every multi-index P <= alpha with |P| = k.
void for_each_sub_index(const MultiIndex& alpha, int k, const std::function<void(const MultiIndex&)>& f) {
  MultiIndex p{};
  std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int left) {
    if (axis == alpha.size()) {
      if (left == 0) f(p);
      return;
    }
    for (int v = std::min<int>(left, alpha[axis]); v >= 0; --v) {
      p[axis] = static_cast<std::uint8_t>(v);
      rec(axis + 1, left - v);
    }
    p[axis] = 0;
  };
  rec(0, k);
}

MultiIndex minus(MultiIndex a, const MultiIndex& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<std::uint8_t>(a[i] - b[i]);
  return a;
}

void require_dim_one(const DensityOperator& op) {
  if (op.dim() != 1) throw DimensionNotOne("operation defined for dimension 1 only");
}

std::string xi_string(const MultiIndex& a, int dim) {
  std::string out;
  for (int axis = 1; axis <= dim; ++axis) {
    const int e = a[static_cast<std::size_t>(axis - 1)];
    if (e == 0) continue;
    if (!out.empty()) out += "*";
    out += dim == 1 ? "xi" : "xi" + std::to_string(axis);
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out;
}

const std::vector<std::pair<JetSymbol, JetSymbol>>& w_pairs() {
  static const std::vector<std::pair<JetSymbol, JetSymbol>> pairs{{jet_symbol("w"), jet_symbol("y", {}, unit_index(1))}};
  return pairs;
}

DensityOperator reduce_w(const DensityOperator& op) {
  return op.map_coefficients([](const DiffPolynomial& c) { return reduce_inverse_pairs(c, w_pairs()); });
}

// Operator in the y chart before any specialization of the jets of y.
DensityOperator change_chart(const DensityOperator& op, const DiffeoJet1D& phi) {
  require_dim_one(op);
  const Derivation dy = phi.dy();
  const DensityOperator new_partial =
      DensityOperator::term(1, 0, unit_index(1), phi.y_jet(1)) + DensityOperator::term(1, 1, {}, phi.y_jet(2) * phi.w_jet());
  std::vector<DensityOperator> powers{DensityOperator::identity(1)};
  DensityOperator out(1);
  for (const auto& [k, c] : op.terms()) {
    const std::size_t n = k.alpha[0];
    while (powers.size() <= n) powers.push_back(reduce_w(compose(powers.back(), new_partial, dy)));
    out += powers[n].weight_shifted(k.r).times(c);
  }
  return reduce_w(out);
}

}  // namespace

// ---------------------------------------------------------------------------
// SymbolPoly
// ---------------------------------------------------------------------------

SymbolPoly::SymbolPoly(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw DimensionMismatch("dimension must be in 1.." + std::to_string(kMaxDim));
}

int SymbolPoly::degree() const {
  if (terms_.empty()) throw ZeroOperator("degree of the zero symbol");
  int out = 0;
  for (const auto& [k, c] : terms_) out = std::max(out, denslift::degree(k));
  return out;
}

DiffPolynomial SymbolPoly::coefficient(const MultiIndex& xi) const {
  auto it = terms_.find(xi);
  return it == terms_.end() ? DiffPolynomial() : it->second;
}

void SymbolPoly::add_term(const MultiIndex& xi, const DiffPolynomial& c) {
  for (int axis = dim_ + 1; axis <= kMaxDim; ++axis)
    if (xi[static_cast<std::size_t>(axis - 1)] != 0)
      throw IndexOutOfRange("xi index outside 1.." + std::to_string(dim_));
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(xi, c);
  if (inserted) return;
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

SymbolPoly SymbolPoly::part(int k) const {
  SymbolPoly out(dim_);
  for (const auto& [xi, c] : terms_)
    if (denslift::degree(xi) == k) out.terms_.emplace(xi, c);
  return out;
}

SymbolPoly& SymbolPoly::operator+=(const SymbolPoly& o) {
  if (dim_ != o.dim_) throw DimensionMismatch("symbols of different dimension");
  for (const auto& [xi, c] : o.terms_) add_term(xi, c);
  return *this;
}

SymbolPoly& SymbolPoly::operator-=(const SymbolPoly& o) {
  if (dim_ != o.dim_) throw DimensionMismatch("symbols of different dimension");
  for (const auto& [xi, c] : o.terms_) add_term(xi, -c);
  return *this;
}

SymbolPoly SymbolPoly::scaled(const Scalar& c) const {
  SymbolPoly out(dim_);
  if (c.is_zero()) return out;
  for (const auto& [xi, p] : terms_) out.terms_.emplace(xi, p.scaled(c));
  return out;
}

std::string to_string(const SymbolPoly& p) {
  if (p.is_zero()) return "0";
  std::vector<std::pair<MultiIndex, const DiffPolynomial*>> order;
  for (const auto& [xi, c] : p.terms()) order.emplace_back(xi, &c);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    const int da = degree(a.first), db = degree(b.first);
    if (da != db) return da > db;
    return a.first > b.first;
  });
  std::string out;
  for (const auto& [xi, c] : order) {
    const std::string xs = xi_string(xi, p.dim());
    bool neg = false;
    std::string body;
    if (xs.empty()) {
      body = c->to_string();
      if (body[0] == '-') {
        neg = true;
        body = (-*c).to_string();
      }
    } else if (c->size() == 1) {
      const auto& [m, coef] = *c->terms().begin();
      neg = coef.looks_negative();
      const Scalar mag = neg ? -coef : coef;
      if (!mag.is_one()) body = mag.to_factor_string();
      if (!m.empty()) body += (body.empty() ? "" : "*") + denslift::to_string(m);
      body += (body.empty() ? "" : "*") + xs;
    } else {
      body = "(" + c->to_string() + ")*" + xs;
    }
    if (out.empty())
      out = neg ? "-" + body : body;
    else
      out += (neg ? " - " : " + ") + body;
  }
  return out;
}

SymbolPoly principal_symbol(const DensityOperator& op, int k) {
  require_weight_free(op, "principal symbol");
  SymbolPoly out(op.dim());
  for (const auto& [key, c] : op.terms())
    if (degree(key.alpha) == k) out.add_term(key.alpha, c);
  return out;
}

// ---------------------------------------------------------------------------
// Projective symbol calculus
// ---------------------------------------------------------------------------

std::vector<VectorField> proj_generators(int dim) {
  std::vector<VectorField> out;
  for (int i = 1; i <= dim; ++i) {
    VectorField x(static_cast<std::size_t>(dim));
    x[static_cast<std::size_t>(i - 1)] = DiffPolynomial(1);
    out.push_back(std::move(x));
  }
  for (int i = 1; i <= dim; ++i)
    for (int k = 1; k <= dim; ++k) {
      VectorField x(static_cast<std::size_t>(dim));
      x[static_cast<std::size_t>(k - 1)] = coord(i);
      out.push_back(std::move(x));
    }
  for (int i = 1; i <= dim; ++i) {
    VectorField x;
    for (int k = 1; k <= dim; ++k) x.push_back(coord(i) * coord(k));
    out.push_back(std::move(x));
  }
  return out;
}

Scalar symbol_coeff(int n, int k, const Scalar& lambda, int dim) {
  if (k < 0 || k > n) throw IndexOutOfRange("symbol coefficient index out of range");
  const Scalar top = lambda * Scalar(dim + 1) + Scalar(n - 1);
  const Scalar value = binomial_scalar(Scalar(n), k) * binomial_scalar(top, k) / binomial_scalar(Scalar(2 * n - k + dim), k);
  return k % 2 ? -value : value;
}

SymbolPoly full_symbol(const DensityOperator& op, const Scalar& lambda) {
  require_weight_free(op, "full symbol");
  const int dim = op.dim();
  SymbolPoly out(dim);
  for (const auto& [key, c] : op.terms()) {
    const MultiIndex& alpha = key.alpha;
    const int n = degree(alpha);
    // symmetric tensor component L^alpha = c alpha!/n!
    const Scalar tensor = index_factorial(alpha) / factorial(n);
    for (int k = 0; k <= n; ++k) {
      const Scalar ck = symbol_coeff(n, k, lambda, dim) * tensor;
      for_each_sub_index(alpha, k, [&](const MultiIndex& p) {
        const MultiIndex rest = minus(alpha, p);
        const Scalar weight = ck * factorial(n - k) / index_factorial(rest) * factorial(k) / index_factorial(p);
        out.add_term(rest, derive(c, p).scaled(weight));
      });
    }
  }
  return out;
}

DensityOperator quantize(const SymbolPoly& p, const Scalar& lambda) {
  DensityOperator out(p.dim());
  SymbolPoly rest = p;
  while (!rest.is_zero()) {
    DensityOperator top(p.dim());
    const SymbolPoly leading = rest.part(rest.degree());
    for (const auto& [xi, c] : leading.terms()) top.add_term(0, xi, c);
    out += top;
    rest -= full_symbol(top, lambda);
  }
  return out;
}

SymbolPoly symbol_lie(const VectorField& x, const SymbolPoly& p) {
  const int dim = p.dim();
  if (static_cast<int>(x.size()) != dim) throw DimensionMismatch("vector field and symbol dimensions differ");
  SymbolPoly out(dim);
  for (const auto& [xi, c] : p.terms()) {
    for (int i = 1; i <= dim; ++i) {
      out.add_term(xi, x[static_cast<std::size_t>(i - 1)] * derive(c, i));
      const int e = xi[static_cast<std::size_t>(i - 1)];
      if (e == 0) continue;
      for (int j = 1; j <= dim; ++j) {
        const DiffPolynomial dx = derive(x[static_cast<std::size_t>(j - 1)], i);
        if (dx.is_zero()) continue;
        MultiIndex target = xi;
        --target[static_cast<std::size_t>(i - 1)];
        ++target[static_cast<std::size_t>(j - 1)];
        out.add_term(target, (dx * c).scaled(Scalar(-e)));
      }
    }
  }
  return out;
}

SymbolPoly proj_equivariance_defect(const DensityOperator& op, const Scalar& lambda, const VectorField& x) {
  return symbol_lie(x, full_symbol(op, lambda)) - full_symbol(restrict(ad_vf(x, op), lambda), lambda);
}

DensityOperator proj_lift(const DensityOperator& op, const Scalar& lambda0) {
  require_weight_free(op, "projective lift");
  if (op.is_zero()) return op;
  const int n = op.total_order();
  const SymbolPoly sigma = full_symbol(op, lambda0);
  DensityOperator out(op.dim());
  for (int j = 0; j <= n; ++j) {
    WeightPoly basis(1);
    for (int m = 0; m <= n; ++m) {
      if (m == j) continue;
      basis = basis * WeightPoly({Scalar(-m) / Scalar(j - m), Scalar(1) / Scalar(j - m)});
    }
    out += basis * quantize(sigma, Scalar(j));
  }
  return out;
}

DensityOperator weight_from_param(const DensityOperator& op, std::string_view name) {
  const std::uint32_t id = ParamRegistry::instance().id(name);
  DensityOperator out(op.dim());
  for (const auto& [key, c] : op.terms()) {
    for (const auto& [m, s] : c.terms()) {
      if (!s.is_polynomial() && s.den().contains(id))
        throw NotExact("coefficient is not polynomial in " + std::string(name));
      for (std::uint32_t k = 0; k <= s.degree_in(id); ++k)
        out.add_term(key.r + k, key.alpha, DiffPolynomial(m, s.coefficient(id, k)));
    }
  }
  return out;
}

std::vector<DensityOperator> proj_decompose(const DensityOperator& op, const Scalar& lambda0) {
  require_weight_free(op, "projective decomposition");
  std::vector<DensityOperator> parts;
  if (op.is_zero()) return {op};
  const int n = op.x_order();
  DensityOperator rest = op;
  for (int i = 0; i <= n; ++i) {
    DensityOperator part = quantize(principal_symbol(rest, n - i), lambda0);
    rest -= part;
    parts.push_back(std::move(part));
  }
  return parts;
}

DensityOperator proj_regular_lift(const DensityOperator& op, const Scalar& lambda0,
                                  const std::vector<WeightPoly>& polys) {
  for (std::size_t k = 0; k < polys.size(); ++k) {
    if (polys[k].degree() > static_cast<int>(k))
      throw BadPolynomial("P_" + std::to_string(k) + " has degree above " + std::to_string(k));
    if (!polys[k].eval(lambda0).is_one())
      throw BadPolynomial("P_" + std::to_string(k) + " is not 1 at lambda0");
  }
  const auto parts = proj_decompose(op, lambda0);
  DensityOperator out(op.dim());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].is_zero()) continue;
    const DensityOperator lifted = proj_lift(parts[k], lambda0);
    out += k < polys.size() ? polys[k] * lifted : lifted;
  }
  return out;
}

std::vector<WeightPoly> proj_sa_polynomials(int n, const Scalar& lambda0, const std::vector<std::vector<Scalar>>& c,
                                            const std::vector<std::vector<Scalar>>& d) {
  if (lambda0 == Scalar::rational(1, 2)) throw ExceptionalWeight("exceptional weight 1/2");
  const WeightPoly t = WeightPoly::shifted(Scalar::rational(1, 2));
  const Scalar t0 = lambda0 - Scalar::rational(1, 2);
  const WeightPoly odd_factor = t * WeightPoly(t0.inverse());
  auto even_part = [&](const std::vector<std::vector<Scalar>>& coeffs, int k) {
    WeightPoly out(1);
    if (k < 1 || static_cast<std::size_t>(k) > coeffs.size()) return out;
    const auto& row = coeffs[static_cast<std::size_t>(k - 1)];
    for (int r = 1; r <= k && static_cast<std::size_t>(r) <= row.size(); ++r)
      out = out + WeightPoly(row[static_cast<std::size_t>(r - 1)]) *
                      (t.pow(static_cast<unsigned>(2 * r)) - WeightPoly(t0.pow(2 * r)));
    return out;
  };
  std::vector<WeightPoly> out;
  for (int m = 0; m <= n; ++m) {
    if (m % 2 == 0)
      out.push_back(even_part(c, m / 2));
    else
      out.push_back(odd_factor * even_part(d, m / 2));
  }
  return out;
}

std::vector<WeightPoly> proj_sa_polynomials(int n, const Scalar& lambda0) {
  std::vector<std::vector<Scalar>> c, d;
  for (int m = 2; m <= n; ++m) {
    std::vector<Scalar> row;
    for (int r = 1; r <= m / 2; ++r) row.push_back(Scalar::param("k" + std::to_string(m) + "_" + std::to_string(r)));
    (m % 2 ? d : c).push_back(std::move(row));
  }
  return proj_sa_polynomials(n, lambda0, c, d);
}

int proj_sa_parameter_count(int n) {
  int out = 0;
  for (int m = 2; m <= n; ++m) out += m / 2;
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional charts and the Schwarzian
// ---------------------------------------------------------------------------

DiffPolynomial schwarzian_data(const DensityOperator& op, const Scalar& lambda0, const Derivation& d) {
  require_dim_one(op);
  require_weight_free(op, "Schwarzian");
  if (!op.is_zero() && op.x_order() > 2) throw OrderTooHigh("operator of order > 2");
  for (const Scalar bad : {Scalar(0), Scalar::rational(1, 2), Scalar(1)})
    if (lambda0 == bad) throw ExceptionalWeight("exceptional weight " + bad.to_string());
  const auto D = [&](const DiffPolynomial& p) { return d ? d(p, 1) : derive(p, 1); };
  MultiIndex two{};
  two[0] = 2;
  const DiffPolynomial a = op.coefficient(0, two), b = op.coefficient(0, unit_index(1)), c = op.coefficient(0, {});
  const Scalar inv = (Scalar(2) * lambda0 - Scalar(1)).inverse();
  const DiffPolynomial axx = D(D(a));
  const DiffPolynomial gamma = (b - D(a)).scaled(inv);
  const DiffPolynomial theta = (c - (D(b) - axx).scaled(lambda0 * inv)).scaled((lambda0 * (lambda0 - Scalar(1))).inverse());
  return theta - D(gamma).scaled(Scalar(2)) + axx.scaled(Scalar::rational(2, 3));
}

DiffeoJet1D DiffeoJet1D::identity() { return scaling(Scalar(1)); }

DiffeoJet1D DiffeoJet1D::scaling(const Scalar& k) {
  DiffeoJet1D out;
  out.values = [k](const JetSymbol& s) -> std::optional<DiffPolynomial> {
    if (s.name() == "w") return DiffPolynomial(k.inverse());
    if (s.name() != "y") return std::nullopt;
    switch (degree(s.deriv)) {
      case 0:
        return coord(1).scaled(k);
      case 1:
        return DiffPolynomial(k);
      default:
        return DiffPolynomial();
    }
  };
  return out;
}

DiffeoJet1D DiffeoJet1D::moebius() {
  DiffeoJet1D out;
  const Scalar x0 = Scalar::param("x0");
  const Scalar u = Scalar(1) - x0;
  out.values = [x0, u](const JetSymbol& s) -> std::optional<DiffPolynomial> {
    if (s.name() == "w") return DiffPolynomial(u * u);
    if (s.name() != "y") return std::nullopt;
    const int k = degree(s.deriv);
    if (k == 0) return DiffPolynomial(x0 / u);
    return DiffPolynomial(factorial(k) / u.pow(k + 1));
  };
  return out;
}

Derivation DiffeoJet1D::dy() const {
  return [](const DiffPolynomial& p, int axis) {
    if (axis != 1) throw DimensionNotOne("chart change is one-dimensional");
    return reduce_inverse_pairs(jet("w") * derive(p, 1), w_pairs());
  };
}

DiffPolynomial DiffeoJet1D::finish(const DiffPolynomial& p) const {
  DiffPolynomial out = reduce_inverse_pairs(p, w_pairs());
  return values ? substitute(out, *values) : out;
}

DensityOperator DiffeoJet1D::finish(const DensityOperator& op) const {
  return op.map_coefficients([this](const DiffPolynomial& c) { return finish(c); });
}

DiffPolynomial DiffeoJet1D::y_jet(int k) const { return jet("y", {}, std::vector<int>(static_cast<std::size_t>(k), 1)); }

DiffPolynomial DiffeoJet1D::w_jet() const { return jet("w"); }

DiffPolynomial DiffeoJet1D::schwarzian() const {
  const DiffPolynomial w = w_jet(), y2 = y_jet(2);
  return y_jet(3) * w - (y2 * y2 * w * w).scaled(Scalar::rational(3, 2));
}

DensityOperator coordinate_change_1d(const DensityOperator& op, const DiffeoJet1D& phi) {
  return phi.finish(change_chart(op, phi));
}

DiffPolynomial schwarzian_transform(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi) {
  const DensityOperator moved = restrict(change_chart(op, phi), lambda0);
  return phi.finish(schwarzian_data(moved, lambda0, phi.dy()));
}

bool schwarzian_cocycle_check(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi) {
  require_dim_one(op);
  MultiIndex two{};
  two[0] = 2;
  const DensityOperator moved = restrict(change_chart(op, phi), lambda0);
  const DiffPolynomial moved_s = schwarzian_data(moved, lambda0, phi.dy());
  const DiffPolynomial y1 = phi.y_jet(1);
  const DiffPolynomial lhs = phi.finish(moved_s * y1 * y1);
  const DiffPolynomial rhs = phi.finish(schwarzian_data(op, lambda0) - phi.schwarzian() * op.coefficient(0, two));
  return lhs == rhs;
}

bool schwarzian_function_law_check(const DensityOperator& op, const Scalar& lambda0, const DiffeoJet1D& phi) {
  require_dim_one(op);
  MultiIndex two{};
  two[0] = 2;
  const DiffPolynomial expected = schwarzian_data(op, lambda0) -
                                  (phi.schwarzian() * op.coefficient(0, two)).scaled(Scalar::rational(2, 3));
  return schwarzian_transform(op, lambda0, phi) == phi.finish(expected);
}

bool schwarzian_composition_check() {
  // p_k: derivatives of the outer map at the inner point, q = 1/p_1;
  // u_k: derivatives of the inner map, v = 1/u_1.
  auto p = [](int k) { return jet("phi", {}, std::vector<int>(static_cast<std::size_t>(k), 1)); };
  auto u = [](int k) { return jet("psi", {}, std::vector<int>(static_cast<std::size_t>(k), 1)); };
  const DiffPolynomial q = jet("phi_inv"), v = jet("psi_inv");
  const std::vector<std::pair<JetSymbol, JetSymbol>> pairs{
      {jet_symbol("phi_inv"), jet_symbol("phi", {}, unit_index(1))},
      {jet_symbol("psi_inv"), jet_symbol("psi", {}, unit_index(1))}};
  const DiffPolynomial z2 = p(2) * u(1).pow(2) + p(1) * u(2);
  const DiffPolynomial z3 = p(3) * u(1).pow(3) + (p(2) * u(1) * u(2)).scaled(Scalar(3)) + p(1) * u(3);
  const DiffPolynomial zinv = q * v;
  const Scalar three_halves = Scalar::rational(3, 2);
  const DiffPolynomial composite = z3 * zinv - (z2 * z2 * zinv * zinv).scaled(three_halves);
  const DiffPolynomial outer = p(3) * q - (p(2) * p(2) * q * q).scaled(three_halves);
  const DiffPolynomial inner = u(3) * v - (u(2) * u(2) * v * v).scaled(three_halves);
  return reduce_inverse_pairs(composite, pairs) == reduce_inverse_pairs(outer * u(1).pow(2) + inner, pairs);
}

}  // namespace denslift
