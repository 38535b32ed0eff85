// SPDX-License-Identifier: Apache-2.0
#include "denslift/density_ops.hpp"

#include <algorithm>

#include "denslift/errors.hpp"

namespace denslift {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DimensionMismatch("dimension must be in 1.." + std::to_string(kMaxDim));
}

void check_axis(int dim, int axis) {
  if (axis < 1 || axis > dim)
    throw IndexOutOfRange("axis " + std::to_string(axis) + " outside 1.." + std::to_string(dim));
}

// Calls f(gamma) for every gamma <= alpha componentwise.
template <class F>
void for_each_below(const MultiIndex& alpha, F&& f) {
  MultiIndex g{};
  while (true) {
    f(g);
    std::size_t k = 0;
    while (k < g.size()) {
      if (g[k] < alpha[k]) {
        ++g[k];
        break;
      }
      g[k] = 0;
      ++k;
    }
    if (k == g.size()) return;
  }
}

long multi_binomial(const MultiIndex& alpha, const MultiIndex& gamma) {
  long out = 1;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    long c = 1;
    for (int j = 0; j < gamma[k]; ++j) c = c * (alpha[k] - j) / (j + 1);
    out *= c;
  }
  return out;
}

MultiIndex minus(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out{};
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = static_cast<std::uint8_t>(a[k] - b[k]);
  return out;
}

MultiIndex plus(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out{};
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = static_cast<std::uint8_t>(a[k] + b[k]);
  return out;
}

// Memoized table of derivatives of one coefficient.
class DerivativeTable {
 public:
  DerivativeTable(const DiffPolynomial& base, const Derivation& d) : d_(d) { table_.emplace(MultiIndex{}, base); }

  const DiffPolynomial& get(const MultiIndex& gamma) {
    auto it = table_.find(gamma);
    if (it != table_.end()) return it->second;
    std::size_t k = 0;
    while (gamma[k] == 0) ++k;
    MultiIndex prev = gamma;
    --prev[k];
    DiffPolynomial value = get(prev);
    value = d_ ? d_(value, static_cast<int>(k) + 1) : derive(value, static_cast<int>(k) + 1);
    return table_.emplace(gamma, std::move(value)).first->second;
  }

 private:
  Derivation d_;
  std::map<MultiIndex, DiffPolynomial> table_;
};

}  // namespace

// ---------------------------------------------------------------------------
// DensityOperator
// ---------------------------------------------------------------------------

DensityOperator::DensityOperator(int dim) : dim_(dim) { check_dim(dim); }

DensityOperator DensityOperator::weight(int dim, unsigned power) {
  return term(dim, power, MultiIndex{}, DiffPolynomial(1));
}

DensityOperator DensityOperator::partial(int dim, int axis) {
  check_axis(dim, axis);
  return term(dim, 0, unit_index(axis), DiffPolynomial(1));
}

DensityOperator DensityOperator::multiplication(int dim, const DiffPolynomial& f) {
  return term(dim, 0, MultiIndex{}, f);
}

DensityOperator DensityOperator::term(int dim, unsigned r, const MultiIndex& alpha, const DiffPolynomial& c) {
  DensityOperator out(dim);
  out.add_term(r, alpha, c);
  return out;
}

DiffPolynomial DensityOperator::coefficient(unsigned r, const MultiIndex& alpha) const {
  auto it = terms_.find(OpKey{r, alpha});
  return it == terms_.end() ? DiffPolynomial() : it->second;
}

void DensityOperator::add_term(unsigned r, const MultiIndex& alpha, const DiffPolynomial& c) {
  if (c.is_zero()) return;
  for (int k = dim_; k < kMaxDim; ++k)
    if (alpha[static_cast<std::size_t>(k)] != 0) throw IndexOutOfRange("derivative axis exceeds dimension");
  auto [it, inserted] = terms_.emplace(OpKey{r, alpha}, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

int DensityOperator::total_order() const {
  if (terms_.empty()) throw ZeroOperator("order of the zero operator");
  int n = 0;
  for (const auto& [k, c] : terms_) n = std::max(n, static_cast<int>(k.r) + degree(k.alpha));
  return n;
}

int DensityOperator::x_order() const {
  if (terms_.empty()) throw ZeroOperator("order of the zero operator");
  int n = 0;
  for (const auto& [k, c] : terms_) n = std::max(n, degree(k.alpha));
  return n;
}

bool DensityOperator::is_vertical() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return degree(t.first.alpha) == 0; });
}

bool DensityOperator::has_weight() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.r > 0; });
}

unsigned DensityOperator::weight_degree() const {
  unsigned r = 0;
  for (const auto& [k, c] : terms_) r = std::max(r, k.r);
  return r;
}

DensityOperator DensityOperator::operator-() const {
  DensityOperator out = *this;
  for (auto& [k, c] : out.terms_) c = -c;
  return out;
}

DensityOperator& DensityOperator::operator+=(const DensityOperator& o) {
  check_same_dim(*this, o);
  for (const auto& [k, c] : o.terms_) add_term(k.r, k.alpha, c);
  return *this;
}

DensityOperator& DensityOperator::operator-=(const DensityOperator& o) {
  check_same_dim(*this, o);
  for (const auto& [k, c] : o.terms_) add_term(k.r, k.alpha, -c);
  return *this;
}

DensityOperator DensityOperator::scaled(const Scalar& c) const {
  return map_coefficients([&](const DiffPolynomial& p) { return p.scaled(c); });
}

DensityOperator DensityOperator::times(const DiffPolynomial& f) const {
  return map_coefficients([&](const DiffPolynomial& p) { return f * p; });
}

DensityOperator DensityOperator::weight_shifted(unsigned k) const {
  DensityOperator out(dim_);
  for (const auto& [key, c] : terms_) out.terms_.emplace(OpKey{key.r + k, key.alpha}, c);
  return out;
}

DensityOperator DensityOperator::map_coefficients(
    const std::function<DiffPolynomial(const DiffPolynomial&)>& f) const {
  DensityOperator out(dim_);
  for (const auto& [k, c] : terms_) out.add_term(k.r, k.alpha, f(c));
  return out;
}

void check_same_dim(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("operators of dimension " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

DensityOperator compose(const DensityOperator& a, const DensityOperator& b, const Derivation& d) {
  check_same_dim(a, b);
  DensityOperator out(a.dim());
  for (const auto& [kb, cb] : b.terms()) {
    DerivativeTable table(cb, d);
    for (const auto& [ka, ca] : a.terms()) {
      for_each_below(ka.alpha, [&](const MultiIndex& g) {
        const DiffPolynomial& dg = table.get(g);
        if (dg.is_zero()) return;
        const long binom = multi_binomial(ka.alpha, g);
        out.add_term(ka.r + kb.r, plus(minus(ka.alpha, g), kb.alpha), (ca * dg).scaled(Scalar(binom)));
      });
    }
  }
  return out;
}

DensityOperator adjoint(const DensityOperator& a) {
  DensityOperator out(a.dim());
  for (const auto& [k, f] : a.terms()) {
    const long sign = degree(k.alpha) % 2 ? -1 : 1;
    DerivativeTable table(f, {});
    for_each_below(k.alpha, [&](const MultiIndex& g) {
      const DiffPolynomial& dg = table.get(g);
      if (dg.is_zero()) return;
      const MultiIndex rest = minus(k.alpha, g);
      // (1 - L)^r = sum_j C(r, j) (-1)^j L^j
      long binom_r = 1;
      for (unsigned j = 0; j <= k.r; ++j) {
        const long coef = sign * multi_binomial(k.alpha, g) * binom_r * (j % 2 ? -1 : 1);
        out.add_term(j, rest, dg.scaled(Scalar(coef)));
        binom_r = binom_r * static_cast<long>(k.r - j) / static_cast<long>(j + 1);
      }
    });
  }
  return out;
}

DensityOperator restrict(const DensityOperator& a, const Scalar& lambda) {
  DensityOperator out(a.dim());
  for (const auto& [k, c] : a.terms()) out.add_term(0, k.alpha, c.scaled(lambda.pow(static_cast<int>(k.r))));
  return out;
}

Density apply(const DensityOperator& a, const Density& s) {
  Density out{DiffPolynomial(), s.weight};
  for (const auto& [k, c] : a.terms())
    out.coeff += (c * derive(s.coeff, k.alpha)).scaled(s.weight.pow(static_cast<int>(k.r)));
  return out;
}

DiffPolynomial value_on_one(const DensityOperator& a) { return a.coefficient(0, MultiIndex{}); }

DiffPolynomial divergence_flat(const VectorField& x) {
  DiffPolynomial div;
  for (std::size_t i = 0; i < x.size(); ++i) div += derive(x[i], static_cast<int>(i) + 1);
  return div;
}

DensityOperator lie_operator(const VectorField& x) {
  const int dim = static_cast<int>(x.size());
  DensityOperator out(dim);
  for (int i = 1; i <= dim; ++i) out.add_term(0, unit_index(i), x[static_cast<std::size_t>(i - 1)]);
  out.add_term(1, MultiIndex{}, divergence_flat(x));
  return out;
}

DensityOperator ad_vf(const VectorField& x, const DensityOperator& a) {
  if (static_cast<int>(x.size()) != a.dim()) throw DimensionMismatch("vector field dimension differs from operator");
  const DensityOperator l = lie_operator(x);
  return compose(l, a) - compose(a, l);
}

DensityOperator substitute_params(const DensityOperator& a, const std::map<std::uint32_t, Scalar>& bindings) {
  return a.map_coefficients([&](const DiffPolynomial& p) { return substitute_params(p, bindings); });
}

DensityOperator substitute_params(const DensityOperator& a, std::string_view name, const Scalar& value) {
  return substitute_params(a, {{ParamRegistry::instance().id(name), value}});
}

DensityOperator substitute(const DensityOperator& a, const JetRule& rule) {
  return a.map_coefficients([&](const DiffPolynomial& p) { return substitute(p, rule); });
}

// ---------------------------------------------------------------------------
// WeightPoly
// ---------------------------------------------------------------------------

void WeightPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

Scalar WeightPoly::eval(const Scalar& at) const {
  Scalar out;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) out = out * at + *it;
  return out;
}

WeightPoly WeightPoly::adjoint() const {
  const WeightPoly one_minus({Scalar(1), Scalar(-1)});
  WeightPoly out;
  WeightPoly power(1);
  for (const auto& c : coeffs_) {
    out = out + power * WeightPoly(c);
    power = power * one_minus;
  }
  return out;
}

WeightPoly operator+(const WeightPoly& a, const WeightPoly& b) {
  std::vector<Scalar> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
  for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
  return WeightPoly(std::move(c));
}

WeightPoly operator-(const WeightPoly& a, const WeightPoly& b) { return a + b * WeightPoly(-1); }

WeightPoly operator*(const WeightPoly& a, const WeightPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Scalar> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return WeightPoly(std::move(c));
}

WeightPoly WeightPoly::pow(unsigned e) const {
  WeightPoly out(1);
  for (unsigned k = 0; k < e; ++k) out = out * *this;
  return out;
}

DensityOperator WeightPoly::to_operator(int dim) const {
  DensityOperator out(dim);
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    out.add_term(static_cast<unsigned>(k), MultiIndex{}, DiffPolynomial(coeffs_[k]));
  return out;
}

std::string WeightPoly::to_string() const { return denslift::to_string(to_operator(1)); }

DensityOperator operator*(const WeightPoly& p, const DensityOperator& a) {
  DensityOperator out(a.dim());
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
    if (p.coeffs()[k].is_zero()) continue;
    out += a.weight_shifted(static_cast<unsigned>(k)).scaled(p.coeffs()[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string multi_index_string(const MultiIndex& alpha, int dim) {
  std::string out;
  for (int axis = 1; axis <= dim; ++axis)
    for (int k = 0; k < alpha[static_cast<std::size_t>(axis - 1)]; ++k) {
      if (!out.empty()) out += "*";
      out += "D" + std::to_string(axis);
    }
  return out;
}

std::string to_string(const DensityOperator& a) {
  if (a.is_zero()) return "0";
  std::vector<std::pair<OpKey, const DiffPolynomial*>> order;
  for (const auto& [k, c] : a.terms()) order.emplace_back(k, &c);
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    const int dx = degree(x.first.alpha), dy = degree(y.first.alpha);
    if (dx != dy) return dx > dy;
    if (x.first.alpha != y.first.alpha) return x.first.alpha > y.first.alpha;
    return x.first.r < y.first.r;
  });

  std::string out;
  for (const auto& [k, c] : order) {
    std::vector<std::string> factors;
    bool neg = false;
    std::string lpart;
    if (k.r == 1) lpart = "L";
    if (k.r > 1) lpart = "L^" + std::to_string(k.r);
    const std::string dpart = multi_index_string(k.alpha, a.dim());

    std::string body;
    if (k.r == 0 && degree(k.alpha) == 0) {
      // Pure function term: write the polynomial inline.
      // Only the leading sign moves out; the remaining terms keep theirs.
      std::string s = c->to_string();
      if (s[0] == '-') {
        neg = true;
        s.erase(0, 1);
      }
      body = s;
    } else if (c->size() == 1) {
      const auto& [m, coef] = *c->terms().begin();
      neg = coef.looks_negative();
      const Scalar mag = neg ? -coef : coef;
      if (!mag.is_one()) factors.push_back(mag.to_factor_string());
      if (!lpart.empty()) factors.push_back(lpart);
      if (!m.empty()) factors.push_back(denslift::to_string(m));
      if (!dpart.empty()) factors.push_back(dpart);
    } else {
      if (!lpart.empty()) factors.push_back(lpart);
      factors.push_back("(" + c->to_string() + ")");
      if (!dpart.empty()) factors.push_back(dpart);
    }
    if (body.empty()) {
      for (std::size_t i = 0; i < factors.size(); ++i) body += (i ? "*" : "") + factors[i];
      if (body.empty()) body = "1";
    }
    if (out.empty())
      out = neg ? "-" + body : body;
    else
      out += (neg ? " - " : " + ") + body;
  }
  return out;
}

}  // namespace denslift
