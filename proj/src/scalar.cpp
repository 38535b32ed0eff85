// SPDX-License-Identifier: Apache-2.0
#include "denslift/scalar.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "denslift/errors.hpp"

namespace denslift {

// ---------------------------------------------------------------------------
// ParamRegistry
// ---------------------------------------------------------------------------

struct ParamRegistry::Impl {
  mutable std::shared_mutex mutex;
  std::deque<std::string> names;
  std::unordered_map<std::string, std::uint32_t> ids;
};

ParamRegistry& ParamRegistry::instance() {
  static ParamRegistry registry;
  return registry;
}

ParamRegistry::Impl& ParamRegistry::impl() const {
  static Impl state;
  return state;
}

std::uint32_t ParamRegistry::id(std::string_view name) {
  auto& st = impl();
  {
    std::shared_lock lock(st.mutex);
    if (auto it = st.ids.find(std::string(name)); it != st.ids.end()) return it->second;
  }
  std::unique_lock lock(st.mutex);
  if (auto it = st.ids.find(std::string(name)); it != st.ids.end()) return it->second;
  auto id = static_cast<std::uint32_t>(st.names.size());
  st.names.emplace_back(name);
  st.ids.emplace(std::string(name), id);
  return id;
}

std::optional<std::uint32_t> ParamRegistry::find(std::string_view name) const {
  auto& st = impl();
  std::shared_lock lock(st.mutex);
  if (auto it = st.ids.find(std::string(name)); it != st.ids.end()) return it->second;
  return std::nullopt;
}

std::string ParamRegistry::name(std::uint32_t id) const {
  auto& st = impl();
  std::shared_lock lock(st.mutex);
  return st.names.at(id);
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

int compare_lex(const ParamMonomial& a, const ParamMonomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].var == b[j].var) {
      if (a[i].exp != b[j].exp) return a[i].exp < b[j].exp ? -1 : 1;
      ++i;
      ++j;
    } else if (a[i].var < b[j].var) {
      return 1;
    } else {
      return -1;
    }
  }
  if (i < a.size()) return 1;
  if (j < b.size()) return -1;
  return 0;
}

namespace {

ParamMonomial multiply(const ParamMonomial& a, const ParamMonomial& b) {
  ParamMonomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].var < b[j].var)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].var < a[i].var) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].var, a[i].exp + b[j].exp});
      ++i;
      ++j;
    }
  }
  return out;
}

// a / b when b divides a.
std::optional<ParamMonomial> divide(const ParamMonomial& a, const ParamMonomial& b) {
  ParamMonomial out;
  std::size_t i = 0;
  for (const auto& p : b) {
    while (i < a.size() && a[i].var < p.var) out.push_back(a[i++]);
    if (i == a.size() || a[i].var != p.var || a[i].exp < p.exp) return std::nullopt;
    if (a[i].exp > p.exp) out.push_back({p.var, a[i].exp - p.exp});
    ++i;
  }
  while (i < a.size()) out.push_back(a[i++]);
  return out;
}

std::uint32_t exponent_of(const ParamMonomial& m, std::uint32_t var) {
  for (const auto& p : m)
    if (p.var == var) return p.exp;
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Poly
// ---------------------------------------------------------------------------

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.emplace_back(ParamMonomial{}, c);
}

Poly Poly::variable(std::uint32_t var, std::uint32_t exp) {
  if (exp == 0) return Poly(1);
  return Poly(std::vector<Term>{{ParamMonomial{{var, exp}}, Rational(1)}});
}

Poly Poly::from_map(std::map<ParamMonomial, Rational>& acc) {
  std::vector<Term> terms;
  for (auto& [m, c] : acc)
    if (c != 0) terms.emplace_back(m, c);
  std::sort(terms.begin(), terms.end(),
            [](const Term& x, const Term& y) { return compare_lex(x.first, y.first) > 0; });
  return Poly(std::move(terms));
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.empty()); }

Rational Poly::constant_value() const { return terms_.empty() ? Rational(0) : terms_[0].second; }

std::uint32_t Poly::degree_in(std::uint32_t var) const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, exponent_of(m, var));
  return d;
}

std::uint32_t Poly::total_degree() const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) {
    std::uint32_t s = 0;
    for (const auto& p : m) s += p.exp;
    d = std::max(d, s);
  }
  return d;
}

std::vector<std::uint32_t> Poly::variables() const {
  std::vector<std::uint32_t> vars;
  for (const auto& [m, c] : terms_)
    for (const auto& p : m) vars.push_back(p.var);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

std::vector<Poly> Poly::coefficients_in(std::uint32_t var) const {
  std::vector<std::map<ParamMonomial, Rational>> acc(degree_in(var) + 1);
  for (const auto& [m, c] : terms_) {
    ParamMonomial rest;
    std::uint32_t e = 0;
    for (const auto& p : m) {
      if (p.var == var)
        e = p.exp;
      else
        rest.push_back(p);
    }
    acc[e][rest] += c;
  }
  std::vector<Poly> out;
  out.reserve(acc.size());
  for (auto& a : acc) out.push_back(from_map(a));
  return out;
}

Poly Poly::from_coefficients(std::uint32_t var, const std::vector<Poly>& coeffs) {
  Poly out;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    if (!coeffs[k].is_zero()) out += coeffs[k] * variable(var, static_cast<std::uint32_t>(k));
  return out;
}

Poly Poly::operator-() const {
  Poly out = *this;
  for (auto& t : out.terms_) t.second = -t.second;
  return out;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.terms_.empty()) return *this;
  if (terms_.empty()) return *this = o;
  std::vector<Term> out;
  out.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() || j < o.terms_.size()) {
    int cmp = i == terms_.size()     ? -1
              : j == o.terms_.size() ? 1
                                     : compare_lex(terms_[i].first, o.terms_[j].first);
    if (cmp > 0) {
      out.push_back(std::move(terms_[i++]));
    } else if (cmp < 0) {
      out.push_back(o.terms_[j++]);
    } else {
      Rational c = terms_[i].second + o.terms_[j].second;
      if (c != 0) out.emplace_back(std::move(terms_[i].first), c);
      ++i;
      ++j;
    }
  }
  terms_ = std::move(out);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) { return *this += -o; }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.is_constant()) return b.scaled(a.constant_value());
  if (b.is_constant()) return a.scaled(b.constant_value());
  std::map<ParamMonomial, Rational> acc;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) acc[multiply(ma, mb)] += ca * cb;
  return Poly::from_map(acc);
}

Poly Poly::scaled(const Rational& c) const {
  if (c == 0) return {};
  Poly out = *this;
  for (auto& t : out.terms_) t.second *= c;
  return out;
}

Poly Poly::pow(unsigned e) const {
  Poly out(1);
  for (unsigned k = 0; k < e; ++k) out = out * *this;
  return out;
}

bool operator==(const Poly& a, const Poly& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].second != b.terms_[i].second) return false;
    if (!(a.terms_[i].first == b.terms_[i].first)) return false;
  }
  return true;
}

Poly Poly::divide_exact(const Poly& d) const {
  if (d.is_zero()) throw ZeroDenominator("polynomial division by zero");
  if (d.is_constant()) return scaled(1 / d.constant_value());
  Poly r = *this;
  Poly q;
  const auto& [lm, lc] = d.leading();
  while (!r.is_zero()) {
    const auto& [rm, rc] = r.leading();
    auto m = divide(rm, lm);
    if (!m) throw NotExact("inexact polynomial division");
    Poly t(std::vector<Term>{{*m, rc / lc}});
    q += t;
    r -= t * d;
  }
  return q;
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  return scaled(1 / leading().second);
}

namespace {

std::string rational_string(const Rational& c) { return c.get_str(); }

}  // namespace

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational a = abs(c);
    if (c < 0)
      out += "-";
    else if (!first)
      out += "+";
    first = false;
    std::string body;
    for (const auto& p : m) {
      if (!body.empty()) body += "*";
      body += ParamRegistry::instance().name(p.var);
      if (p.exp > 1) body += "^" + std::to_string(p.exp);
    }
    if (body.empty())
      out += rational_string(a);
    else if (a == 1)
      out += body;
    else
      out += rational_string(a) + "*" + body;
  }
  return out;
}

// ---------------------------------------------------------------------------
// gcd
// ---------------------------------------------------------------------------

namespace {

Poly content_in(const Poly& p, std::uint32_t var);

// Scales p to integer coefficients with gcd 1.
Poly integer_primitive(const Poly& p) {
  mpz_class l = 1, g = 0;
  for (const auto& [m, c] : p.terms()) {
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den().get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num().get_mpz_t());
  }
  if (g == 0) return p;
  return p.scaled(Rational(l) / Rational(g));
}

Poly primitive_part(const Poly& p, std::uint32_t var) {
  return integer_primitive(p.divide_exact(content_in(p, var)));
}

// Pseudo-remainder of a by b with respect to var, up to a nonzero factor.
Poly pseudo_remainder(Poly a, const Poly& b, std::uint32_t var) {
  const std::uint32_t db = b.degree_in(var);
  const Poly lcb = b.coefficients_in(var).back();
  while (!a.is_zero() && a.degree_in(var) >= db) {
    const std::uint32_t da = a.degree_in(var);
    const Poly lca = a.coefficients_in(var).back();
    a = integer_primitive(a * lcb - lca * Poly::variable(var, da - db) * b);
  }
  return a;
}

Poly gcd_impl(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(1);
  if (a.terms().size() == 1 && b.terms().size() == 1) {
    // gcd of two monomials
    const auto& ma = a.leading().first;
    const auto& mb = b.leading().first;
    ParamMonomial g;
    for (const auto& p : ma) {
      auto e = std::min(p.exp, exponent_of(mb, p.var));
      if (e > 0) g.push_back({p.var, e});
    }
    Poly out(1);
    for (const auto& p : g) out = out * Poly::variable(p.var, p.exp);
    return out;
  }
  auto va = a.variables();
  auto vb = b.variables();
  std::uint32_t var = std::min(va.front(), vb.front());
  if (!a.contains(var)) return gcd_impl(a, content_in(b, var));
  if (!b.contains(var)) return gcd_impl(content_in(a, var), b);

  Poly ca = content_in(a, var);
  Poly cb = content_in(b, var);
  Poly g = gcd_impl(ca, cb);
  Poly p = integer_primitive(a.divide_exact(ca));
  Poly q = integer_primitive(b.divide_exact(cb));
  if (p.degree_in(var) < q.degree_in(var)) std::swap(p, q);
  Poly result;
  while (true) {
    Poly r = pseudo_remainder(p, q, var);
    if (r.is_zero()) {
      result = q;
      break;
    }
    if (r.degree_in(var) == 0) {
      result = Poly(1);
      break;
    }
    p = std::move(q);
    q = primitive_part(r, var);
  }
  if (!result.is_constant()) result = primitive_part(result, var);
  return (result * g).monic();
}

Poly content_in(const Poly& p, std::uint32_t var) {
  Poly g;
  for (const auto& c : p.coefficients_in(var)) {
    if (c.is_zero()) continue;
    g = gcd_impl(g, c);
    if (g.is_constant()) return Poly(1);
  }
  return g.is_zero() ? Poly(1) : g.monic();
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) { return gcd_impl(a, b); }

// ---------------------------------------------------------------------------
// Scalar
// ---------------------------------------------------------------------------

Scalar::Scalar(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw ZeroDenominator("zero denominator");
  normalize();
}

Scalar Scalar::param(std::string_view name) {
  return Scalar(Poly::variable(ParamRegistry::instance().id(name)));
}

Scalar Scalar::parse_rational(std::string_view text) {
  std::string s(text);
  Rational q;
  if (q.set_str(s, 10) != 0) throw Error("not a rational number: " + s);
  if (q.get_den() == 0) throw ZeroDenominator("zero denominator in " + s);
  q.canonicalize();
  return Scalar(q);
}

void Scalar::normalize() {
  if (num_.is_zero()) {
    den_ = Poly(1);
    return;
  }
  if (den_.is_constant()) {
    const Rational d = den_.constant_value();
    if (d != 1) {
      num_ = num_.scaled(1 / d);
      den_ = Poly(1);
    }
    return;
  }
  if (!num_.is_constant()) {
    Poly g = gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = num_.divide_exact(g);
      den_ = den_.divide_exact(g);
    }
  }
  const Rational lc = den_.leading().second;
  if (lc != 1) {
    num_ = num_.scaled(1 / lc);
    den_ = den_.scaled(1 / lc);
  }
  if (den_.is_constant()) {
    num_ = num_.scaled(1 / den_.constant_value());
    den_ = Poly(1);
  }
}

bool Scalar::is_one() const { return den_.is_constant() && num_.is_constant() && num_.constant_value() == 1; }

Rational Scalar::rational_value() const {
  if (!is_rational()) throw Error("scalar is not a rational number: " + to_string());
  return num_.constant_value();
}

bool Scalar::looks_negative() const { return !num_.is_zero() && num_.leading().second < 0; }

Scalar Scalar::operator-() const {
  Scalar out = *this;
  out.num_ = -out.num_;
  return out;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (o.is_zero()) return *this;
  if (is_zero()) return *this = o;
  if (den_.is_constant() && o.den_.is_constant()) {
    num_ += o.num_;
    return *this;
  }
  if (den_ == o.den_) {
    num_ += o.num_;
  } else {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ = den_ * o.den_;
  }
  normalize();
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) { return *this += -o; }

Scalar& Scalar::operator*=(const Scalar& o) {
  if (is_zero() || o.is_zero()) return *this = Scalar();
  if (den_.is_constant() && o.den_.is_constant()) {
    num_ = num_ * o.num_;
    return *this;
  }
  Poly g1 = gcd(num_, o.den_);
  Poly g2 = gcd(o.num_, den_);
  num_ = num_.divide_exact(g1) * o.num_.divide_exact(g2);
  den_ = den_.divide_exact(g2) * o.den_.divide_exact(g1);
  normalize();
  return *this;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw ZeroDenominator("division by zero scalar");
  Scalar out;
  out.num_ = den_;
  out.den_ = num_;
  out.normalize();
  return out;
}

Scalar& Scalar::operator/=(const Scalar& o) { return *this *= o.inverse(); }

Scalar Scalar::pow(int e) const {
  if (e < 0) return inverse().pow(-e);
  Scalar out(1);
  for (int k = 0; k < e; ++k) out *= *this;
  return out;
}

namespace {

Scalar evaluate(const Poly& p, const std::map<std::uint32_t, Scalar>& bindings) {
  Scalar out;
  for (const auto& [m, c] : p.terms()) {
    Scalar t(c);
    for (const auto& pw : m) {
      auto it = bindings.find(pw.var);
      if (it != bindings.end())
        t *= it->second.pow(static_cast<int>(pw.exp));
      else
        t *= Scalar(Poly::variable(pw.var, pw.exp));
    }
    out += t;
  }
  return out;
}

}  // namespace

Scalar Scalar::substitute(std::uint32_t var, const Scalar& value) const {
  if (!depends_on(var)) return *this;
  return substitute(std::map<std::uint32_t, Scalar>{{var, value}});
}

Scalar Scalar::substitute(const std::map<std::uint32_t, Scalar>& bindings) const {
  bool touched = false;
  for (const auto& [v, s] : bindings) touched = touched || depends_on(v);
  if (!touched) return *this;
  Scalar n = evaluate(num_, bindings);
  Scalar d = evaluate(den_, bindings);
  if (d.is_zero()) throw ZeroDenominator("substitution makes a denominator vanish");
  return n / d;
}

Scalar Scalar::coefficient(std::uint32_t var, std::uint32_t k) const {
  if (den_.contains(var)) throw NotExact("parameter occurs in a denominator");
  auto cs = num_.coefficients_in(var);
  if (k >= cs.size()) return Scalar();
  return Scalar(cs[k], den_);
}

std::uint32_t Scalar::degree_in(std::uint32_t var) const {
  if (den_.contains(var)) throw NotExact("parameter occurs in a denominator");
  return num_.degree_in(var);
}

std::string Scalar::to_string() const {
  if (den_.is_constant()) return num_.to_string();
  // Scale the denominator to a primitive integer polynomial for display.
  mpz_class l = 1, g = 0;
  for (const auto& [m, c] : den_.terms()) {
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den().get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num().get_mpz_t());
  }
  const Rational scale = Rational(l) / Rational(g);
  auto wrap = [](const Poly& p) {
    return p.terms().size() > 1 ? "(" + p.to_string() + ")" : p.to_string();
  };
  return wrap(num_.scaled(scale)) + "/" + wrap(den_.scaled(scale));
}

std::string Scalar::to_factor_string() const {
  if (den_.is_constant() && num_.terms().size() <= 1) return to_string();
  return "(" + to_string() + ")";
}

Rational binomial(const Rational& top, unsigned k) {
  Rational out(1);
  for (unsigned j = 0; j < k; ++j) out *= (top - j) / Rational(j + 1);
  return out;
}

}  // namespace denslift
