// SPDX-License-Identifier: Apache-2.0
#include "denslift/jet.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "denslift/errors.hpp"

namespace denslift {

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

int compare(const JetSymbol& a, const JetSymbol& b) {
  if (a.info != b.info) {
    int c = a.info->name.compare(b.info->name);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  if (a.upper != b.upper) return a.upper < b.upper ? -1 : 1;
  if (a.deriv != b.deriv) return a.deriv < b.deriv ? -1 : 1;
  return 0;
}

std::string JetSymbol::to_string() const {
  std::string out = info->name;
  if (!upper.empty()) {
    out += "[";
    for (std::size_t k = 0; k < upper.size(); ++k) {
      if (k) out += ",";
      out += std::to_string(upper[k]);
    }
    out += "]";
  }
  for (int axis = 0; axis < kMaxDim; ++axis)
    for (int k = 0; k < deriv[static_cast<std::size_t>(axis)]; ++k) out += "_," + std::to_string(axis + 1);
  return out;
}

struct SymbolRegistry::Impl {
  mutable std::shared_mutex mutex;
  std::deque<SymbolInfo> infos;
  std::unordered_map<std::string, SymbolInfo*> by_name;

  SymbolInfo* add(std::string_view name, SymbolKind kind) {
    infos.push_back(SymbolInfo{std::string(name), kind, {}});
    SymbolInfo* info = &infos.back();
    by_name.emplace(info->name, info);
    return info;
  }
};

SymbolRegistry::SymbolRegistry() : impl_(std::make_unique<Impl>()) {
  impl_->add("x", SymbolKind::Coordinate);
  SymbolInfo* y = impl_->add("y", SymbolKind::Generic);
  impl_->add("ell", SymbolKind::Generic);
  SymbolInfo* w = impl_->add("w", SymbolKind::Ruled);
  JetSymbol ws{w, {}, {}};
  JetSymbol y2{y, {}, {}};
  y2.deriv[0] = 2;
  w->rule.emplace(1, std::make_shared<DiffPolynomial>(JetMonomial{{ws, 2}, {y2, 1}}, Scalar(-1)));
}

SymbolRegistry& SymbolRegistry::instance() {
  static SymbolRegistry registry;
  return registry;
}

const SymbolInfo* SymbolRegistry::register_symbol(std::string_view name, const RuleBuilder& rule) {
  SymbolInfo* info = nullptr;
  {
    std::unique_lock lock(impl_->mutex);
    if (impl_->by_name.count(std::string(name)))
      throw DuplicateSymbol("symbol already registered: " + std::string(name));
    info = impl_->add(name, rule ? SymbolKind::Ruled : SymbolKind::Generic);
  }
  if (rule) {
    for (auto& [axis, poly] : rule(JetSymbol{info, {}, {}})) {
      if (axis < 1 || axis > kMaxDim) throw IndexOutOfRange("rule axis out of range");
      info->rule.emplace(axis, std::make_shared<DiffPolynomial>(poly));
    }
  }
  return info;
}

const SymbolInfo* SymbolRegistry::find(std::string_view name) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->by_name.find(std::string(name));
  return it == impl_->by_name.end() ? nullptr : it->second;
}

const SymbolInfo* SymbolRegistry::symbol(std::string_view name) {
  if (const SymbolInfo* info = find(name)) return info;
  std::unique_lock lock(impl_->mutex);
  auto it = impl_->by_name.find(std::string(name));
  if (it != impl_->by_name.end()) return it->second;
  return impl_->add(name, SymbolKind::Generic);
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

int compare(const JetMonomial& a, const JetMonomial& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    int c = compare(a[k].first, b[k].first);
    if (c != 0) return c;
    if (a[k].second != b[k].second) return a[k].second < b[k].second ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

std::string to_string(const JetMonomial& m) {
  std::string out;
  for (const auto& [s, e] : m) {
    if (!out.empty()) out += "*";
    out += s.to_string();
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out;
}

namespace {

JetMonomial multiply(const JetMonomial& a, const JetMonomial& b) {
  JetMonomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c = i == a.size() ? 1 : j == b.size() ? -1 : compare(a[i].first, b[j].first);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiffPolynomial
// ---------------------------------------------------------------------------

DiffPolynomial::DiffPolynomial(const Scalar& c) {
  if (!c.is_zero()) terms_.emplace(JetMonomial{}, c);
}

DiffPolynomial::DiffPolynomial(const JetSymbol& s) { terms_.emplace(JetMonomial{{s, 1}}, Scalar(1)); }

DiffPolynomial::DiffPolynomial(const JetMonomial& m, const Scalar& c) {
  if (!c.is_zero()) terms_.emplace(m, c);
}

bool DiffPolynomial::is_scalar() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Scalar DiffPolynomial::scalar_value() const {
  auto it = terms_.find(JetMonomial{});
  return it == terms_.end() ? Scalar() : it->second;
}

std::uint32_t DiffPolynomial::degree() const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) {
    std::uint32_t s = 0;
    for (const auto& f : m) s += f.second;
    d = std::max(d, s);
  }
  return d;
}

void DiffPolynomial::add_term(const JetMonomial& m, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffPolynomial DiffPolynomial::operator-() const {
  DiffPolynomial out = *this;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

DiffPolynomial& DiffPolynomial::operator+=(const DiffPolynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

DiffPolynomial& DiffPolynomial::operator-=(const DiffPolynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

DiffPolynomial operator*(const DiffPolynomial& a, const DiffPolynomial& b) {
  DiffPolynomial out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) out.add_term(multiply(ma, mb), ca * cb);
  return out;
}

DiffPolynomial DiffPolynomial::scaled(const Scalar& c) const {
  if (c.is_zero()) return {};
  if (c.is_one()) return *this;
  DiffPolynomial out = *this;
  for (auto& [m, v] : out.terms_) v *= c;
  return out;
}

DiffPolynomial DiffPolynomial::pow(unsigned e) const {
  DiffPolynomial out(1);
  for (unsigned k = 0; k < e; ++k) out = out * *this;
  return out;
}

DiffPolynomial DiffPolynomial::map_coefficients(const std::function<Scalar(const Scalar&)>& f) const {
  DiffPolynomial out;
  for (const auto& [m, c] : terms_) out.add_term(m, f(c));
  return out;
}

std::string DiffPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    const bool neg = c.looks_negative();
    const Scalar mag = neg ? -c : c;
    std::string body;
    if (m.empty())
      body = terms_.size() == 1 && !neg ? mag.to_string() : mag.to_factor_string();
    else if (mag.is_one())
      body = denslift::to_string(m);
    else
      body = mag.to_factor_string() + "*" + denslift::to_string(m);
    if (first)
      out = neg ? "-" + body : body;
    else
      out += (neg ? " - " : " + ") + body;
    first = false;
  }
  return out;
}

std::string DiffPolynomial::to_factor_string() const {
  if (terms_.size() == 1) {
    const auto& [m, c] = *terms_.begin();
    if (m.empty()) return c.to_factor_string();
    if (!c.looks_negative()) return to_string();
  }
  return "(" + to_string() + ")";
}

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

JetSymbol jet_symbol(std::string_view name, std::vector<int> upper, MultiIndex deriv) {
  JetSymbol s;
  s.info = SymbolRegistry::instance().symbol(name);
  for (int u : upper) {
    if (u < 1 || u > kMaxDim) throw IndexOutOfRange("upper index out of range: " + std::to_string(u));
    s.upper.push_back(static_cast<std::uint8_t>(u));
  }
  std::sort(s.upper.begin(), s.upper.end());
  s.deriv = deriv;
  return s;
}

DiffPolynomial jet(std::string_view name, std::vector<int> upper, std::vector<int> derivs) {
  DiffPolynomial p(jet_symbol(name, std::move(upper)));
  for (int axis : derivs) p = derive(p, axis);
  return p;
}

DiffPolynomial coord(int i) {
  JetSymbol s;
  s.info = SymbolRegistry::instance().symbol("x");
  if (i < 1 || i > kMaxDim) throw IndexOutOfRange("coordinate index out of range");
  s.upper.push_back(static_cast<std::uint8_t>(i));
  return DiffPolynomial(s);
}

DiffPolynomial param(std::string_view name) { return DiffPolynomial(Scalar::param(name)); }

// ---------------------------------------------------------------------------
// Derivatives and substitutions
// ---------------------------------------------------------------------------

DiffPolynomial derive(const JetSymbol& s, int axis) {
  if (axis < 1 || axis > kMaxDim) throw IndexOutOfRange("axis out of range: " + std::to_string(axis));
  switch (s.info->kind) {
    case SymbolKind::Coordinate:
      return (!s.upper.empty() && s.upper[0] == axis) ? DiffPolynomial(1) : DiffPolynomial();
    case SymbolKind::Ruled: {
      auto it = s.info->rule.find(axis);
      if (it != s.info->rule.end() && degree(s.deriv) == 0) return *it->second;
      break;
    }
    case SymbolKind::Generic:
      break;
  }
  JetSymbol t = s;
  ++t.deriv[static_cast<std::size_t>(axis - 1)];
  return DiffPolynomial(t);
}

DiffPolynomial derive(const DiffPolynomial& p, int axis) {
  DiffPolynomial out;
  for (const auto& [m, c] : p.terms()) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      DiffPolynomial dk = derive(m[k].first, axis);
      if (dk.is_zero()) continue;
      JetMonomial rest = m;
      Scalar coef = c;
      if (rest[k].second == 1) {
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        coef *= Scalar(static_cast<long>(rest[k].second));
        --rest[k].second;
      }
      out += DiffPolynomial(rest, coef) * dk;
    }
  }
  return out;
}

DiffPolynomial derive(const DiffPolynomial& p, const MultiIndex& alpha) {
  DiffPolynomial out = p;
  for (int axis = 1; axis <= kMaxDim; ++axis)
    for (int k = 0; k < alpha[static_cast<std::size_t>(axis - 1)]; ++k) out = derive(out, axis);
  return out;
}

DiffPolynomial substitute_params(const DiffPolynomial& p, const std::map<std::uint32_t, Scalar>& bindings) {
  return p.map_coefficients([&](const Scalar& c) { return c.substitute(bindings); });
}

DiffPolynomial substitute_params(const DiffPolynomial& p, std::string_view name, const Scalar& value) {
  return substitute_params(p, {{ParamRegistry::instance().id(name), value}});
}

DiffPolynomial substitute(const DiffPolynomial& p, const JetRule& rule) {
  std::map<JetSymbol, std::optional<DiffPolynomial>> cache;
  DiffPolynomial out;
  for (const auto& [m, c] : p.terms()) {
    JetMonomial kept;
    DiffPolynomial replaced(c);
    for (const auto& [s, e] : m) {
      auto it = cache.find(s);
      if (it == cache.end()) it = cache.emplace(s, rule(s)).first;
      if (it->second)
        replaced = replaced * it->second->pow(e);
      else
        kept.emplace_back(s, e);
    }
    out += replaced * DiffPolynomial(kept, Scalar(1));
  }
  return out;
}

DiffPolynomial reduce_inverse_pairs(const DiffPolynomial& p,
                                    const std::vector<std::pair<JetSymbol, JetSymbol>>& pairs) {
  DiffPolynomial out;
  for (const auto& [m, c] : p.terms()) {
    JetMonomial r = m;
    for (const auto& [a, b] : pairs) {
      auto ia = std::find_if(r.begin(), r.end(), [&](const auto& f) { return f.first == a; });
      auto ib = std::find_if(r.begin(), r.end(), [&](const auto& f) { return f.first == b; });
      if (ia == r.end() || ib == r.end()) continue;
      const std::uint32_t k = std::min(ia->second, ib->second);
      ia->second -= k;
      ib->second -= k;
      r.erase(std::remove_if(r.begin(), r.end(), [](const auto& f) { return f.second == 0; }), r.end());
    }
    out += DiffPolynomial(r, c);
  }
  return out;
}

}  // namespace denslift
