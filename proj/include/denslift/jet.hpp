// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "denslift/scalar.hpp"

namespace denslift {

inline constexpr int kMaxDim = 6;

/// Derivative multi-index: entry k counts derivatives along axis k+1.
using MultiIndex = std::array<std::uint8_t, kMaxDim>;

inline int degree(const MultiIndex& a) {
  int s = 0;
  for (auto v : a) s += v;
  return s;
}

inline MultiIndex unit_index(int axis) {
  MultiIndex m{};
  m.at(static_cast<std::size_t>(axis - 1)) = 1;
  return m;
}

class DiffPolynomial;
struct JetSymbol;

enum class SymbolKind {
  Generic,     // arbitrary smooth function, derivatives are fresh jets
  Coordinate,  // x[i]: derivative along axis j is the Kronecker delta
  Ruled,       // derivatives expand through a registered rule
};

struct SymbolInfo {
  std::string name;
  SymbolKind kind = SymbolKind::Generic;
  /// axis -> derivative of the bare symbol (only for Ruled symbols)
  std::map<int, std::shared_ptr<const DiffPolynomial>> rule;
};

/// One jet coordinate: a base symbol, its (sorted) upper indices and a
/// derivative multi-index.
struct JetSymbol {
  const SymbolInfo* info = nullptr;
  std::vector<std::uint8_t> upper;
  MultiIndex deriv{};

  const std::string& name() const { return info->name; }
  std::string to_string() const;
};

int compare(const JetSymbol& a, const JetSymbol& b);
inline bool operator<(const JetSymbol& a, const JetSymbol& b) { return compare(a, b) < 0; }
inline bool operator==(const JetSymbol& a, const JetSymbol& b) { return compare(a, b) == 0; }

/// Registry of jet base symbols. Built-ins: coordinate `x`, generic `y`,
/// generic `ell` (log of a volume form) and `w` with dw/dx = -w^2 y_,1_,1
/// (so that w = 1/y_,1).
class SymbolRegistry {
 public:
  using RuleBuilder = std::function<std::map<int, DiffPolynomial>(const JetSymbol& self)>;

  static SymbolRegistry& instance();

  /// Registers a new base symbol; throws DuplicateSymbol if it exists.
  const SymbolInfo* register_symbol(std::string_view name, const RuleBuilder& rule = {});
  /// Looks up a symbol, creating a generic one on first use.
  const SymbolInfo* symbol(std::string_view name);
  const SymbolInfo* find(std::string_view name) const;

 private:
  SymbolRegistry();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// A product of jet powers, sorted by symbol.
using JetMonomial = std::vector<std::pair<JetSymbol, std::uint32_t>>;

int compare(const JetMonomial& a, const JetMonomial& b);
struct JetMonomialLess {
  bool operator()(const JetMonomial& a, const JetMonomial& b) const { return compare(a, b) < 0; }
};

std::string to_string(const JetMonomial& m);

/// Polynomial in jet symbols with Scalar coefficients.
class DiffPolynomial {
 public:
  using TermMap = std::map<JetMonomial, Scalar, JetMonomialLess>;

  DiffPolynomial() = default;
  DiffPolynomial(const Scalar& c);      // NOLINT(google-explicit-constructor)
  DiffPolynomial(long c) : DiffPolynomial(Scalar(c)) {}  // NOLINT(google-explicit-constructor)
  DiffPolynomial(int c) : DiffPolynomial(Scalar(c)) {}   // NOLINT(google-explicit-constructor)
  explicit DiffPolynomial(const JetSymbol& s);
  DiffPolynomial(const JetMonomial& m, const Scalar& c);

  bool is_zero() const { return terms_.empty(); }
  bool is_scalar() const;
  Scalar scalar_value() const;  // constant term
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  std::uint32_t degree() const;

  DiffPolynomial operator-() const;
  DiffPolynomial& operator+=(const DiffPolynomial& o);
  DiffPolynomial& operator-=(const DiffPolynomial& o);
  DiffPolynomial& operator*=(const DiffPolynomial& o) { return *this = *this * o; }
  friend DiffPolynomial operator+(DiffPolynomial a, const DiffPolynomial& b) { return a += b; }
  friend DiffPolynomial operator-(DiffPolynomial a, const DiffPolynomial& b) { return a -= b; }
  friend DiffPolynomial operator*(const DiffPolynomial& a, const DiffPolynomial& b);
  DiffPolynomial scaled(const Scalar& c) const;
  DiffPolynomial pow(unsigned e) const;

  friend bool operator==(const DiffPolynomial& a, const DiffPolynomial& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const DiffPolynomial& a, const DiffPolynomial& b) { return !(a == b); }

  /// Applies `f` to every coefficient, dropping zeros.
  DiffPolynomial map_coefficients(const std::function<Scalar(const Scalar&)>& f) const;

  std::string to_string() const;
  /// Rendering usable as a left factor in a product.
  std::string to_factor_string() const;

 private:
  void add_term(const JetMonomial& m, const Scalar& c);
  TermMap terms_;
};

/// Jet of a registered (or auto-created generic) symbol, e.g.
/// jet("S", {1, 1}, {2}) is S[1,1]_,2.
DiffPolynomial jet(std::string_view name, std::vector<int> upper = {}, std::vector<int> derivs = {});
/// Coordinate function x[i].
DiffPolynomial coord(int i);
DiffPolynomial param(std::string_view name);

/// Total derivative along axis i (1-based).
DiffPolynomial derive(const DiffPolynomial& p, int axis);
DiffPolynomial derive(const DiffPolynomial& p, const MultiIndex& alpha);
/// Derivative of one bare jet along an axis.
DiffPolynomial derive(const JetSymbol& s, int axis);

DiffPolynomial substitute_params(const DiffPolynomial& p, const std::map<std::uint32_t, Scalar>& bindings);
DiffPolynomial substitute_params(const DiffPolynomial& p, std::string_view name, const Scalar& value);

/// Replaces jets for which `rule` returns a value; all other jets are kept.
using JetRule = std::function<std::optional<DiffPolynomial>(const JetSymbol&)>;
DiffPolynomial substitute(const DiffPolynomial& p, const JetRule& rule);

/// Cancels common powers of each (a, b) pair in every monomial, encoding
/// a*b = 1 (for example w and y_,1).
DiffPolynomial reduce_inverse_pairs(const DiffPolynomial& p,
                                    const std::vector<std::pair<JetSymbol, JetSymbol>>& pairs);

/// Bare jet symbol lookup helper (no derivative rules applied).
JetSymbol jet_symbol(std::string_view name, std::vector<int> upper = {}, MultiIndex deriv = {});

}  // namespace denslift
