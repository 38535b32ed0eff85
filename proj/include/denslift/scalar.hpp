// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace denslift {

using Rational = mpq_class;

/// Append-only table of formal scalar parameters (l0, b, c1, k1, kappa, ...).
/// Identifiers are dense and assigned in registration order. Reads are safe
/// from any thread; registration takes an exclusive lock.
class ParamRegistry {
 public:
  static ParamRegistry& instance();

  /// Identifier of `name`, registering it on first use.
  std::uint32_t id(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  std::string name(std::uint32_t id) const;

 private:
  ParamRegistry() = default;
  struct Impl;
  Impl& impl() const;
};

struct ParamPower {
  std::uint32_t var;
  std::uint32_t exp;
  friend auto operator<=>(const ParamPower&, const ParamPower&) = default;
};

/// Sparse exponent vector, sorted by parameter id, no zero exponents.
using ParamMonomial = std::vector<ParamPower>;

/// Lexicographic comparison (smaller parameter ids are more significant).
/// Returns <0, 0 or >0.
int compare_lex(const ParamMonomial& a, const ParamMonomial& b);

/// Multivariate polynomial over the rationals in the formal parameters.
/// Terms are kept sorted by decreasing lexicographic monomial order, so the
/// first term is the leading term.
class Poly {
 public:
  using Term = std::pair<ParamMonomial, Rational>;

  Poly() = default;
  Poly(const Rational& c);  // NOLINT(google-explicit-constructor)
  Poly(long c) : Poly(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  static Poly variable(std::uint32_t var, std::uint32_t exp = 1);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()
  const std::vector<Term>& terms() const { return terms_; }
  const Term& leading() const { return terms_.front(); }

  std::uint32_t degree_in(std::uint32_t var) const;
  std::uint32_t total_degree() const;
  bool contains(std::uint32_t var) const { return degree_in(var) > 0; }
  std::vector<std::uint32_t> variables() const;

  /// Coefficients of `var`^k for k = 0..degree, as polynomials in the rest.
  std::vector<Poly> coefficients_in(std::uint32_t var) const;
  static Poly from_coefficients(std::uint32_t var, const std::vector<Poly>& coeffs);

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rational& c) const;
  Poly pow(unsigned e) const;

  friend bool operator==(const Poly&, const Poly&);

  /// Exact division; throws NotExact when `d` does not divide `*this`.
  Poly divide_exact(const Poly& d) const;
  /// Scales so that the leading coefficient is 1 (zero stays zero).
  Poly monic() const;

  std::string to_string() const;

 private:
  explicit Poly(std::vector<Term> terms) : terms_(std::move(terms)) {}
  static Poly from_map(std::map<ParamMonomial, Rational>& acc);
  std::vector<Term> terms_;
};

/// Greatest common divisor over Q, normalized to leading coefficient 1.
Poly gcd(const Poly& a, const Poly& b);

/// Element of the field Q(params): a reduced ratio of polynomials with a
/// monic denominator, so equality is structural.
class Scalar {
 public:
  Scalar() : num_(), den_(1) {}
  Scalar(const Rational& c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
  Scalar(long c) : num_(c), den_(1) {}             // NOLINT(google-explicit-constructor)
  Scalar(int c) : num_(long{c}), den_(1) {}        // NOLINT(google-explicit-constructor)
  Scalar(const Poly& p) : num_(p), den_(1) {}      // NOLINT(google-explicit-constructor)
  Scalar(Poly num, Poly den);

  static Scalar param(std::string_view name);
  static Scalar rational(long p, long q) { return Scalar(Rational(p, q)); }
  /// Parses "p", "p/q" or "-p/q".
  static Scalar parse_rational(std::string_view text);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const;
  bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
  bool is_polynomial() const { return den_.is_constant(); }
  Rational rational_value() const;  // requires is_rational()
  bool depends_on(std::uint32_t var) const { return num_.contains(var) || den_.contains(var); }
  /// True when the leading numerator coefficient is negative.
  bool looks_negative() const;

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  Scalar inverse() const;
  Scalar pow(int e) const;

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  /// Replaces `var` by `value`; throws ZeroDenominator if the denominator
  /// vanishes identically.
  Scalar substitute(std::uint32_t var, const Scalar& value) const;
  Scalar substitute(const std::map<std::uint32_t, Scalar>& bindings) const;

  /// Coefficient of var^k, viewing the scalar as a polynomial in `var`
  /// over the remaining field. Throws NotExact if `var` is in the
  /// denominator.
  Scalar coefficient(std::uint32_t var, std::uint32_t k) const;
  std::uint32_t degree_in(std::uint32_t var) const;

  std::string to_string() const;
  /// Rendering usable as a factor inside a product ("3/2", "l0", "(2*l0-1)").
  std::string to_factor_string() const;

 private:
  void normalize();
  Poly num_;
  Poly den_;
};

Rational binomial(const Rational& top, unsigned k);

}  // namespace denslift
