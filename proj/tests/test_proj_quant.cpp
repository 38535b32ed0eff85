// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "denslift/errors.hpp"
#include "denslift/lift_core.hpp"
#include "denslift/proj_quant.hpp"
#include "test_support.hpp"

using namespace denslift;
using namespace denslift::testing;

namespace {

const Scalar lam = Scalar::param("lam");
const Scalar l0 = Scalar::param("l0");

DensityOperator fn(const DiffPolynomial& f, int dim = 1) { return DensityOperator::multiplication(dim, f); }

MultiIndex xi(int power) {
  MultiIndex m{};
  m[0] = static_cast<std::uint8_t>(power);
  return m;
}

DensityOperator d1(const DiffPolynomial& c, int power) { return DensityOperator::term(1, 0, xi(power), c); }

DiffPolynomial dx(const std::string& name, int k = 1) {
  return jet(name, {}, std::vector<int>(static_cast<std::size_t>(k), 1));
}

SymbolPoly symbol1(std::initializer_list<std::pair<int, DiffPolynomial>> terms) {
  SymbolPoly out(1);
  for (const auto& [k, c] : terms) out.add_term(xi(k), c);
  return out;
}

// lambda(lambda - 1) - l0(l0 - 1)
WeightPoly quadratic_shift(const Scalar& lambda0) {
  const WeightPoly l({Scalar(0), Scalar(1)});
  return l * (l - WeightPoly(1)) - WeightPoly(lambda0 * (lambda0 - Scalar(1)));
}

}  // namespace

TEST_CASE("projective generators") {
  const auto g1 = proj_generators(1);
  REQUIRE(g1.size() == 3);
  CHECK(g1[0][0] == DiffPolynomial(1));
  CHECK(g1[1][0] == coord(1));
  CHECK(g1[2][0] == coord(1) * coord(1));
  const auto g2 = proj_generators(2);
  CHECK(g2.size() == 8);
  CHECK(g2[6][0] == coord(1) * coord(1));
  CHECK(g2[6][1] == coord(1) * coord(2));
  CHECK(proj_generators(3).size() == 15);
}

TEST_CASE("symbol coefficients") {
  CHECK(symbol_coeff(2, 1, lam, 1) == -(Scalar(2) * lam + Scalar(1)) / Scalar(2));
  CHECK(symbol_coeff(2, 2, lam, 1) == lam * (Scalar(2) * lam + Scalar(1)) / Scalar(3));
  for (int n = 0; n <= 5; ++n) CHECK(symbol_coeff(n, 0, lam, 2).is_one());
  CHECK_THROWS_AS(symbol_coeff(2, 3, lam, 1), IndexOutOfRange);
}

TEST_CASE("full symbol and quantization in one dimension") {
  const DiffPolynomial a = jet("a"), b = jet("b");
  const Scalar two_l_plus_1 = Scalar(2) * lam + Scalar(1);

  CHECK(full_symbol(d1(a, 2), lam) ==
        symbol1({{2, a}, {1, dx("a").scaled(-two_l_plus_1 / Scalar(2))}, {0, dx("a", 2).scaled(lam * two_l_plus_1 / Scalar(3))}}));
  CHECK(full_symbol(d1(b, 1), lam) == symbol1({{1, b}, {0, dx("b").scaled(-lam)}}));
  CHECK(full_symbol(fn(jet("R")), lam) == symbol1({{0, jet("R")}}));

  CHECK(quantize(symbol1({{2, a}}), lam) ==
        d1(a, 2) + d1(dx("a").scaled(two_l_plus_1 / Scalar(2)), 1) + fn(dx("a", 2).scaled(lam * two_l_plus_1 / Scalar(6))));
  CHECK(quantize(symbol1({{1, b}}), lam) == d1(b, 1) + fn(dx("b").scaled(lam)));

  CHECK(to_string(full_symbol(d1(b, 1), Scalar(2))) == "b*xi - 2*b_,1");
  CHECK_THROWS_AS(full_symbol(DensityOperator::weight(1), lam), HasWeightOperator);
}

TEST_CASE("symbol and quantization are mutually inverse") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 16; ++trial) {
    const int dim = 1 + trial % 2;
    const DensityOperator op = random_operator(rng, dim, 4, false, 4);
    CHECK(quantize(full_symbol(op, lam), lam) == op);
    const SymbolPoly s = full_symbol(random_operator(rng, dim, 4, false, 3), Scalar(7));
    CHECK(full_symbol(quantize(s, lam), lam) == s);
  }
  const DensityOperator generic = generic_operator(2, 3);
  CHECK(quantize(full_symbol(generic, lam), lam) == generic);
}

TEST_CASE("projective equivariance of the symbol map") {
  for (int dim = 1; dim <= 2; ++dim) {
    const DensityOperator op = generic_operator(dim, 3);
    for (const auto& x : proj_generators(dim)) CHECK(proj_equivariance_defect(op, lam, x).is_zero());
  }
  // a non-projective field breaks it
  const VectorField cubic{coord(1) * coord(1) * coord(1)};
  CHECK_FALSE(proj_equivariance_defect(generic_operator(1, 2), lam, cubic).is_zero());
}

TEST_CASE("projective lift") {
  const DiffPolynomial a = jet("a");
  const WeightPoly L({Scalar(0), Scalar(1)});
  // the leading piece of the decomposition lifts to Q_L(a xi^2)
  SymbolPoly top(1);
  top.add_term(xi(2), a);
  CHECK(quantize(top, l0) == proj_decompose(d1(a, 2), l0)[0]);
  const DensityOperator h0 = proj_lift(quantize(top, l0), l0);
  const DensityOperator expected = d1(a, 2) +
                                   WeightPoly({Scalar::rational(1, 2), Scalar(1)}) * d1(dx("a"), 1) +
                                   (L * WeightPoly({Scalar::rational(1, 6), Scalar::rational(1, 3)})) * fn(dx("a", 2));
  CHECK(h0 == expected);
  CHECK(proj_lift(fn(jet("f")), l0) == fn(jet("f")));

  std::mt19937 rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    const int dim = 1 + trial % 2;
    const DensityOperator op = random_operator(rng, dim, 3, false, 3);
    if (op.is_zero()) continue;
    const DensityOperator h = proj_lift(op, l0);
    CHECK(restrict(h, l0) == op);
    CHECK(h.total_order() == op.total_order());
    // the formal route: quantize with a formal weight and promote it to L
    CHECK(weight_from_param(quantize(full_symbol(op, l0), lam), "lam") == h);
  }
}

TEST_CASE("projective decomposition") {
  const DiffPolynomial a = jet("a"), b = jet("b"), c = jet("c");
  const DensityOperator op = d1(a, 2) + d1(b, 1) + fn(c);
  const auto parts = proj_decompose(op, l0);
  REQUIRE(parts.size() == 3);
  const Scalar h = (Scalar(2) * l0 + Scalar(1)) / Scalar(2);
  CHECK(parts[0] == d1(a, 2) + d1(dx("a").scaled(h), 1) + fn(dx("a", 2).scaled(l0 * h / Scalar(3))));
  CHECK(parts[1] == d1(b - dx("a").scaled(h), 1) + fn((dx("b") - dx("a", 2).scaled(h)).scaled(l0)));
  CHECK(parts[2] == fn(c - dx("b").scaled(l0) + dx("a", 2).scaled(l0 * (Scalar(2) * l0 + Scalar(1)) / Scalar(3))));
  CHECK(parts[0] + parts[1] + parts[2] == op);

  const DensityOperator generic = generic_operator(2, 3);
  const auto gparts = proj_decompose(generic, l0);
  DensityOperator sum(2);
  for (std::size_t i = 0; i < gparts.size(); ++i) {
    sum += gparts[i];
    if (!gparts[i].is_zero()) CHECK(gparts[i].x_order() == 3 - static_cast<int>(i));
  }
  CHECK(sum == generic);
}

TEST_CASE("regular projective liftings") {
  const DensityOperator op = d1(jet("a"), 2) + d1(jet("b"), 1) + fn(jet("c"));
  CHECK(proj_regular_lift(op, l0, {}) == proj_lift(op, l0));
  CHECK(proj_regular_lift(op, l0, {WeightPoly(1), WeightPoly(1), WeightPoly(1)}) == proj_lift(op, l0));

  const WeightPoly t = WeightPoly::shifted(l0);
  const Scalar k1 = Scalar::param("k1"), k2 = Scalar::param("k2"), k3 = Scalar::param("k3");
  const std::vector<WeightPoly> plane{WeightPoly(1), WeightPoly(1) + WeightPoly(k1) * t,
                                      WeightPoly(1) + WeightPoly(k2) * t + WeightPoly(k3) * t.pow(2)};
  const DensityOperator h = proj_regular_lift(op, l0, plane);
  CHECK(restrict(h, l0) == op);
  CHECK(h.total_order() == 2);

  CHECK_THROWS_AS(proj_regular_lift(op, l0, {WeightPoly(1), t.pow(2) + WeightPoly(1)}), BadPolynomial);
  CHECK_THROWS_AS(proj_regular_lift(op, l0, {WeightPoly(1), WeightPoly(2)}), BadPolynomial);
}

TEST_CASE("self-adjoint projective polynomials") {
  const Scalar k = Scalar::param("k");
  const auto p2 = proj_sa_polynomials(2, l0, {{k}}, {});
  REQUIRE(p2.size() == 3);
  CHECK(p2[2] == WeightPoly(1) + WeightPoly(k) * quadratic_shift(l0));
  CHECK(p2[1] == WeightPoly({Scalar(-1), Scalar(2)}) * WeightPoly((Scalar(2) * l0 - Scalar(1)).inverse()));
  CHECK(p2[1].adjoint() == WeightPoly(-1) * p2[1]);

  for (int n = 0; n <= 5; ++n) {
    const auto ps = proj_sa_polynomials(n, l0);
    REQUIRE(ps.size() == static_cast<std::size_t>(n + 1));
    for (int m = 0; m <= n; ++m) {
      const WeightPoly& p = ps[static_cast<std::size_t>(m)];
      CHECK(p.adjoint() == WeightPoly(m % 2 ? -1 : 1) * p);
      CHECK(p.eval(l0).is_one());
      CHECK(p.degree() <= m);
    }
    const int p = n % 2;
    CHECK(proj_sa_parameter_count(n) * 4 == n * n - p);
  }
  CHECK_THROWS_AS(proj_sa_polynomials(2, Scalar::rational(1, 2)), ExceptionalWeight);

  // self-adjoint projective liftings really are (anti-)self-adjoint
  for (int n = 1; n <= 3; ++n) {
    const DensityOperator op = generic_operator(1, n);
    const DensityOperator h = proj_regular_lift(op, l0, proj_sa_polynomials(n, l0));
    CHECK((n % 2 ? adjoint(h) + h : adjoint(h) - h).is_zero());
  }
}

TEST_CASE("Schwarzian data and the line of self-adjoint liftings") {
  const DiffPolynomial a = jet("a"), b = jet("b"), c = jet("c");
  CHECK(schwarzian_data(d1(DiffPolynomial(1), 2), l0).is_zero());
  const DensityOperator first = d1(b, 1) + fn(c);
  const Scalar inv = (Scalar(2) * l0 - Scalar(1)).inverse();
  const DiffPolynomial gamma = b.scaled(inv);
  const DiffPolynomial theta = (c - dx("b").scaled(l0 * inv)).scaled((l0 * (l0 - Scalar(1))).inverse());
  CHECK(schwarzian_data(first, l0) == theta - derive(gamma, 1).scaled(Scalar(2)));

  const DensityOperator op = d1(a, 2) + d1(b, 1) + fn(c);
  const Scalar k = Scalar::param("k");
  const DensityOperator line = proj_regular_lift(op, l0, proj_sa_polynomials(2, l0, {{k}}, {}));
  const Scalar kappa = l0 * (l0 - Scalar(1)) * k - Scalar(1);
  const DensityOperator diff = line - second_order_canonical_lift(op, l0);
  CHECK(diff == (WeightPoly(kappa) * quadratic_shift(l0)) * fn(schwarzian_data(op, l0)));

  CHECK_THROWS_AS(schwarzian_data(generic_operator(2, 2), l0), DimensionNotOne);
  CHECK_THROWS_AS(schwarzian_data(op, Scalar(0)), ExceptionalWeight);
}

TEST_CASE("one-dimensional coordinate changes") {
  const DensityOperator op = d1(jet("a"), 2) + d1(jet("b"), 1).weight_shifted(1) + fn(jet("c"));
  CHECK(coordinate_change_1d(op, DiffeoJet1D::identity()) == op);
  CHECK(coordinate_change_1d(DensityOperator::partial(1, 1), DiffeoJet1D::scaling(Scalar(2))) ==
        DensityOperator::partial(1, 1).scaled(Scalar(2)));

  // Lie derivatives transform as Lie derivatives of the transported field
  const DiffeoJet1D phi = DiffeoJet1D::generic();
  const DiffPolynomial x = jet("X");
  const DensityOperator moved = coordinate_change_1d(lie_operator({x}), phi);
  const DiffPolynomial x_new = x * phi.y_jet(1);
  const DensityOperator expected = DensityOperator::term(1, 0, unit_index(1), x_new) +
                                   DensityOperator::term(1, 1, {}, phi.dy()(x_new, 1));
  CHECK(moved == phi.finish(expected));

  // composition in the new chart matches the transported composition
  const DensityOperator p = d1(jet("f"), 1), q = d1(jet("g"), 2) + fn(jet("h"));
  CHECK(coordinate_change_1d(compose(p, q), phi) ==
        phi.finish(compose(coordinate_change_1d(p, phi), coordinate_change_1d(q, phi), phi.dy())));
  CHECK_THROWS_AS(coordinate_change_1d(generic_operator(2, 1), phi), DimensionNotOne);
}

TEST_CASE("Schwarzian cocycle") {
  const DensityOperator op = d1(jet("a"), 2) + d1(jet("b"), 1) + fn(jet("c"));
  const DiffeoJet1D generic = DiffeoJet1D::generic();
  const DiffeoJet1D moebius = DiffeoJet1D::moebius();
  CHECK(moebius.finish(moebius.schwarzian()).is_zero());
  CHECK_FALSE(generic.finish(generic.schwarzian()).is_zero());

  // projective maps leave S unchanged as a function
  CHECK(schwarzian_cocycle_check(op, l0, DiffeoJet1D::identity()));
  CHECK(schwarzian_transform(op, l0, moebius) == moebius.finish(schwarzian_data(op, l0)));
  CHECK_FALSE(schwarzian_cocycle_check(op, l0, moebius));
  CHECK(schwarzian_transform(op, l0, DiffeoJet1D::scaling(Scalar(2))) == schwarzian_data(op, l0));

  // under a generic map S is a function shifted by -(2/3) Sch(y) a; the
  // weight-2 law with coefficient 1 does not hold
  CHECK(schwarzian_function_law_check(op, l0, generic));
  CHECK(schwarzian_function_law_check(op, Scalar::rational(1, 3), generic));
  CHECK(schwarzian_function_law_check(op, l0, moebius));
  CHECK_FALSE(schwarzian_cocycle_check(op, l0, generic));

  const DensityOperator laplace = d1(DiffPolynomial(1), 2);
  CHECK(schwarzian_transform(laplace, l0, generic) == generic.schwarzian().scaled(Scalar::rational(-2, 3)));
  CHECK(schwarzian_composition_check());
}
