// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "denslift/density_ops.hpp"
#include "denslift/errors.hpp"
#include "test_support.hpp"

using namespace denslift;
using denslift::testing::random_operator;

namespace {

DensityOperator D(int dim, int axis) { return DensityOperator::partial(dim, axis); }
DensityOperator L(int dim) { return DensityOperator::weight(dim); }
DensityOperator F(int dim, const DiffPolynomial& p) { return DensityOperator::multiplication(dim, p); }

}  // namespace

TEST_CASE("normal ordering by Leibniz") {
  DiffPolynomial f = jet("f"), g = jet("g");
  CHECK(compose(D(1, 1), F(1, f)) == compose(F(1, f), D(1, 1)) + F(1, jet("f", {}, {1})));
  CHECK(compose(L(2), D(2, 1)) == compose(D(2, 1), L(2)));
  DensityOperator dd = compose(D(1, 1), D(1, 1));
  DensityOperator expected = compose(F(1, g), dd) + compose(F(1, jet("g", {}, {1}).scaled(Scalar(2))), D(1, 1)) +
                             F(1, jet("g", {}, {1, 1}));
  CHECK(compose(dd, F(1, g)) == expected);
}

TEST_CASE("compose agrees with sequential application") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 2;
    DensityOperator a = random_operator(rng, dim, 3), b = random_operator(rng, dim, 3);
    Density s{jet("s"), Scalar::param("mu")};
    CHECK(apply(compose(a, b), s).coeff == apply(a, apply(b, s)).coeff);
  }
}

TEST_CASE("adjoint generators") {
  CHECK(adjoint(L(1)) == DensityOperator::identity(1) - L(1));
  CHECK(to_string(adjoint(L(1))) == "1 - L");
  CHECK(adjoint(D(2, 2)) == -D(2, 2));
  DiffPolynomial s = jet("S"), t = jet("T"), r = jet("R");
  DensityOperator op = compose(F(1, s), compose(D(1, 1), D(1, 1))) + compose(F(1, t), D(1, 1)) + F(1, r);
  DensityOperator expected = compose(F(1, s), compose(D(1, 1), D(1, 1))) +
                             compose(F(1, jet("S", {}, {1}).scaled(Scalar(2)) - t), D(1, 1)) +
                             F(1, r - jet("T", {}, {1}) + jet("S", {}, {1, 1}));
  CHECK(adjoint(op) == expected);
}

TEST_CASE("Lie operator is anti-self-adjoint") {
  for (int dim = 1; dim <= 3; ++dim) {
    VectorField x = denslift::testing::generic_field(dim);
    CHECK(adjoint(lie_operator(x)) == -lie_operator(x));
  }
  CHECK(lie_operator({coord(1)}) == compose(F(1, coord(1)), D(1, 1)) + L(1));
  CHECK(lie_operator({DiffPolynomial(1), DiffPolynomial(0)}) == D(2, 1));
}

TEST_CASE("ad_vf") {
  DiffPolynomial f = jet("f");
  CHECK(ad_vf({DiffPolynomial(1)}, compose(F(1, f), D(1, 1))) == compose(F(1, jet("f", {}, {1})), D(1, 1)));
  VectorField x = denslift::testing::generic_field(2);
  CHECK(ad_vf(x, DensityOperator::identity(2)).is_zero());
  CHECK(ad_vf(x, L(2)).is_zero());
}

TEST_CASE("restrict, apply and orders") {
  DensityOperator a = compose(compose(L(1), L(1)), D(1, 1)) + L(1);
  CHECK(restrict(a, Scalar(2)) == D(1, 1).scaled(Scalar(4)) + DensityOperator::identity(1).scaled(Scalar(2)));
  CHECK(restrict(F(1, jet("f")), Scalar::param("lam")) == F(1, jet("f")));
  Density s{jet("s"), Scalar::param("mu")};
  CHECK(apply(L(1), s).coeff == jet("s").scaled(Scalar::param("mu")));
  CHECK(apply(D(1, 1), s).coeff == jet("s", {}, {1}));
  DensityOperator ldd = compose(L(1), compose(D(1, 1), D(1, 1)));
  CHECK(ldd.total_order() == 3);
  CHECK(ldd.x_order() == 2);
  CHECK(F(1, jet("f")).total_order() == 0);
  CHECK_THROWS_AS(DensityOperator(1).total_order(), ZeroOperator);
  CHECK(compose(compose(L(1), L(1)), F(1, jet("c"))).is_vertical());
  CHECK_FALSE(D(1, 1).is_vertical());
  CHECK(DensityOperator(1).is_vertical());
  CHECK_THROWS_AS(D(1, 2), IndexOutOfRange);
  CHECK_THROWS_AS(compose(D(1, 1), D(2, 1)), DimensionMismatch);
}

TEST_CASE("adjoint involution, anti-homomorphism, associativity, parity defect") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 1 + trial % 3;
    DensityOperator a = random_operator(rng, dim, 4), b = random_operator(rng, dim, 3),
                    c = random_operator(rng, dim, 2);
    CHECK(adjoint(adjoint(a)) == a);
    CHECK(adjoint(compose(a, b)) == compose(adjoint(b), adjoint(a)));
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
    if (!a.is_zero()) {
      const int n = a.total_order();
      DensityOperator defect = a - (n % 2 ? -adjoint(a) : adjoint(a));
      if (!defect.is_zero()) CHECK(defect.total_order() <= n - 1);
    }
    VectorField x = denslift::testing::generic_field(dim);
    CHECK(ad_vf(x, compose(b, c)) == compose(ad_vf(x, b), c) + compose(b, ad_vf(x, c)));
  }
}

TEST_CASE("weight polynomials") {
  WeightPoly t = WeightPoly::shifted(Scalar::rational(1, 2));
  CHECK(t.adjoint() == t * WeightPoly(-1));
  CHECK((t * t).eval(Scalar(1)) == Scalar::rational(1, 4));
  CHECK(adjoint(t.to_operator(1)) == t.adjoint().to_operator(1));
}

TEST_CASE("rendering") {
  DensityOperator op = compose(F(1, jet("S", {1, 1})), compose(D(1, 1), D(1, 1))) +
                       compose(F(1, jet("g", {1}).scaled(Scalar(2) * Scalar::param("l0") - Scalar(1))), D(1, 1)) +
                       compose(L(1), F(1, jet("dg")));
  CHECK(to_string(op) == "S[1,1]*D1*D1 + (2*l0-1)*g[1]*D1 + L*dg");
}
