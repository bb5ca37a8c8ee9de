#include <doctest.h>

#include "support.hpp"

using namespace ctscheme;
using testing::poly;
using testing::random_poly;

TEST_CASE("multiply and power") {
  const Modulus m(3, 4);
  CHECK(multiply(poly("1/x+1+x", m), poly("1-x", m)) == poly("1/x-x^2", m));
  CHECK(multiply(poly("2+x^3", m), poly("1", m)) == poly("2+x^3", m));
  const Modulus m2(2, 1);
  CHECK(multiply(poly("1+x", m2), poly("1+x", m2)) == poly("1+x^2", m2));

  const Modulus m4(2, 2);
  CHECK(power(poly("1/x+2+x", m4), 2) == poly("x^-2+2+x^2", m4));
  CHECK(power(poly("1/x+2+x", m4), 0) == poly("1", m4));
  CHECK(power(poly("1/x+1+x", m2), 2) == poly("x^-2+1+x^2", m2));
}

TEST_CASE("power matches iterated multiplication") {
  std::mt19937_64 rng(11);
  const Modulus m(5, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_poly(rng, m, -3, 3, 4);
    LaurentPoly acc = LaurentPoly::constant(m, 1, 1);
    for (unsigned e = 0; e <= 16; ++e) {
      CHECK(power(f, e) == acc);
      acc = multiply(acc, f);
    }
  }
}

TEST_CASE("Frobenius lifting: P^(p^r) = P(x^p)^(p^(r-1)) mod p^r") {
  std::mt19937_64 rng(5);
  for (const auto [p, r] : {std::pair{2ull, 3u}, {3ull, 2u}, {5ull, 2u}}) {
    const Modulus m(p, r);
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = random_poly(rng, m, -2, 2, 4);
      std::uint64_t q = 1;
      for (unsigned i = 1; i < r; ++i) q *= p;
      CHECK(power(f, q * p) == power(inflate(f, p), q));
    }
  }
}

TEST_CASE("cartier, inflate, collapse, constant term") {
  const Modulus m(2, 3);
  CHECK(cartier(poly("1-x^2", m), 2) == poly("1-x", m));
  const Modulus m3(3, 2);
  CHECK(cartier(poly("x^-3+x+2*x^6", m3), 3) == poly("x^-1+2*x^2", m3));
  CHECK(cartier(poly("x", m), 2).is_zero());

  CHECK(constant_term(poly("1/x-x^2", m)) == 0);
  CHECK(constant_term(multiply(power(poly("1/x+1+x", m), 2), poly("1-x^2", m))) == 2);
  CHECK(constant_term(poly("5", m)) == 5);

  const Modulus m4(2, 2);
  CHECK(collapse_pth_roots(poly("x^-2+2+x^2", m4), 2) == poly("1/x+2+x", m4));
  CHECK_FALSE(collapse_pth_roots(poly("1+x", m4), 2).has_value());
  CHECK(collapse_pth_roots(LaurentPoly(m4, 1), 2) == LaurentPoly(m4, 1));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_poly(rng, m3, -4, 4, 5);
    const auto g = random_poly(rng, m3, -9, 9, 8);
    CHECK(collapse_pth_roots(inflate(f, 3), 3) == f);
    // ct[f(x^p) g] = ct[f Lambda_p g]
    CHECK(constant_term(multiply(inflate(f, 3), g)) == constant_term(multiply(f, cartier(g, 3))));
    CHECK(CartierProduct(f, 3).apply(g) == cartier(multiply(f, g), 3));
  }
}

TEST_CASE("CartierProduct in several variables") {
  const Modulus m(2, 3);
  const std::vector<std::string> v{"x", "y", "z"};
  const auto P = poly("(x+y)*(1+z)*(x+y+z)*(1+y+z)/(x*y*z)", m, v);
  const auto g = poly("1+x*y-3*z^2/y+x^4", m, v);
  const auto P3 = power(P, 3);
  CHECK(CartierProduct(P3, 2).apply(g) == cartier(multiply(P3, g), 2));
}

TEST_CASE("degree statistics") {
  const Modulus m(2, 1);
  CHECK(degree_stat(poly("1-x^2", m), DegreeKind::upper) == 2);
  CHECK(degree_stat(poly("1-x^2", m), DegreeKind::lower) == 0);
  CHECK(degree_stat(poly("1/x+1+x", m), DegreeKind::lower) == 1);
  CHECK(degree_stat(poly("x^-3", m), DegreeKind::upper) == 0);
  const std::vector<std::string> v{"x", "y"};
  const Modulus m5(5, 1);
  const auto f = poly("x^2*y^-1+y^3", m5, v);
  CHECK(degree_stat(f, DegreeKind::upper, 1) == 3);
  CHECK(degree_stat(f, DegreeKind::lower, 1) == 1);
  CHECK(degree_stat(f, DegreeKind::total_upper) == 3);
  CHECK(degree_stat(f, DegreeKind::total_lower) == 0);
  CHECK_THROWS_AS(degree_stat(LaurentPoly(m, 1), DegreeKind::upper), ZeroPolynomial);

  // Subadditivity and the Cartier division bound.
  std::mt19937_64 rng(9);
  const Modulus m7(7, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_poly(rng, m7, -10, 10, 4);
    const auto b = random_poly(rng, m7, -10, 10, 4);
    if (a.is_zero() || b.is_zero()) continue;
    for (const auto k : {DegreeKind::upper, DegreeKind::lower}) {
      const auto ab = multiply(a, b);
      if (!ab.is_zero()) CHECK(degree_stat(ab, k) <= degree_stat(a, k) + degree_stat(b, k));
      const auto c = cartier(a, 7);
      if (!c.is_zero()) CHECK(degree_stat(c, k) <= degree_stat(a, k) / 7);
    }
  }
}

TEST_CASE("symmetries and folding") {
  const Modulus m(2, 2);
  const auto motz = detect_symmetries(poly("1/x+1+x", m));
  CHECK(motz.elements.size() == 2);
  CHECK(motz.elements[0].is_identity());
  CHECK(detect_symmetries(poly("1+x", m)).is_trivial());
  CHECK(detect_symmetries(poly("1/x+2+x", m)).elements.size() == 2);

  CHECK(canonical_fold(poly("1/x+1-x^2-x^3", m), motz) == poly("1+x-x^2-x^3", m));
  CHECK(canonical_fold(poly("1/x+1-x^2", m), SymmetryGroup::trivial(1)) == poly("1/x+1-x^2", m));
  CHECK(canonical_fold(poly("1/x-x", m), motz).is_zero());

  // Folding never changes the sequence.
  const Modulus m9(3, 2);
  const std::vector<std::string> v{"x", "y", "z"};
  const auto P = poly("(1/x+x)*(1/y+y)+z+1/z+x*y*z", m9, v);
  const auto sym = detect_symmetries(P);
  CHECK(sym.elements.size() == 2);  // identity and x <-> y
  for (const auto& s : sym.elements) CHECK(substitute(P, s) == P);
  const auto Q = poly("1+x-2*y^2+z/x", m9, v);
  const auto F = canonical_fold(Q, sym);
  LaurentPoly Pn = LaurentPoly::constant(m9, 3, 1);
  for (int n = 0; n <= 6; ++n) {
    CHECK(constant_term(multiply(Pn, Q)) == constant_term(multiply(Pn, F)));
    Pn = multiply(Pn, P);
  }
}

TEST_CASE("printing round-trips through the parser") {
  std::mt19937_64 rng(1);
  const Modulus m(13, 2);
  const std::vector<std::string> v{"x"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_poly(rng, m, -6, 6, 5);
    CHECK(poly(to_string(f, v), m) == f);
  }
  const std::vector<std::string> vv{"a", "b"};
  const auto g = poly("3*a^-2*b+b^5-7", m, vv);
  CHECK(poly(to_string(g, vv), m, vv) == g);
}
