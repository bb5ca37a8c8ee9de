#include <doctest.h>

#include "support.hpp"

using namespace ctscheme;

TEST_CASE("built-in sequences") {
  CHECK(builtin("motzkin").P_text == "1/x+1+x");
  CHECK(builtin("motzkin").Q_text == "1-x^2");
  CHECK(builtin("catalan").P_text == "1/x+2+x");
  CHECK(builtin("catalan").Q_text == "1-x");
  CHECK(builtin("apery3").Q_text == "1");
  CHECK(builtin("apery3").vars == std::vector<std::string>{"x", "y", "z"});
  CHECK(builtin_names() == std::vector<std::string>{"catalan", "motzkin", "apery2", "apery3"});
  CHECK_THROWS_AS(builtin("fibonacci"), UnknownSequence);
  for (const auto& name : builtin_names()) {
    const auto d = builtin(name);
    CHECK_NOTHROW(parse_laurent(d.P(), Modulus(3, 2)));
    CHECK_NOTHROW(parse_laurent(d.Q(), Modulus(3, 2)));
  }
}

TEST_CASE("nu_2 reference formula") {
  CHECK(motzkin_nu2_reference(3) == 2);
  CHECK(motzkin_nu2_reference(2) == 1);
  CHECK(motzkin_nu2_reference(0) == 0);

  // Against nu_2 of M(n) itself, computed exactly (mod 2^40) by the oracle.
  const auto in = testing::load_seq("motzkin", 2, 40);
  const auto pre = oracle::sequence_prefix(in.P, in.Q, 400);
  for (std::size_t n = 0; n < pre.size(); ++n) {
    CHECK(motzkin_nu2_reference(n) == static_cast<int>(in.P.modulus().valuation(pre[n])));
  }
}

TEST_CASE("nu_2 case families are disjoint") {
  // Re-derive each family independently and check that at most one applies.
  auto split = [](std::uint64_t v, unsigned& e) {
    e = 0;
    while (v % 4 == 0) {
      v /= 4;
      ++e;
    }
    return v;
  };
  for (std::uint64_t n = 0; n < (1u << 20); ++n) {
    unsigned e1, e2;
    const auto u1 = split(n + 1, e1);
    const auto u2 = split(n + 2, e2);
    const int fams = (e1 >= 1 && u1 % 4 == 1) + (e2 >= 1 && u2 % 4 == 3) + (e2 >= 1 && u2 % 4 == 1) +
                     (e1 >= 1 && u1 % 4 == 3);
    REQUIRE(fams <= 1);
  }
}
