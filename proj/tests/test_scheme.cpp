#include <doctest.h>

#include <regex>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace ctscheme;
using testing::load_seq;
using testing::poly;
using testing::scheme_for;

namespace {

struct Case {
  std::string seq;
  std::uint64_t p;
  unsigned r;
  SchemeKind kind;
  bool symmetry = true;
};

std::string label(const Case& c) {
  return c.seq + " mod " + std::to_string(c.p) + "^" + std::to_string(c.r) + " " + to_string(c.kind) +
         (c.symmetry ? "" : " (no symmetry)");
}

// Every combination used by the property suites.
std::vector<Case> property_cases() {
  std::vector<Case> out;
  const std::vector<std::tuple<std::string, std::uint64_t, unsigned>> inputs = {
      {"catalan", 2, 1}, {"catalan", 2, 3}, {"catalan", 2, 5}, {"catalan", 3, 1},
      {"catalan", 3, 2}, {"catalan", 5, 2}, {"motzkin", 2, 1}, {"motzkin", 2, 3},
      {"motzkin", 2, 5}, {"motzkin", 3, 2}, {"motzkin", 5, 2}, {"motzkin", 7, 1},
      {"apery2", 2, 2},  {"apery3", 2, 3},  {"apery3", 3, 1},
  };
  for (const auto& [seq, p, r] : inputs) {
    for (auto kind : {SchemeKind::linear, SchemeKind::scaling, SchemeKind::automatic}) {
      out.push_back({seq, p, r, kind});
    }
  }
  out.push_back({"motzkin", 13, 2, SchemeKind::linear});
  out.push_back({"motzkin", 13, 2, SchemeKind::scaling});
  out.push_back({"motzkin", 2, 3, SchemeKind::scaling, false});
  out.push_back({"motzkin", 3, 2, SchemeKind::linear, false});
  out.push_back({"apery3", 2, 2, SchemeKind::automatic, false});
  return out;
}

// The three-variable kernels grow cubically, so their oracle range is shorter.
std::size_t oracle_range(const Case& c) { return c.seq.rfind("apery", 0) == 0 ? 40 : 2000; }

std::size_t dot_nodes(const std::string& dot) {
  static const std::regex node(R"(^\s+(s\d+|zero) \[label)");
  std::size_t count = 0;
  std::istringstream in(dot);
  for (std::string line; std::getline(in, line);) count += std::regex_search(line, node);
  return count;
}

}  // namespace

TEST_CASE("Catalan mod 3 schemes") {
  const auto lin = scheme_for("catalan", 3, 1, SchemeKind::linear);
  REQUIRE(lin.state_count() == 2);
  const std::vector<TransitionRow> expect = {
      {{{{0, 1}, {1, 1}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 1}}}},
      {{{}, {{0, 1}, {1, 1}}, {{0, 1}, {1, 2}}}},
  };
  CHECK(lin.transitions == expect);
  CHECK(lin.initial == std::vector<Coeff>{1, 0});

  const auto sc = scheme_for("catalan", 3, 1, SchemeKind::scaling);
  CHECK(sc.state_count() == 3);
  CHECK(sc.initial == std::vector<Coeff>{1, 1, 1});

  const auto au = scheme_for("catalan", 3, 1, SchemeKind::automatic);
  CHECK(au.state_count() == 4);
  CHECK(au.initial == std::vector<Coeff>{1, 1, 2, 2});
  CHECK(au.automaton_state_count() == 5);

  // B_2 = 2 A_2 and B_3 = 2 A_1.
  const auto conv = scaling_to_automatic(sc);
  CHECK(conv.state_count() == 4);
  CHECK(conv.initial == std::vector<Coeff>{1, 1, 2, 2});
  CHECK(minimize(conv).state_count() == 4);

  for (const auto* s : {&lin, &sc, &au}) CHECK(nth_term(*s, 35) == 1);
}

TEST_CASE("advance_state") {
  const auto motz = load_seq("motzkin", 2, 2);
  SchemeBuilder b(motz.P, motz.Q, SchemeKind::linear);
  const auto step = b.advance_state(0, 1);
  CHECK(b.ptable_entry(step.p_index) == power(motz.P, 2));
  CHECK(step.q == poly("1+x-x^2-x^3", motz.P.modulus()));
  CHECK_THROWS_AS(b.advance_state(0, 2), ContextMismatch);

  const auto cat = load_seq("catalan", 2, 2);
  SchemeBuilder c(cat.P, cat.Q, SchemeKind::linear);
  CHECK(c.advance_state(0, 0).p_index == 0);

  // r = 1: P^p collapses back to P and Q_hat = Lambda_p[P^k Q].
  const auto m5 = load_seq("motzkin", 5, 1);
  SchemeBuilder d(m5.P, m5.Q, SchemeKind::scaling);
  for (unsigned k = 0; k < 5; ++k) {
    const auto st = d.advance_state(0, k);
    CHECK(st.p_index == 0);
    CHECK(st.q == canonical_fold(cartier(multiply(power(m5.P, k), m5.Q), 5), d.symmetry()));
  }
}

TEST_CASE("degree_bound") {
  for (std::uint64_t p : {2, 3, 13}) {
    for (unsigned r : {1u, 2u, 3u}) {
      std::int64_t q = 1;
      for (unsigned i = 1; i < r; ++i) q *= static_cast<std::int64_t>(p);
      CHECK(degree_bound(1, 2, p, r) == q + 1);
      CHECK(degree_bound(1, 0, p, r) == q - 1);
    }
  }
  CHECK(degree_bound(1, 2, 7, 1) == 2);
}

TEST_CASE("Motzkin mod 2^r automatic counts (small r)") {
  const std::size_t minimal[] = {4, 14, 24, 76};
  const std::size_t automaton[] = {5, 15, 24, 76};
  for (unsigned r = 1; r <= 4; ++r) {
    const auto m = minimize(scheme_for("motzkin", 2, r, SchemeKind::automatic));
    CHECK(m.state_count() == minimal[r - 1]);
    CHECK(m.automaton_state_count() == automaton[r - 1]);
    CHECK(minimize(m).state_count() == m.state_count());
  }
}

TEST_CASE("oracle equivalence, digit-0 fixed point, arity, degree bounds") {
  for (const auto& c : property_cases()) {
    CAPTURE(label(c));
    const auto in = load_seq(c.seq, c.p, c.r);
    const auto s = scheme_for(c.seq, c.p, c.r, c.kind, c.symmetry);
    CHECK_NOTHROW(validate(s));
    CHECK(s.ptable.size() <= c.r);

    const Modulus& mod = s.modulus;
    for (std::size_t i = 0; i < s.state_count(); ++i) {
      Coeff acc = 0;
      for (const auto& t : s.transitions[i].digits[0]) acc = mod.add(acc, mod.mul(t.coeff, s.initial[t.state]));
      CHECK(acc == s.initial[i]);
      for (const auto& form : s.transitions[i].digits) {
        if (c.kind != SchemeKind::linear) CHECK(form.size() <= 1);
        if (c.kind == SchemeKind::automatic && !form.empty()) CHECK(form[0].coeff == 1);
      }
    }

    const SymmetryGroup sym =
        c.symmetry ? detect_symmetries(in.P) : SymmetryGroup::trivial(in.P.nvars());
    const auto q0 = canonical_fold(in.Q, sym);
    for (const auto& st : s.states) {
      for (std::size_t v = 0; v < in.P.nvars(); ++v) {
        for (auto k : {DegreeKind::upper, DegreeKind::lower}) {
          const auto bound = degree_bound(symmetric_degree_stat(in.P, sym, k, v),
                                          symmetric_degree_stat(q0, sym, k, v), c.p, c.r);
          CHECK(symmetric_degree_stat(st.q, sym, k, v) <= bound);
        }
      }
    }

    const auto expect = oracle::sequence_prefix(in.P, in.Q, oracle_range(c));
    std::size_t bad = 0;
    for (std::size_t n = 0; n < expect.size(); ++n) bad += nth_term(s, n) != expect[n];
    CHECK(bad == 0);
  }
}

TEST_CASE("linear state ceilings") {
  for (const auto [p, r] : {std::pair{2ull, 1u}, {2ull, 2u}, {2ull, 3u}, {2ull, 4u}, {2ull, 5u},
                            {2ull, 6u}, {3ull, 1u}, {3ull, 2u}, {3ull, 3u}, {5ull, 2u}, {7ull, 2u}}) {
    CAPTURE(p);
    CAPTURE(r);
    std::uint64_t geom = 0, pk = 1;
    for (unsigned i = 0; i < r; ++i, pk *= p) geom += pk;  // (p^r - 1)/(p - 1)
    const auto cat = scheme_for("catalan", p, r, SchemeKind::linear);
    CHECK(cat.state_count() <= geom + 1);
    if (p == 2 && r > 1) CHECK(cat.state_count() <= (1u << (r - 1)));
    CHECK(scheme_for("motzkin", p, r, SchemeKind::linear).state_count() <= geom + 2);
  }
}

TEST_CASE("conversions preserve values on random indices") {
  std::mt19937_64 rng(99);
  const std::vector<std::tuple<std::string, std::uint64_t, unsigned>> inputs = {
      {"catalan", 3, 2}, {"motzkin", 2, 4}, {"motzkin", 5, 2}, {"apery3", 2, 3}};
  for (const auto& [seq, p, r] : inputs) {
    CAPTURE(seq);
    const auto lin = scheme_for(seq, p, r, SchemeKind::linear);
    const auto sc = scheme_for(seq, p, r, SchemeKind::scaling);
    const auto au = scheme_for(seq, p, r, SchemeKind::automatic);
    const auto conv = scaling_to_automatic(sc);
    const auto min_conv = minimize(conv);
    const auto min_au = minimize(au);
    const auto red = reduce_scaling(sc);
    CHECK(min_conv.state_count() == min_au.state_count());
    CHECK(minimize(min_au).state_count() == min_au.state_count());
    CHECK(scaling_to_automatic(au).state_count() == au.state_count());
    CHECK(red.state_count() <= sc.state_count());
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto n = testing::random_index(rng);
      const auto v = nth_term(sc, n);
      bad += nth_term(lin, n) != v;
      bad += nth_term(au, n) != v;
      bad += nth_term(conv, n) != v;
      bad += nth_term(min_conv, n) != v;
      bad += nth_term(min_au, n) != v;
      bad += nth_term(red, n) != v;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("reduced scaling scheme for Motzkin mod 169") {
  const auto sc = scheme_for("motzkin", 13, 2, SchemeKind::scaling);
  const auto red = reduce_scaling(sc);
  CHECK(red.state_count() == 48);
  CHECK(red.kind == SchemeKind::scaling);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto n = testing::random_index(rng);
    CHECK(nth_term(red, n) == nth_term(sc, n));
  }
  CHECK_THROWS_AS(reduce_scaling(scheme_for("motzkin", 13, 1, SchemeKind::linear)), KindMismatch);
}

TEST_CASE("state caps") {
  const auto in = load_seq("motzkin", 2, 6);
  SchemeOptions opts;
  opts.max_states = 10;
  CHECK_THROWS_AS(compute_scheme(in.P, in.Q, SchemeKind::automatic, opts), StateCapExceeded);
  CHECK_THROWS_AS(scaling_to_automatic(scheme_for("motzkin", 13, 2, SchemeKind::scaling), 100),
                  StateCapExceeded);
}

TEST_CASE("input errors") {
  const Modulus m(3, 1);
  CHECK_THROWS_AS(compute_scheme(LaurentPoly(m, 1), poly("1", m), SchemeKind::linear), ZeroPolynomial);
  CHECK_THROWS_AS(compute_scheme(poly("1/x+1+x", m), LaurentPoly(m, 1), SchemeKind::linear),
                  ZeroPolynomial);
  CHECK_THROWS_AS(compute_scheme(poly("1/x+1+x", m), poly("1/x-x", m), SchemeKind::linear),
                  ZeroPolynomial);
  CHECK_THROWS_AS(compute_scheme(poly("1/x+1+x", m), poly("1", Modulus(3, 2)), SchemeKind::linear),
                  ContextMismatch);
  CHECK(parse_kind("scaling") == SchemeKind::scaling);
  CHECK_THROWS_AS(parse_kind("affine"), FormatError);
}

TEST_CASE("serialization") {
  const auto sc = scheme_for("catalan", 3, 1, SchemeKind::scaling);
  const std::string text = serialize(sc);
  const auto back = deserialize(text);
  CHECK(serialize(back) == text);
  CHECK(back.transitions == sc.transitions);
  CHECK(back.initial == sc.initial);
  CHECK(back.kind == sc.kind);
  CHECK(back.modulus == sc.modulus);

  // Determinism.
  for (const auto kind : {SchemeKind::linear, SchemeKind::scaling, SchemeKind::automatic}) {
    CHECK(serialize(scheme_for("motzkin", 3, 2, kind)) == serialize(scheme_for("motzkin", 3, 2, kind)));
  }

  auto bad = nlohmann::json::parse(text);
  bad["kind"] = "affine";
  CHECK_THROWS_AS(deserialize(bad.dump()), FormatError);

  const auto m8 = scheme_for("motzkin", 2, 3, SchemeKind::scaling);
  auto j = nlohmann::json::parse(serialize(m8));
  for (auto& row : j["transitions"]) {
    for (auto& form : row) {
      for (auto& [k, v] : form.items()) v = 9;
    }
  }
  CHECK_THROWS_AS(deserialize(j.dump()), FormatError);

  CHECK_THROWS_AS(deserialize("not json"), FormatError);
  CHECK_THROWS_AS(deserialize("{}"), FormatError);
  auto wrong_p = nlohmann::json::parse(text);
  wrong_p["p"] = 4;
  CHECK_THROWS_AS(deserialize(wrong_p.dump()), FormatError);
  auto wrong_states = nlohmann::json::parse(text);
  wrong_states["states"] = 7;
  CHECK_THROWS_AS(deserialize(wrong_states.dump()), FormatError);
  auto wrong_init = nlohmann::json::parse(text);
  wrong_init["initial"][0] = 2;  // breaks the digit-0 fixed point
  CHECK_THROWS_AS(deserialize(wrong_init.dump()), FormatError);
}

TEST_CASE("DOT export") {
  const auto au = scheme_for("catalan", 3, 1, SchemeKind::automatic);
  const auto dot = export_dot(au);
  CHECK(dot.rfind("digraph scheme {", 0) == 0);
  CHECK(dot_nodes(dot) == 5);
  CHECK(dot.find("zero -> zero") != std::string::npos);

  CHECK(dot_nodes(export_dot(scheme_for("catalan", 3, 1, SchemeKind::scaling))) == 4);

  const Modulus m(2, 3);
  const auto one = compute_scheme(poly("1", m), poly("3", m), SchemeKind::automatic);
  REQUIRE(one.state_count() == 1);
  const auto d1 = export_dot(one);
  CHECK(dot_nodes(d1) == 1);
  CHECK(d1.find("s0 -> s0 [label=\"0,1\"]") != std::string::npos);

  CHECK_THROWS_AS(export_dot(scheme_for("catalan", 3, 1, SchemeKind::linear)), KindMismatch);
}
