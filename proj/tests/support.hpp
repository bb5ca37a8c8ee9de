#pragma once

// Shared helpers for the unit and property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ctscheme/analyze.hpp"
#include "ctscheme/catalog.hpp"
#include "ctscheme/oracle.hpp"
#include "ctscheme/polyparse.hpp"
#include "ctscheme/scheme.hpp"

namespace testing {

using namespace ctscheme;

struct Instance {
  LaurentPoly P;
  LaurentPoly Q;
};

inline Instance load_seq(const std::string& name, std::uint64_t p, unsigned r) {
  const auto def = builtin(name);
  const Modulus mod(p, r);
  return {parse_laurent(def.P(), mod), parse_laurent(def.Q(), mod)};
}

inline LaurentPoly poly(const std::string& text, const Modulus& mod,
                        std::vector<std::string> vars = {"x"}) {
  return parse_laurent({text, std::move(vars)}, mod);
}

inline CongruenceScheme scheme_for(const std::string& name, std::uint64_t p, unsigned r,
                                   SchemeKind kind, bool use_symmetry = true) {
  const auto in = load_seq(name, p, r);
  SchemeOptions opts;
  opts.use_symmetry = use_symmetry;
  return compute_scheme(in.P, in.Q, kind, opts);
}

/// Random univariate Laurent polynomial with exponents in [lo, hi].
inline LaurentPoly random_poly(std::mt19937_64& rng, const Modulus& mod, int lo, int hi,
                               int terms) {
  std::uniform_int_distribution<int> e(lo, hi);
  std::uniform_int_distribution<Coeff> c(0, mod.m() - 1);
  std::vector<std::pair<Monomial, Coeff>> t;
  for (int i = 0; i < terms; ++i) t.push_back({Monomial{e(rng)}, c(rng)});
  return LaurentPoly::from_terms(mod, 1, std::move(t));
}

/// Random index below 2^64 (as a BigIndex), biased towards varied lengths.
inline BigIndex random_index(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> bits(0, 64);
  const int b = bits(rng);
  const std::uint64_t v = rng();
  return BigIndex(b == 64 ? v : (v & ((std::uint64_t{1} << b) - 1)));
}

}  // namespace testing
