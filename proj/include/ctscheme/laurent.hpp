#pragma once

// Sparse multivariate Laurent polynomials over Z/p^r.
//
// Terms are stored flat (exponent tuples back to back, coefficients in a
// parallel array), sorted lexicographically ascending by exponent tuple,
// with no zero coefficients.  That order is the canonical order used for
// hashing, printing and state matching.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctscheme/modring.hpp"

namespace ctscheme {

using Monomial = std::vector<std::int32_t>;

class LaurentPoly {
 public:
  LaurentPoly(const Modulus& mod, std::size_t nvars) : mod_(mod), nvars_(nvars) {}

  static LaurentPoly constant(const Modulus& mod, std::size_t nvars, Coeff c);
  static LaurentPoly monomial(const Modulus& mod, std::span<const std::int32_t> exps,
                              Coeff c = 1);
  /// Sums the given terms (duplicates accumulate, zeros are dropped).
  static LaurentPoly from_terms(const Modulus& mod, std::size_t nvars,
                                std::vector<std::pair<Monomial, Coeff>> terms);

  const Modulus& modulus() const noexcept { return mod_; }
  std::size_t nvars() const noexcept { return nvars_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  bool is_zero() const noexcept { return coeffs_.empty(); }

  std::span<const std::int32_t> exponents(std::size_t i) const {
    return {exps_.data() + i * nvars_, nvars_};
  }
  Coeff coeff(std::size_t i) const { return coeffs_[i]; }
  std::span<const Coeff> coeffs() const noexcept { return coeffs_; }
  std::span<const std::int32_t> flat_exponents() const noexcept { return exps_; }

  /// Coefficient of x^exps (0 when absent).
  Coeff coefficient_of(std::span<const std::int32_t> exps) const;
  /// Index of the term x^exps, or size() when absent.
  std::size_t find(std::span<const std::int32_t> exps) const;

  std::size_t hash() const noexcept;

  friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) {
    return a.nvars_ == b.nvars_ && a.mod_ == b.mod_ && a.exps_ == b.exps_ &&
           a.coeffs_ == b.coeffs_;
  }

  // Builds a polynomial from already sorted, merged, nonzero terms.
  static LaurentPoly from_sorted(const Modulus& mod, std::size_t nvars,
                                 std::vector<std::int32_t> exps, std::vector<Coeff> coeffs);

 private:
  Modulus mod_;
  std::size_t nvars_;
  std::vector<std::int32_t> exps_;
  std::vector<Coeff> coeffs_;
};

struct LaurentHash {
  std::size_t operator()(const LaurentPoly& f) const noexcept { return f.hash(); }
};

LaurentPoly add(const LaurentPoly& f, const LaurentPoly& g);
LaurentPoly subtract(const LaurentPoly& f, const LaurentPoly& g);
LaurentPoly negate(const LaurentPoly& f);
LaurentPoly scale(const LaurentPoly& f, Coeff c);
LaurentPoly multiply(const LaurentPoly& f, const LaurentPoly& g);
LaurentPoly power(const LaurentPoly& f, std::uint64_t e);

/// Keeps the terms whose exponents are all divisible by p, dividing them by p.
LaurentPoly cartier(const LaurentPoly& f, std::uint64_t p);
/// f(x^p): every exponent multiplied by p.
LaurentPoly inflate(const LaurentPoly& f, std::uint64_t p);
/// g with f = g(x^p), if every exponent of f is divisible by p.
std::optional<LaurentPoly> collapse_pth_roots(const LaurentPoly& f, std::uint64_t p);
Coeff constant_term(const LaurentPoly& f);

/// Lambda_p[f * g] for a fixed f and many g, without forming the product:
/// the terms of f are bucketed by exponent residue class mod p so that only
/// pairs landing on exponents divisible by p are visited.
class CartierProduct {
 public:
  CartierProduct(const LaurentPoly& f, std::uint64_t p);
  LaurentPoly apply(const LaurentPoly& g) const;

 private:
  std::size_t class_of(std::span<const std::int32_t> exps, bool negated) const;

  LaurentPoly f_;
  std::uint64_t p_;
  bool bucketed_ = false;
  std::vector<std::size_t> offsets_;  // bucket b holds terms [offsets_[b], offsets_[b+1])
  std::vector<std::int32_t> exps_;
  std::vector<Coeff> coeffs_;
  std::vector<std::int32_t> lo_, hi_;  // exponent bounds of f
};

enum class DegreeKind { upper, lower, total_upper, total_lower };

/// Degree-like statistics, clamped at 0.  `var` selects the variable for
/// upper/lower and is ignored for the total variants.  Throws ZeroPolynomial.
std::int64_t degree_stat(const LaurentPoly& f, DegreeKind kind, std::size_t var = 0);

/// A signed permutation of variable slots: x^k maps to x^k' with
/// k'_i = (flip_i ? -1 : 1) * k_{perm_i}.
struct SignedPermutation {
  std::vector<std::uint8_t> perm;
  std::vector<std::uint8_t> flip;

  bool is_identity() const;
  void apply(std::span<const std::int32_t> in, std::span<std::int32_t> out) const;
  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
};

LaurentPoly substitute(const LaurentPoly& f, const SignedPermutation& sigma);

struct SymmetryGroup {
  std::size_t nvars = 0;
  std::vector<SignedPermutation> elements;  // identity first

  static SymmetryGroup trivial(std::size_t nvars);
  bool is_trivial() const noexcept { return elements.size() <= 1; }
};

constexpr std::size_t kMaxSymmetryVars = 6;

/// All signed permutations fixing P (its full stabilizer in the
/// hyperoctahedral group).  Throws TooManyVariables beyond kMaxSymmetryVars.
SymmetryGroup detect_symmetries(const LaurentPoly& P);

/// Replaces each monomial by the lexicographic maximum of its orbit.
LaurentPoly canonical_fold(const LaurentPoly& Q, const SymmetryGroup& sym);

/// max over the group of degree_stat(sigma f): a symmetry-invariant
/// degree-like function.
std::int64_t symmetric_degree_stat(const LaurentPoly& f, const SymmetryGroup& sym,
                                   DegreeKind kind, std::size_t var = 0);

/// Canonical text form, parseable by parse_laurent with the same names.
std::string to_string(const LaurentPoly& f, std::span<const std::string> vars);

}  // namespace ctscheme
