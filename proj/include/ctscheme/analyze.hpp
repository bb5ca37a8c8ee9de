#pragma once

// Queries on computed schemes: evaluation at huge indices, attained values,
// valuation schemes, first occurrences, CRT, residue census, prime scans.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ctscheme/polyparse.hpp"
#include "ctscheme/scheme.hpp"

namespace ctscheme {

using BigIndex = boost::multiprecision::cpp_int;

/// Decimal digits or "B^E" with decimal B and E.  Throws SyntaxError.
BigIndex parse_big_index(const std::string& text);

/// Base-p digits of n, least significant first (empty for n = 0).
std::vector<std::uint64_t> digits_lsd(const BigIndex& n, std::uint64_t p);

/// A(n) mod p^r by reading the base-p digits of n, least significant first.
Coeff nth_term(const CongruenceScheme& s, const BigIndex& n);

/// All residues A(n) takes, by breadth-first closure over row vectors.
/// Throws NodeCapExceeded when more than node_cap vectors are reached.
std::vector<Coeff> value_set(const CongruenceScheme& s, std::size_t node_cap = default_node_cap());
std::vector<Coeff> impossible_values(const CongruenceScheme& s,
                                     std::size_t node_cap = default_node_cap());

/// Scheme for p^min(nu_p(A(n)), r): every coefficient and initial value c is
/// replaced by p^nu_p(c).  Returned in minimized automatic form.  Accepts
/// scaling (or automatic) input; throws KindMismatch for linear schemes.
CongruenceScheme valuation_scheme(const CongruenceScheme& s);

/// Smallest n with A(n) == target.  nullopt when target is never attained;
/// DigitCapExceeded when no n below p^max_digits works.
std::optional<BigIndex> first_index(const CongruenceScheme& s, Coeff target,
                                    unsigned max_digits = 64);

/// Chinese remainder combination of (value, modulus) pairs with pairwise
/// coprime moduli.  Throws NonCoprimeModuli.
std::pair<BigIndex, BigIndex> crt_combine(const std::vector<std::pair<BigIndex, BigIndex>>& pairs);
std::pair<BigIndex, BigIndex> crt_combine(const std::vector<Residue>& residues);

struct CensusRow {
  unsigned r = 0;
  std::size_t missing = 0;        // N(r)
  std::int64_t additional = 0;    // A(r) = N(r) - p N(r-1)
  double proportion = 0.0;        // P(r) = N(r) / p^r
  std::vector<Coeff> residues;    // the missing residues themselves
};

/// Residues mod p^r never attained, for r = 1..r_max, via scaling schemes.
std::vector<CensusRow> residue_census(const ExprSource& P, const ExprSource& Q, std::uint64_t p,
                                      unsigned r_max, bool use_symmetry = true);

struct ScanOptions {
  bool witness = false;
  unsigned jobs = 1;
  bool use_symmetry = true;
};

struct ScanReport {
  std::uint64_t prime = 0;
  bool zero_attained = false;
  std::optional<BigIndex> witness;
  std::size_t states_scaling = 0;
  std::chrono::duration<double> elapsed{0};
  std::string error;  // empty on success
};

/// For each prime in primes: does A(n) == target (mod p^r) for some n?
/// Divisibility (target 0) is decided on the valuation scheme.  Per-prime
/// failures are recorded in the report.  Results are ordered by prime.
std::vector<ScanReport> divisibility_scan(const ExprSource& P, const ExprSource& Q,
                                          const std::vector<std::uint64_t>& primes, unsigned r,
                                          std::int64_t target = 0, ScanOptions opts = {});

std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi);

std::string render_scan_table(const std::vector<ScanReport>& reports);
std::string render_scan_json(const ScanReport& report);

}  // namespace ctscheme
