#pragma once

// Arithmetic in Z/p^r: residues, p-adic valuation, unit inversion, and
// Howell-form linear algebra for deciding span membership over a ring with
// zero divisors.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctscheme/errors.hpp"

namespace ctscheme {

using Coeff = std::uint64_t;

/// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime(std::uint64_t n);

/// The ring Z/p^r for a prime p.  Elements are represented by their least
/// nonnegative representatives as plain Coeff values.
class Modulus {
 public:
  Modulus(std::uint64_t p, unsigned r);

  std::uint64_t p() const noexcept { return p_; }
  unsigned r() const noexcept { return r_; }
  std::uint64_t m() const noexcept { return m_; }

  Coeff reduce(std::int64_t x) const noexcept {
    auto v = x % static_cast<std::int64_t>(m_);
    return static_cast<Coeff>(v < 0 ? v + static_cast<std::int64_t>(m_) : v);
  }
  Coeff reduce(std::uint64_t x) const noexcept { return x % m_; }

  Coeff add(Coeff a, Coeff b) const noexcept {
    Coeff s = a + b;
    return s >= m_ ? s - m_ : s;
  }
  Coeff sub(Coeff a, Coeff b) const noexcept { return a >= b ? a - b : a + m_ - b; }
  Coeff neg(Coeff a) const noexcept { return a == 0 ? 0 : m_ - a; }
  Coeff mul(Coeff a, Coeff b) const noexcept {
    if (m_ <= (Coeff{1} << 32)) return (a * b) % m_;
    return static_cast<Coeff>((static_cast<unsigned __int128>(a) * b) % m_);
  }
  Coeff pow(Coeff a, std::uint64_t e) const noexcept;

  /// p^e reduced mod p^r; p^e = 0 for e >= r.
  Coeff p_power(unsigned e) const noexcept;

  /// nu_p of any lift of a, capped at r (so valuation(0) == r).
  unsigned valuation(Coeff a) const noexcept;

  /// Inverse of a unit; throws NonUnit when p divides a.
  Coeff unit_inverse(Coeff a) const;

  /// "p^r" or just "p" when r == 1.
  std::string to_string() const;

  friend bool operator==(const Modulus&, const Modulus&) = default;

 private:
  std::uint64_t p_;
  unsigned r_;
  std::uint64_t m_;
};

/// A ring element together with its modulus.
struct Residue {
  Coeff value = 0;
  Modulus modulus;

  Residue(Coeff v, const Modulus& mod) : value(mod.reduce(v)), modulus(mod) {}

  friend bool operator==(const Residue&, const Residue&) = default;
};

unsigned valuation(const Residue& x);
Residue unit_inverse(const Residue& x);

/// Finds alpha with target == alpha * base componentwise.  The smallest
/// least-nonnegative alpha is returned when several exist.
std::optional<Coeff> solve_scalar_multiple(const Modulus& mod,
                                           std::span<const Coeff> target,
                                           std::span<const Coeff> base);

struct RowMatrix {
  std::size_t width = 0;
  std::vector<std::vector<Coeff>> rows;

  void add_row(std::vector<Coeff> row);
  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;
};

/// Incrementally maintained echelon basis over Z/p^r with the Howell
/// property: for every row with pivot p^s, p^(r-s) times the row lies in the
/// span of the rows below it.  Each row remembers how it is obtained from
/// the generators, so reductions yield explicit coefficients.
class HowellWorkspace {
 public:
  explicit HowellWorkspace(const Modulus& mod, std::size_t width = 0);

  const Modulus& modulus() const noexcept { return mod_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t generator_count() const noexcept { return generators_; }
  std::size_t row_count() const noexcept { return rows_.size(); }

  /// Appends zero columns.  Never shrinks.
  void widen(std::size_t width);

  /// Adds v as generator number generator_count().
  void add_generator(std::span<const Coeff> v);

  struct Reduction {
    std::vector<Coeff> remainder;  // target - sum coeffs_j g_j, reduced at every pivot
    std::vector<Coeff> coeffs;     // one per generator
  };

  /// Reduces target (at most width() entries) against the rows.  The
  /// remainder is zero exactly when target lies in the span.
  Reduction reduce(std::span<const Coeff> target) const;

  /// Coefficients x (one per generator) with sum x_j g_j == target, if any.
  /// Entries of target beyond width() must be zero for membership.
  std::optional<std::vector<Coeff>> express(std::span<const Coeff> target) const;

  /// Reduces the entries above each pivot into [0, pivot).  Keeps the span
  /// and the generator bookkeeping intact.
  void canonicalize();

  /// The rows in pivot order (data part only).
  RowMatrix basis() const;

 private:
  struct Row {
    std::size_t pivot = 0;
    unsigned shift = 0;  // pivot entry is p^shift
    std::vector<Coeff> data;
    std::vector<Coeff> combo;  // over generators; may be shorter than generators_
  };

  void insert(std::vector<Coeff> data, std::vector<Coeff> combo);
  void axpy(std::vector<Coeff>& y, Coeff a, const std::vector<Coeff>& x,
            std::size_t from = 0) const;
  void scale(std::vector<Coeff>& y, Coeff a) const;

  Modulus mod_;
  std::size_t width_ = 0;
  std::size_t generators_ = 0;
  std::vector<Row> rows_;
  std::map<std::size_t, std::size_t> by_pivot_;  // pivot column -> row index
};

/// Howell normal form of the row span of mat.
RowMatrix howell_form(const Modulus& mod, const RowMatrix& mat);

/// Coefficients x with sum x_j basis_j == target, or nullopt.  Deterministic
/// for a fixed basis order.
std::optional<std::vector<Coeff>> solve_span_membership(const Modulus& mod,
                                                        const RowMatrix& basis,
                                                        std::span<const Coeff> target);

}  // namespace ctscheme
