#pragma once

// Congruence p-schemes for A(n) = ct[P(x)^n Q(x)] modulo p^r.
//
// A scheme is a finite family of states A_0 = A, A_1, ..., A_m with
//
//   A_i(p n + k) = sum_j alpha_{i,j}^{(k)} A_j(n),     0 <= k < p,
//
// plus the initial values c_i = A_i(0).  Linear schemes allow arbitrary
// right-hand sides, scaling schemes at most one term, automatic schemes at
// most one term with coefficient 1.  An empty right-hand side means 0.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctscheme/laurent.hpp"
#include "ctscheme/modring.hpp"

namespace ctscheme {

enum class SchemeKind { linear, scaling, automatic };

std::string to_string(SchemeKind kind);
SchemeKind parse_kind(const std::string& text);

struct Transition {
  std::uint32_t state = 0;
  Coeff coeff = 0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Sparse linear form over states, sorted by state, no zero coefficients.
using LinearForm = std::vector<Transition>;

struct TransitionRow {
  std::vector<LinearForm> digits;  // one form per digit k in [0, p)
  friend bool operator==(const TransitionRow&, const TransitionRow&) = default;
};

struct SchemeState {
  std::size_t p_index;
  LaurentPoly q;  // nonzero, symmetry-folded
};

struct Provenance {
  std::string P;
  std::string Q;
  std::vector<std::string> vars;
  bool symmetry_folded = false;
};

struct CongruenceScheme {
  SchemeKind kind = SchemeKind::linear;
  Modulus modulus{2, 1};
  // Polynomial data; empty for schemes that were loaded, converted or
  // minimized, since their states no longer carry a (P_i, Q_i) pair.
  std::vector<LaurentPoly> ptable;
  std::vector<SchemeState> states;
  std::vector<TransitionRow> transitions;
  std::vector<Coeff> initial;
  Provenance provenance;

  std::size_t state_count() const noexcept { return transitions.size(); }
  std::uint64_t p() const noexcept { return modulus.p(); }
  /// True when some right-hand side is 0, i.e. the automaton needs a sink.
  bool has_zero_entries() const;
  /// States of the equivalent automaton, counting the zero sink if used.
  std::size_t automaton_state_count() const { return state_count() + (has_zero_entries() ? 1 : 0); }
};

struct SchemeOptions {
  bool use_symmetry = true;
  std::optional<std::size_t> max_states;
};

/// p^(r-1) a - 1 + max(0, b - a + 1): the bound on dg(Q_i) for any
/// degree-like dg with a = dg(P), b = dg(Q).
std::int64_t degree_bound(std::int64_t a, std::int64_t b, std::uint64_t p, unsigned r);

/// Single-threaded state discovery.  Exposed so that individual steps can be
/// inspected; compute_scheme() is the usual entry point.
class SchemeBuilder {
 public:
  SchemeBuilder(const LaurentPoly& P, const LaurentPoly& Q, SchemeKind kind,
                SchemeOptions opts = {});
  ~SchemeBuilder();
  SchemeBuilder(const SchemeBuilder&) = delete;
  SchemeBuilder& operator=(const SchemeBuilder&) = delete;

  struct Step {
    std::size_t p_index;
    LaurentPoly q;
  };

  /// (P_hat, Q_hat) with A_i(p n + k) = ct[P_hat^n Q_hat], Q_hat folded.
  Step advance_state(std::size_t state, unsigned digit);

  const SymmetryGroup& symmetry() const noexcept { return sym_; }
  const std::vector<SchemeState>& states() const noexcept { return states_; }
  const LaurentPoly& ptable_entry(std::size_t i) const;
  std::size_t ptable_size() const noexcept { return entries_.size(); }

  CongruenceScheme run(Provenance provenance = {});

 private:
  struct PEntry;
  struct ClassIndex;

  PEntry& ready_entry(std::size_t index);
  std::size_t register_p(const LaurentPoly& poly);
  // Expresses a nonzero q through the states of its class, creating a new
  // state when no match exists.
  LinearForm resolve(std::size_t p_index, LaurentPoly q);
  std::optional<LinearForm> match_exact(const ClassIndex& cls, const LaurentPoly& q) const;
  std::optional<LinearForm> match_scalar(const ClassIndex& cls, const LaurentPoly& q) const;
  LinearForm resolve_linear(std::size_t p_index, const LaurentPoly& q);
  std::uint32_t add_state(std::size_t p_index, LaurentPoly q);
  void check_degree_bounds(const LaurentPoly& q) const;

  Modulus mod_;
  SchemeKind kind_;
  SchemeOptions opts_;
  SymmetryGroup sym_;
  std::vector<std::unique_ptr<PEntry>> entries_;
  std::vector<SchemeState> states_;
  std::vector<std::unique_ptr<ClassIndex>> classes_;  // one per P-table entry
  struct Bound {
    DegreeKind kind;
    std::size_t var;
    std::int64_t limit;
  };
  std::vector<Bound> bounds_;
};

CongruenceScheme compute_scheme(const LaurentPoly& P, const LaurentPoly& Q, SchemeKind kind,
                                SchemeOptions opts = {}, Provenance provenance = {});

/// Default cap on states/nodes created by conversions and BFS closures;
/// the CTSCHEME_NODE_CAP environment variable overrides it.
std::size_t default_node_cap();

/// Expands a scaling scheme into an automatic one whose states are the
/// reachable pairs (j, alpha) standing for alpha * A_j.
CongruenceScheme scaling_to_automatic(const CongruenceScheme& s,
                                      std::size_t max_states = default_node_cap());

/// Moore partition refinement on an automatic scheme (with an implicit zero
/// sink).  The quotient is renumbered breadth-first from state 0.
CongruenceScheme minimize(const CongruenceScheme& s);

/// Scaling scheme whose states are distinct sequences up to scalar
/// multiples.  Goes through scaling_to_automatic and minimize(), then grows a
/// scaling scheme breadth-first from state 0, reusing the first earlier state
/// whose sequence is an exact multiple (decided on the product automaton).
/// Accepts scaling or automatic input.
CongruenceScheme reduce_scaling(const CongruenceScheme& s,
                                std::size_t max_states = default_node_cap());

/// Structural checks shared by deserialize() and the tests: shapes, index
/// ranges, coefficient ranges, kind arity, digit-0 fixed point.  Throws
/// FormatError naming the violated field.
void validate(const CongruenceScheme& s);

/// JSON ("ctscheme-v1"), deterministic byte for byte.
std::string serialize(const CongruenceScheme& s);
CongruenceScheme deserialize(const std::string& text);

/// Graphviz rendering of an automatic or scaling scheme.
std::string export_dot(const CongruenceScheme& s);

}  // namespace ctscheme
