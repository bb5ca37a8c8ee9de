#include "ctscheme/analyze.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ctscheme {

namespace {

struct NodeHash {
  std::size_t operator()(const std::pair<std::uint32_t, Coeff>& x) const noexcept {
    return std::hash<Coeff>{}(x.second * 0x9e3779b97f4a7c15ULL ^ x.first);
  }
};

struct VecHash {
  std::size_t operator()(const std::vector<Coeff>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto x : v) h = (h ^ x) * 0x100000001b3ULL;
    return h;
  }
};

BigIndex parse_decimal(const std::string& text, std::size_t offset) {
  if (text.empty()) throw SyntaxError(offset, "expected decimal digits");
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw SyntaxError(offset + i, "expected a decimal digit");
    }
  }
  return BigIndex(text);
}

CongruenceScheme as_minimal_automaton(const CongruenceScheme& s) {
  if (s.kind == SchemeKind::linear) throw KindMismatch("a scaling or automatic scheme is required");
  return minimize(scaling_to_automatic(s));
}

BigIndex inverse_mod(const BigIndex& a, const BigIndex& m) {
  BigIndex old_r = a % m, r = m, old_s = 1, s = 0;
  while (r != 0) {
    BigIndex q = old_r / r;
    BigIndex t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) throw NonCoprimeModuli("moduli share a common factor");
  BigIndex x = old_s % m;
  return x < 0 ? x + m : x;
}

}  // namespace

BigIndex parse_big_index(const std::string& raw) {
  std::size_t lead = 0;
  while (lead < raw.size() && std::isspace(static_cast<unsigned char>(raw[lead]))) ++lead;
  std::string text = raw.substr(lead);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  const auto caret = text.find('^');
  if (caret == std::string::npos) return parse_decimal(text, lead);
  const BigIndex base = parse_decimal(text.substr(0, caret), lead);
  const BigIndex exp = parse_decimal(text.substr(caret + 1), lead + caret + 1);
  if (exp > 1'000'000) throw SyntaxError(lead + caret + 1, "exponent too large");
  return boost::multiprecision::pow(base, exp.convert_to<unsigned>());
}

std::vector<std::uint64_t> digits_lsd(const BigIndex& n, std::uint64_t p) {
  std::vector<std::uint64_t> out;
  if (n < 0) throw ContextMismatch("digits_lsd: negative index");
  BigIndex x = n;
  const BigIndex base = p;
  while (x > 0) {
    BigIndex q, rem;
    boost::multiprecision::divide_qr(x, base, q, rem);
    out.push_back(rem.convert_to<std::uint64_t>());
    x = std::move(q);
  }
  return out;
}

Coeff nth_term(const CongruenceScheme& s, const BigIndex& n) {
  const Modulus& mod = s.modulus;
  const auto digits = digits_lsd(n, s.p());
  if (s.kind != SchemeKind::linear) {
    std::uint32_t state = 0;
    Coeff coeff = 1 % mod.m();
    for (auto d : digits) {
      const auto& form = s.transitions[state].digits[d];
      if (form.empty()) return 0;
      coeff = mod.mul(coeff, form.front().coeff);
      if (coeff == 0) return 0;
      state = form.front().state;
    }
    return mod.mul(coeff, s.initial[state]);
  }
  std::vector<Coeff> v(s.state_count(), 0), w(s.state_count());
  v[0] = 1 % mod.m();
  for (auto d : digits) {
    std::ranges::fill(w, 0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0) continue;
      for (const auto& t : s.transitions[i].digits[d]) {
        w[t.state] = mod.add(w[t.state], mod.mul(v[i], t.coeff));
      }
    }
    std::swap(v, w);
  }
  Coeff acc = 0;
  for (std::size_t i = 0; i < v.size(); ++i) acc = mod.add(acc, mod.mul(v[i], s.initial[i]));
  return acc;
}

std::vector<Coeff> value_set(const CongruenceScheme& s, std::size_t node_cap) {
  const Modulus& mod = s.modulus;
  std::set<Coeff> values;
  auto over_cap = [&](std::size_t count) {
    if (count > node_cap) {
      throw NodeCapExceeded("value_set reached more than " + std::to_string(node_cap) + " vectors");
    }
  };
  if (s.kind != SchemeKind::linear) {
    using Node = std::pair<std::uint32_t, Coeff>;
    std::unordered_set<Node, NodeHash> seen;
    std::vector<Node> queue{{0, 1 % mod.m()}};
    seen.insert(queue.front());
    bool zero = false;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const auto [state, alpha] = queue[h];
      values.insert(mod.mul(alpha, s.initial[state]));
      for (const auto& form : s.transitions[state].digits) {
        const Coeff beta = form.empty() ? 0 : mod.mul(alpha, form.front().coeff);
        if (beta == 0) {
          zero = true;
          continue;
        }
        Node next{form.front().state, beta};
        if (seen.insert(next).second) {
          queue.push_back(next);
          over_cap(queue.size());
        }
      }
    }
    if (zero) values.insert(0);
    return {values.begin(), values.end()};
  }

  const std::size_t n = s.state_count();
  std::unordered_set<std::vector<Coeff>, VecHash> seen;
  std::vector<std::vector<Coeff>> queue;
  std::vector<Coeff> start(n, 0);
  start[0] = 1 % mod.m();
  seen.insert(start);
  queue.push_back(std::move(start));
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const std::vector<Coeff> v = queue[h];
    Coeff value = 0;
    for (std::size_t i = 0; i < n; ++i) value = mod.add(value, mod.mul(v[i], s.initial[i]));
    values.insert(value);
    for (std::size_t d = 0; d < s.p(); ++d) {
      std::vector<Coeff> w(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0) continue;
        for (const auto& t : s.transitions[i].digits[d]) {
          w[t.state] = mod.add(w[t.state], mod.mul(v[i], t.coeff));
        }
      }
      if (seen.insert(w).second) {
        queue.push_back(std::move(w));
        over_cap(queue.size());
      }
    }
  }
  return {values.begin(), values.end()};
}

std::vector<Coeff> impossible_values(const CongruenceScheme& s, std::size_t node_cap) {
  const auto attained = value_set(s, node_cap);
  std::vector<Coeff> out;
  std::size_t j = 0;
  for (Coeff v = 0; v < s.modulus.m(); ++v) {
    if (j < attained.size() && attained[j] == v) {
      ++j;
    } else {
      out.push_back(v);
    }
  }
  return out;
}

CongruenceScheme valuation_scheme(const CongruenceScheme& s) {
  if (s.kind == SchemeKind::linear) throw KindMismatch("valuation_scheme needs a scaling scheme");
  const Modulus& mod = s.modulus;
  CongruenceScheme v;
  v.kind = SchemeKind::scaling;
  v.modulus = mod;
  v.provenance = s.provenance;
  v.transitions = s.transitions;
  for (auto& row : v.transitions) {
    for (auto& form : row.digits) {
      for (auto& t : form) t.coeff = mod.p_power(mod.valuation(t.coeff));
    }
  }
  for (Coeff c : s.initial) v.initial.push_back(mod.p_power(mod.valuation(c)));
  return minimize(scaling_to_automatic(v));
}

std::optional<BigIndex> first_index(const CongruenceScheme& s, Coeff target, unsigned max_digits) {
  const CongruenceScheme a = as_minimal_automaton(s);
  const Modulus& mod = a.modulus;
  target %= mod.m();
  const auto attained = value_set(a);
  if (!std::ranges::binary_search(attained, target)) return std::nullopt;

  const std::size_t n = a.state_count();
  const std::size_t p = a.p();
  const std::size_t total = n + 1;  // state n is the zero sink
  std::vector<std::uint32_t> succ(total * p, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      const auto& form = a.transitions[i].digits[k];
      if (!form.empty()) succ[i * p + k] = form.front().state;
    }
  }
  std::vector<char> good(total);
  for (std::size_t i = 0; i < total; ++i) good[i] = (i < n ? a.initial[i] : 0) == target;
  if (good[0]) return BigIndex(0);

  // layers[j]: states reachable after exactly j digits
  std::vector<std::vector<char>> layers{std::vector<char>(total, 0)};
  layers[0][0] = 1;
  auto extend = [&] {
    const auto& prev = layers.back();
    std::vector<char> next(total, 0);
    for (std::size_t q = 0; q < total; ++q) {
      if (!prev[q]) continue;
      for (std::size_t k = 0; k < p; ++k) next[succ[q * p + k]] = 1;
    }
    layers.push_back(std::move(next));
  };

  std::vector<char> cur(total), pre(total);
  for (unsigned len = 1; len <= max_digits; ++len) {
    while (layers.size() < len) extend();
    cur = good;
    std::vector<std::uint64_t> digits(len, 0);
    bool feasible = true;
    for (std::size_t pos = len; pos-- > 0;) {
      bool found = false;
      for (std::size_t d = (pos + 1 == len ? 1 : 0); d < p && !found; ++d) {
        bool hit = false;
        for (std::size_t q = 0; q < total; ++q) {
          pre[q] = cur[succ[q * p + d]];
          hit = hit || (pre[q] && layers[pos][q]);
        }
        if (hit) {
          found = true;
          digits[pos] = d;
          std::swap(cur, pre);
        }
      }
      if (!found) {
        if (pos + 1 != len) throw InvariantViolation("first_index: lost a completable prefix");
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    BigIndex result = 0;
    for (std::size_t pos = len; pos-- > 0;) result = result * p + digits[pos];
    return result;
  }
  throw DigitCapExceeded("no index below " + std::to_string(p) + "^" + std::to_string(max_digits));
}

std::pair<BigIndex, BigIndex> crt_combine(const std::vector<std::pair<BigIndex, BigIndex>>& pairs) {
  BigIndex x = 0, m = 1;
  for (const auto& [value, modulus] : pairs) {
    if (modulus < 1) throw NonCoprimeModuli("moduli must be positive");
    BigIndex a = value % modulus;
    if (a < 0) a += modulus;
    if (boost::multiprecision::gcd(m, modulus) != 1) {
      throw NonCoprimeModuli("moduli " + m.str() + " and " + modulus.str() + " are not coprime");
    }
    BigIndex diff = (a - x) % modulus;
    if (diff < 0) diff += modulus;
    const BigIndex t = (diff * inverse_mod(m % modulus, modulus)) % modulus;
    x += m * t;
    m *= modulus;
    x %= m;
  }
  return {x, m};
}

std::pair<BigIndex, BigIndex> crt_combine(const std::vector<Residue>& residues) {
  std::vector<std::pair<BigIndex, BigIndex>> pairs;
  for (const auto& r : residues) pairs.emplace_back(BigIndex(r.value), BigIndex(r.modulus.m()));
  return crt_combine(pairs);
}

std::vector<CensusRow> residue_census(const ExprSource& P, const ExprSource& Q, std::uint64_t p,
                                      unsigned r_max, bool use_symmetry) {
  std::vector<CensusRow> rows;
  std::size_t prev = 0;
  for (unsigned r = 1; r <= r_max; ++r) {
    const Modulus mod(p, r);
    SchemeOptions opts;
    opts.use_symmetry = use_symmetry;
    const auto s = compute_scheme(parse_laurent(P, mod), parse_laurent(Q, mod), SchemeKind::scaling, opts);
    CensusRow row;
    row.r = r;
    row.residues = impossible_values(s);
    row.missing = row.residues.size();
    row.additional = static_cast<std::int64_t>(row.missing) - static_cast<std::int64_t>(p * prev);
    row.proportion = static_cast<double>(row.missing) / static_cast<double>(mod.m());
    prev = row.missing;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n) {
    if (is_prime(n)) out.push_back(n);
    if (n == UINT64_MAX) break;
  }
  return out;
}

namespace {

ScanReport scan_one(const ExprSource& P, const ExprSource& Q, std::uint64_t prime, unsigned r,
                    std::int64_t target, const ScanOptions& opts) {
  ScanReport rep;
  rep.prime = prime;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Modulus mod(prime, r);
    SchemeOptions so;
    so.use_symmetry = opts.use_symmetry;
    const auto s = compute_scheme(parse_laurent(P, mod), parse_laurent(Q, mod), SchemeKind::scaling, so);
    rep.states_scaling = s.state_count();
    const Coeff t = mod.reduce(target);
    if (t == 0) {
      const auto v = valuation_scheme(s);
      const auto vals = value_set(v);
      rep.zero_attained = std::ranges::binary_search(vals, Coeff{0});
      if (opts.witness && rep.zero_attained) rep.witness = first_index(v, 0);
    } else {
      const auto vals = value_set(s);
      rep.zero_attained = std::ranges::binary_search(vals, t);
      if (opts.witness && rep.zero_attained) rep.witness = first_index(s, t);
    }
  } catch (const std::exception& e) {
    rep.error = e.what();
  }
  rep.elapsed = std::chrono::steady_clock::now() - start;
  return rep;
}

}  // namespace

std::vector<ScanReport> divisibility_scan(const ExprSource& P, const ExprSource& Q,
                                          const std::vector<std::uint64_t>& primes, unsigned r,
                                          std::int64_t target, ScanOptions opts) {
  std::vector<std::uint64_t> sorted = primes;
  std::ranges::sort(sorted);
  std::vector<ScanReport> reports(sorted.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sorted.size(); i = next++) {
      reports[i] = scan_one(P, Q, sorted[i], r, target, opts);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(sorted.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return reports;
}

std::string render_scan_table(const std::vector<ScanReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "prime" << std::setw(8) << "zero" << std::setw(10) << "states"
      << std::setw(12) << "seconds" << "witness\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(8) << r.prime;
    if (!r.error.empty()) {
      out << "error: " << r.error << "\n";
      continue;
    }
    out << std::setw(8) << (r.zero_attained ? "yes" : "no") << std::setw(10) << r.states_scaling
        << std::setw(12) << std::fixed << std::setprecision(3) << r.elapsed.count()
        << (r.witness ? r.witness->str() : "-") << "\n";
  }
  return out.str();
}

std::string render_scan_json(const ScanReport& r) {
  nlohmann::ordered_json j;
  j["prime"] = r.prime;
  j["zero_attained"] = r.zero_attained;
  if (!r.witness) {
    j["witness"] = nullptr;
  } else if (*r.witness <= BigIndex(std::numeric_limits<std::uint64_t>::max())) {
    j["witness"] = r.witness->convert_to<std::uint64_t>();
  } else {
    j["witness"] = r.witness->str();
  }
  j["states_scaling"] = r.states_scaling;
  j["elapsed"] = r.elapsed.count();
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

}  // namespace ctscheme
