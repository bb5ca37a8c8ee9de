#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ctscheme/analyze.hpp"
#include "ctscheme/catalog.hpp"
#include "ctscheme/errors.hpp"
#include "ctscheme/polyparse.hpp"
#include "ctscheme/scheme.hpp"

namespace ctscheme::cli {

namespace {

// Failures that are not library errors but still count as bad input.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
  if (!f.flush()) throw UsageError("write to '" + path + "' failed");
}

CongruenceScheme load(const std::string& path) { return deserialize(read_file(path)); }

std::string summary(const CongruenceScheme& s) {
  std::ostringstream ss;
  ss << to_string(s.kind) << " " << s.p() << "-scheme with " << s.state_count()
     << " states modulo " << s.modulus.to_string();
  return ss.str();
}

std::string render_set(const std::vector<Coeff>& values) {
  std::ostringstream ss;
  ss << "{";
  for (std::size_t i = 0; i < values.size(); ++i) ss << (i ? ", " : "") << values[i];
  ss << "}";
  return ss.str();
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || !std::ranges::all_of(text, [](char c) { return c >= '0' && c <= '9'; })) {
    throw UsageError(what + ": expected a nonnegative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw UsageError(what + ": '" + text + "' is out of range");
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--primes: expected LO..HI, got '" + text + "'");
  const auto lo = parse_u64(text.substr(0, dots), "--primes");
  const auto hi = parse_u64(text.substr(dots + 2), "--primes");
  if (lo > hi) throw UsageError("--primes: empty range '" + text + "'");
  return {lo, hi};
}

struct ComputeArgs {
  std::string kind = "linear";
  std::string seq;
  std::string poly;
  std::string weight = "1";
  std::string vars = "x";
  std::uint64_t p = 0;
  unsigned r = 1;
  bool no_symmetry = false;
  bool reduce = false;
  std::optional<std::size_t> max_states;
  std::string output;
};

void cmd_compute(const ComputeArgs& a, std::ostream& out) {
  ExprSource P, Q;
  if (!a.seq.empty()) {
    if (!a.poly.empty()) throw UsageError("give either --seq or --poly, not both");
    const auto def = builtin(a.seq);
    P = def.P();
    Q = def.Q();
  } else {
    if (a.poly.empty()) throw UsageError("one of --seq or --poly is required");
    const auto vars = split_vars(a.vars);
    P = {a.poly, vars};
    Q = {a.weight, vars};
  }
  const SchemeKind kind = parse_kind(a.kind);
  if (a.reduce && kind != SchemeKind::scaling) throw UsageError("--reduce needs --kind scaling");
  const Modulus mod(a.p, a.r);
  SchemeOptions opts;
  opts.use_symmetry = !a.no_symmetry;
  opts.max_states = a.max_states;
  Provenance prov{P.text, Q.text, P.vars, false};
  auto s = compute_scheme(parse_laurent(P, mod), parse_laurent(Q, mod), kind, opts, prov);
  if (a.reduce) s = reduce_scaling(s);
  if (!a.output.empty()) write_output(a.output, serialize(s), out);
  out << summary(s) << "\n";
}

void cmd_crt(const std::vector<std::string>& items, std::ostream& out) {
  std::vector<std::pair<BigIndex, BigIndex>> pairs;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("crt: expected V:M, got '" + item + "'");
    const BigIndex v = parse_big_index(item.substr(0, colon));
    const BigIndex m = parse_big_index(item.substr(colon + 1));
    if (m == 0) throw UsageError("crt: modulus must be positive in '" + item + "'");
    pairs.emplace_back(v, m);
  }
  const auto [v, m] = crt_combine(pairs);
  out << v << " modulo " << m << "\n";
}

void cmd_census(const std::string& seq, std::uint64_t p, unsigned rmax, bool list, std::ostream& out) {
  const auto def = builtin(seq);
  const auto rows = residue_census(def.P(), def.Q(), p, rmax);
  out << std::left << std::setw(4) << "r" << std::setw(10) << "N(r)" << std::setw(10) << "A(r)"
      << "P(r)\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(4) << row.r << std::setw(10) << row.missing << std::setw(10)
        << row.additional << std::fixed << std::setprecision(4) << row.proportion << "\n";
    if (list) out << "    " << render_set(row.residues) << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Congruence schemes for constant-term sequences modulo prime powers", "ctscheme"};
  app.require_subcommand(1);

  ComputeArgs ca;
  auto* compute = app.add_subcommand("compute", "compute a scheme and write it as JSON");
  compute->add_option("--kind", ca.kind, "linear, scaling or automatic")->capture_default_str();
  compute->add_option("--seq", ca.seq, "built-in sequence name");
  compute->add_option("--poly", ca.poly, "the polynomial P");
  compute->add_option("--weight", ca.weight, "the polynomial Q")->capture_default_str();
  compute->add_option("--vars", ca.vars, "comma-separated variable names")->capture_default_str();
  compute->add_option("-p", ca.p, "prime")->required();
  compute->add_option("-r", ca.r, "exponent")->capture_default_str();
  compute->add_flag("--no-symmetry", ca.no_symmetry, "do not fold by the symmetries of P");
  compute->add_option("--max-states", ca.max_states, "abort beyond this many states");
  compute->add_flag("--reduce", ca.reduce, "merge states with proportional sequences (scaling)");
  compute->add_option("-o,--output", ca.output, "scheme file");

  std::string scheme_file, output, index, value_text;
  std::optional<std::size_t> cap;
  bool impossible = false, witness = false, list = false;
  unsigned max_digits = 64, jobs = 1, r = 2, rmax = 1;
  std::uint64_t p = 0;
  std::string seq, primes;
  std::vector<std::string> crt_items;

  auto* nth = app.add_subcommand("nth", "evaluate A(n)");
  nth->add_option("--scheme", scheme_file)->required();
  nth->add_option("--index", index, "decimal or B^E")->required();

  auto* values = app.add_subcommand("values", "attained (or never attained) residues");
  values->add_option("--scheme", scheme_file)->required();
  values->add_flag("--impossible", impossible);
  values->add_option("--cap", cap, "node cap for the closure");

  auto* valuation = app.add_subcommand("valuation", "scheme for p^min(nu_p(A(n)), r)");
  valuation->add_option("--scheme", scheme_file)->required();
  valuation->add_option("-o,--output", output);

  auto* minimize_cmd = app.add_subcommand("minimize", "minimal automatic scheme");
  minimize_cmd->add_option("--scheme", scheme_file)->required();
  minimize_cmd->add_option("-o,--output", output);

  auto* first = app.add_subcommand("first", "least n with A(n) = V");
  first->add_option("--scheme", scheme_file)->required();
  first->add_option("--value", value_text)->required();
  first->add_option("--max-digits", max_digits)->capture_default_str();

  auto* dot = app.add_subcommand("dot", "Graphviz rendering");
  dot->add_option("--scheme", scheme_file)->required();
  dot->add_option("-o,--output", output);

  auto* crt = app.add_subcommand("crt", "combine residues V:M with coprime moduli");
  crt->add_option("items", crt_items)->required();

  auto* scan = app.add_subcommand("scan", "is A(n) = 0 mod p^r attained, per prime (JSON lines)");
  scan->add_option("--seq", seq)->required();
  scan->add_option("-r", r)->capture_default_str();
  scan->add_option("--primes", primes, "LO..HI, inclusive")->required();
  scan->add_flag("--witness", witness, "also report the least n");
  scan->add_option("--jobs", jobs)->capture_default_str();

  auto* census = app.add_subcommand("census", "residues never attained mod p^r, r = 1..rmax");
  census->add_option("--seq", seq)->required();
  census->add_option("-p", p)->required();
  census->add_option("--rmax", rmax)->required();
  census->add_flag("--list", list, "print the residues themselves");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (compute->parsed()) {
      cmd_compute(ca, out);
    } else if (nth->parsed()) {
      out << nth_term(load(scheme_file), parse_big_index(index)) << "\n";
    } else if (values->parsed()) {
      const auto s = load(scheme_file);
      const std::size_t node_cap = cap.value_or(default_node_cap());
      out << render_set(impossible ? impossible_values(s, node_cap) : value_set(s, node_cap)) << "\n";
    } else if (valuation->parsed()) {
      const auto v = valuation_scheme(load(scheme_file));
      if (!output.empty()) write_output(output, serialize(v), out);
      out << summary(v) << "\n";
      // A zero residue only says nu >= r; mod p^r cannot tell r from anything larger.
      const auto attained = value_set(v);
      std::vector<std::string> vals;
      for (Coeff x : attained) {
        if (x != 0) vals.push_back(std::to_string(v.modulus.valuation(x)));
      }
      if (attained.front() == 0) vals.push_back(">=" + std::to_string(v.modulus.r()));
      out << "valuations {";
      for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? ", " : "") << vals[i];
      out << "}\n";
    } else if (minimize_cmd->parsed()) {
      const auto s = load(scheme_file);
      const auto m = minimize(s.kind == SchemeKind::scaling ? scaling_to_automatic(s) : s);
      if (!output.empty()) write_output(output, serialize(m), out);
      out << summary(m) << "\n";
    } else if (first->parsed()) {
      const auto s = load(scheme_file);
      const Coeff target = parse_u64(value_text, "--value") % s.modulus.m();
      const auto n = first_index(s, target, max_digits);
      out << (n ? n->str() : std::string("none")) << "\n";
    } else if (dot->parsed()) {
      write_output(output, export_dot(load(scheme_file)), out);
    } else if (crt->parsed()) {
      cmd_crt(crt_items, out);
    } else if (scan->parsed()) {
      const auto def = builtin(seq);
      const auto [lo, hi] = parse_range(primes);
      ScanOptions opts;
      opts.witness = witness;
      opts.jobs = std::max(1u, jobs);
      const auto reports = divisibility_scan(def.P(), def.Q(), primes_in(lo, hi), r, 0, opts);
      int status = 0;
      for (const auto& rep : reports) {
        out << render_scan_json(rep) << "\n";
        if (!rep.error.empty()) {
          err << "p = " << rep.prime << ": " << rep.error << "\n";
          status = 2;
        }
      }
      return status;
    } else if (census->parsed()) {
      cmd_census(seq, p, rmax, list, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.error_class()) {
      case ErrorClass::usage: return 1;
      case ErrorClass::resource: return 2;
      case ErrorClass::invariant: return 3;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace ctscheme::cli
