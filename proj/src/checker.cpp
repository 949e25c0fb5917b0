#include "speclab/checker.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace speclab {

namespace {

std::string trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<Word> parse_number(const std::string &s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    Word v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::exception &) {
  }
  return std::nullopt;
}

}  // namespace

Policy parse_policy(const std::string &text) {
  Policy pol;
  std::istringstream in(text);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.resize(cut);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string low, what, name, extra;
    ls >> low >> what >> name;
    if (low != "low" || name.empty() || (ls >> extra))
      throw ParseError(lineno, 1, "expected 'low reg NAME' or 'low mem ADDR|SYMBOL'");
    if (what == "reg") {
      pol.low_regs.push_back(name);
    } else if (what == "mem") {
      Policy::Cell c;
      if (name[0] == '*') {
        c.deref = true;
        name = name.substr(1);
      }
      if (auto n = parse_number(name)) c.addr = *n;
      else c.symbol = name;
      if (name.empty()) throw ParseError(lineno, 1, "missing address");
      pol.low_mem.push_back(c);
    } else {
      throw ParseError(lineno, 1, "unknown policy item '" + what + "'");
    }
  }
  return pol;
}

Policy load_policy(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read policy file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_policy(ss.str());
}

const char *to_string(CheckMode m) {
  switch (m) {
    case CheckMode::Sni: return "sni";
    case CheckMode::SeqCt: return "seqct";
    case CheckMode::Gni: return "gni";
  }
  return "?";
}

std::optional<CheckMode> parse_mode(const std::string &s) {
  if (s == "sni") return CheckMode::Sni;
  if (s == "seqct") return CheckMode::SeqCt;
  if (s == "gni") return CheckMode::Gni;
  return std::nullopt;
}

const char *to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Secure: return "secure";
    case VerdictKind::Insecure: return "insecure";
    case VerdictKind::Unknown: return "unknown";
  }
  return "?";
}

namespace {

Word resolve_cell(const Program &p, const Policy::Cell &c) {
  if (c.symbol.empty()) return c.addr & p.mask();
  auto it = p.symbols().find(c.symbol);
  if (it == p.symbols().end()) throw Error("policy names unknown memory symbol '" + c.symbol + "'");
  return it->second;
}

Word mem_at(const Config &c, Word a) {
  auto it = c.mem.find(a);
  return it == c.mem.end() ? 0 : it->second;
}

AmOptions run_options(const CheckOptions &opt) {
  AmOptions ao;
  if (opt.mode != CheckMode::SeqCt) ao.sem = opt.sem;
  ao.window = opt.window;
  ao.rsb_size = opt.rsb_size;
  return ao;
}

// First index where the projections the mode compares differ, if they do
// while the mode's precondition holds.
std::optional<std::size_t> distinguishing_index(CheckMode mode, const RunResult &a, const RunResult &b) {
  auto first_diff = [](const Trace &x, const Trace &y) -> std::optional<std::size_t> {
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] != y[i]) return i;
    if (x.size() != y.size()) return n;
    return std::nullopt;
  };
  if (mode == CheckMode::Sni) {
    if (nspec_project(a.trace) != nspec_project(b.trace)) return std::nullopt;
    return first_diff(spec_project(a.trace), spec_project(b.trace));
  }
  if (auto i = first_diff(a.trace, b.trace)) return i;
  if (a.status != b.status) return a.trace.size();
  return std::nullopt;
}

struct Checker {
  const Program &p;
  const Policy &pol;
  const CheckOptions &opt;
  unsigned w = p.width();
  SymConfig init = sym_initial(p, opt.init);
  std::vector<SymExpr> low_terms;  // registers and cells that must agree
  std::size_t queries = 0;
  std::string unknown;

  Checker(const Program &p_, const Policy &pol_, const CheckOptions &opt_) : p(p_), pol(pol_), opt(opt_) {
    for (const auto &name : pol.low_regs) {
      auto r = p.find_reg(name);
      if (!r || *r == kPc) continue;
      if (!is_const(init.regs[*r])) low_terms.push_back(init.regs[*r]);
    }
    for (const auto &c : pol.low_mem) {
      SymExpr e = sym_read(init.mem, sym_word(resolve_cell(p, c), w), w);
      if (c.deref) e = sym_read(init.mem, e, w);
      if (!is_const(e)) low_terms.push_back(e);
    }
  }

  SmtQuery base_query(const SymRun &run) {
    SmtQuery q(w);
    for (const auto &t : low_terms) {
      q.assert_formula("(= " + q.term(t, "_1") + " " + q.term(t, "_2") + ")");
      q.request_model(t, "_1");
      q.request_model(t, "_2");
    }
    for (const auto &o : run.trace)
      if (o.val) {
        q.request_model(o.val, "_1");
        q.request_model(o.val, "_2");
      }
    return q;
  }

  template <class It>
  void assert_path(SmtQuery &q, It b, It e) {
    for (; b != e; ++b)
      if (b->kind == ObsKind::SymPc) {
        q.assert_nonzero(b->val, "_1");
        q.assert_nonzero(b->val, "_2");
      }
  }

  // Equality of one observation across the copies; empty when trivially true.
  std::string obs_eq(SmtQuery &q, const SymObs &o) {
    if (o.kind == ObsKind::SymPc || !o.val || is_const(o.val)) return "";
    return "(= " + q.term(o.val, "_1") + " " + q.term(o.val, "_2") + ")";
  }

  template <class It>
  void assert_equal_obs(SmtQuery &q, It b, It e) {
    for (; b != e; ++b)
      if (auto f = obs_eq(q, *b); !f.empty()) q.assert_formula(f);
  }

  // Sat model, or nothing. Solver failures are remembered.
  std::optional<Valuation> solve(const SmtQuery &q) {
    ++queries;
    SmtAnswer a = run_solver(q, opt.solver);
    if (a.status == SatStatus::Sat) return a.model;
    if (a.status == SatStatus::Unknown && unknown.empty()) unknown = "solver: " + a.reason;
    return std::nullopt;
  }

  // Some observation in [b, e) differs.
  template <class It>
  std::optional<Valuation> differing(const SymRun &run, const std::vector<SymObs> &equal_part,
                                     const std::vector<SymObs> &pc_part, It b, It e) {
    SmtQuery q = base_query(run);
    assert_path(q, pc_part.begin(), pc_part.end());
    assert_equal_obs(q, equal_part.begin(), equal_part.end());
    std::string any;
    for (; b != e; ++b)
      if (auto f = obs_eq(q, *b); !f.empty()) any += " (not " + f + ")";
    if (any.empty()) return std::nullopt;
    q.assert_formula("(or" + any + ")");
    return solve(q);
  }

  // A branch condition at position k of `seq` that the copies decide
  // differently, after agreeing on everything up to k.
  std::optional<Valuation> diverging(const SymRun &run, const std::vector<SymObs> &fixed_pc,
                                     const std::vector<SymObs> &fixed_eq, const std::vector<SymObs> &seq,
                                     std::size_t k) {
    const SymExpr &se = seq[k].val;
    if (is_const(se)) return std::nullopt;
    SmtQuery q = base_query(run);
    assert_path(q, fixed_pc.begin(), fixed_pc.end());
    assert_path(q, seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(k));
    assert_equal_obs(q, fixed_eq.begin(), fixed_eq.end());
    std::string zero = q.literal(0);
    q.assert_formula("(not (= (= " + q.term(se, "_1") + " " + zero + ") (= " + q.term(se, "_2") + " " + zero + ")))");
    return solve(q);
  }

  std::vector<std::pair<std::string, Valuation>> candidates(const SymRun &run) {
    std::vector<std::pair<std::string, Valuation>> out;
    const SymTrace &t = run.trace;
    if (opt.mode == CheckMode::Sni) {
      SymTrace ns = nspec_project(t), sp = spec_project(t);
      if (auto m = differing(run, ns, t, sp.begin(), sp.end())) {
        out.emplace_back("memory", std::move(*m));
        return out;
      }
      for (std::size_t k = 0; k < sp.size(); ++k)
        if (sp[k].kind == ObsKind::SymPc)
          if (auto m = diverging(run, ns, ns, sp, k)) {
            out.emplace_back("control", std::move(*m));
            return out;
          }
      return out;
    }
    // SeqCT runs the non-speculative semantics; GNI compares whole traces.
    if (auto m = differing(run, {}, t, t.begin(), t.end())) {
      out.emplace_back("memory", std::move(*m));
      return out;
    }
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k].kind == ObsKind::SymPc)
        if (auto m = diverging(run, {}, {}, t, k)) {
          out.emplace_back("control", std::move(*m));
          return out;
        }
    return out;
  }
};

}  // namespace

std::string replay_witness(const Program &p, const Policy &pol, const CheckOptions &opt, const Witness &w) {
  for (const auto &name : pol.low_regs) {
    auto r = p.find_reg(name);
    if (r && !(w.first.reg(*r) == w.second.reg(*r))) return "low register " + name + " differs";
  }
  for (const auto &c : pol.low_mem) {
    Word a = resolve_cell(p, c);
    Word x = mem_at(w.first, a), y = mem_at(w.second, a);
    if (c.deref) {
      x = mem_at(w.first, x);
      y = mem_at(w.second, y);
    }
    if (x != y) return "low memory cell " + (c.symbol.empty() ? std::to_string(a) : c.symbol) + " differs";
  }
  AmOptions ao = run_options(opt);
  RunResult a = am_run(p, w.first, ao, opt.explore.fuel);
  RunResult b = am_run(p, w.second, ao, opt.explore.fuel);
  if (a.trace != w.first_trace || b.trace != w.second_trace) return "replayed traces differ from the recorded ones";
  auto idx = distinguishing_index(opt.mode, a, b);
  if (!idx) return "replayed runs are not distinguishable";
  if (*idx != w.index) return "replayed runs differ at a different position";
  return {};
}

Verdict check_program(const Program &p, const Policy &pol, const CheckOptions &opt) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  Checker ck(p, pol, opt);
  SmtPathSolver solver(opt.solver);
  AmOptions ao = run_options(opt);
  Exploration ex = sym_am_explore(p, ck.init, ao, solver, opt.explore);
  if (!opt.dump_traces.empty()) dump_sym_traces(opt.dump_traces, ex);
  v.paths = ex.runs.size();
  std::string cause = ex.complete ? "" : ex.incomplete_reason;
  auto finish = [&](VerdictKind k) {
    v.kind = k;
    v.queries = ex.queries + ck.queries;
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
  };
  for (const auto &run : ex.runs) {
    if (run.status == RunStatus::FuelExhausted) continue;  // already makes the exploration incomplete
    for (auto &[check, model] : ck.candidates(run)) {
      Witness w;
      w.check = check;
      w.first = concrete_config(p, opt.init, model, "_1");
      w.second = concrete_config(p, opt.init, model, "_2");
      RunResult a = am_run(p, w.first, ao, opt.explore.fuel);
      RunResult b = am_run(p, w.second, ao, opt.explore.fuel);
      w.first_trace = a.trace;
      w.second_trace = b.trace;
      auto idx = distinguishing_index(opt.mode, a, b);
      w.index = idx.value_or(0);
      std::string bad = idx ? replay_witness(p, pol, opt, w) : "replayed runs are not distinguishable";
      if (bad.empty()) {
        v.witness = std::move(w);
        return finish(VerdictKind::Insecure);
      }
      if (cause.empty()) cause = "counterexample did not replay: " + bad;
    }
  }
  if (cause.empty()) cause = ck.unknown;
  v.cause = cause;
  return finish(cause.empty() ? VerdictKind::Secure : VerdictKind::Unknown);
}

namespace {

nlohmann::json config_json(const Program &p, const Config &c) {
  nlohmann::json regs = nlohmann::json::object();
  for (RegId r = 1; r < p.reg_count(); ++r) regs[p.reg_name(r)] = c.regs[r].w;
  nlohmann::json mem = nlohmann::json::object();
  for (const auto &[a, val] : c.mem) mem[std::to_string(a)] = val;
  return {{"registers", regs}, {"memory", mem}};
}

}  // namespace

std::string verdict_json(const Program &p, const std::string &program_name, const CheckOptions &opt,
                         const Verdict &v) {
  nlohmann::json j;
  j["schema"] = "speclab-verdict/1";
  j["program"] = program_name;
  j["semantics"] = opt.mode == CheckMode::SeqCt ? "ns" : opt.sem.id();
  j["mode"] = to_string(opt.mode);
  j["window"] = opt.window;
  j["verdict"] = to_string(v.kind);
  if (!v.cause.empty()) j["cause"] = v.cause;
  j["paths"] = v.paths;
  j["queries"] = v.queries;
  j["seconds"] = v.seconds;
  if (v.witness) {
    const Witness &w = *v.witness;
    j["witness"] = {{"check", w.check},
                    {"index", w.index},
                    {"first", config_json(p, w.first)},
                    {"second", config_json(p, w.second)},
                    {"first_trace", format_trace(w.first_trace)},
                    {"second_trace", format_trace(w.second_trace)}};
  }
  return j.dump(2);
}

}  // namespace speclab
