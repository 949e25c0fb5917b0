#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "speclab/am_engine.hpp"
#include "speclab/ns.hpp"

namespace speclab {

struct SymNode;
struct SymMemNode;
using SymExpr = std::shared_ptr<const SymNode>;
using SymMem = std::shared_ptr<const SymMemNode>;
using MemoryImage = std::map<Word, Word>;

struct SymNode {
  enum class Kind { Const, Var, Ite, Unary, Binary, Read };
  Kind kind = Kind::Const;
  Value value;        // Const
  std::string name;   // Var
  UnOp uop = UnOp::Neg;
  BinOp bop = BinOp::Add;
  SymExpr a, b, c;    // operands; Ite is (a ? b : c), Read address is a
  SymMem mem;         // Read
};

// A base array, optionally with fixed contents (unmapped cells hold 0), under
// a chain of writes.
struct SymMemNode {
  std::string name;                          // base only
  std::shared_ptr<const MemoryImage> image;  // base only, may be null
  SymMem prev;                               // null for the base
  SymExpr addr, val;
  bool is_base() const { return !prev; }
};

// Builders fold constants and simplify linear address arithmetic. Division
// by a constant zero throws EvalError.
SymExpr sym_const(Value v);
SymExpr sym_word(Word w, unsigned width);
SymExpr sym_var(const std::string &name);
SymExpr sym_unary(UnOp op, SymExpr x, unsigned width);
SymExpr sym_binary(BinOp op, SymExpr x, SymExpr y, unsigned width);
SymExpr sym_ite(SymExpr cond, SymExpr then, SymExpr otherwise);
SymMem sym_base(const std::string &name, std::shared_ptr<const MemoryImage> image = nullptr);
SymMem sym_write(SymMem m, SymExpr addr, SymExpr val);
SymExpr sym_read(const SymMem &m, SymExpr addr, unsigned width);

// Conjunction of 0/1 conditions, as a 0/1 expression; empty is 1.
SymExpr sym_all(const std::vector<SymExpr> &cs, unsigned width);

bool is_const(const SymExpr &e);
bool sym_equal(const SymExpr &a, const SymExpr &b);
bool sym_mem_equal(const SymMem &a, const SymMem &b);
std::string to_string(const SymExpr &e);

// Definitely equal / definitely different for any valuation (false when
// unknown).
bool must_equal(const SymExpr &a, const SymExpr &b);
bool must_differ(const SymExpr &a, const SymExpr &b);

// Free variables and array reads (address expressions against each base).
void collect_vars(const SymExpr &e, std::set<std::string> &vars, std::set<std::string> &arrays);
void collect_base_reads(const SymExpr &e, std::vector<std::pair<SymMem, SymExpr>> &reads);

struct Valuation {
  std::map<std::string, Word> vars;                     // missing variables are 0
  std::map<std::string, std::map<Word, Word>> arrays;   // missing cells are 0

  Word var(const std::string &n) const;
  Word cell(const std::string &array, Word addr) const;
};

// Throws EvalError on division by zero.
Value sym_eval(const SymExpr &e, const Valuation &mu, unsigned width);

using SymObs = BasicObs<SymExpr>;
using SymTrace = std::vector<SymObs>;
bool operator==(const SymObs &a, const SymObs &b);
std::string to_string(const SymObs &o);
std::string format_sym_trace(const SymTrace &t, const std::string &sep = " . ");

struct SymConfig {
  Value pc;
  std::vector<SymExpr> regs;
  SymMem mem;

  const SymExpr &reg(RegId r) const { return regs[r]; }
  bool operator==(const SymConfig &o) const;
};

struct SymInit {
  std::map<RegId, Word> concrete_regs;          // the rest are r_<name>
  std::shared_ptr<const MemoryImage> memory;    // fixed initial memory; otherwise array m0
};

SymConfig sym_initial(const Program &p, const SymInit &init);

// Thrown when exploration hits a bound; not a stuck state.
class ExplorationLimit : public Error {
 public:
  using Error::Error;
};

struct Decision {
  Word site;
  std::vector<SymExpr> alts;  // pairwise exclusive, jointly exhaustive
  std::size_t taken;
};

// Resolves symbolic control decisions by evaluating them under a seed
// valuation and records them.
class PathChooser {
 public:
  PathChooser(Valuation seed, unsigned width, std::size_t site_cap)
      : mu_(std::move(seed)), width_(width), site_cap_(site_cap) {}

  // Picks the alternative that holds under the seed and appends its SymPc.
  std::size_t choose(Word site, std::vector<SymExpr> alts, SymTrace &out);
  Word value(const SymExpr &e) const;
  const Valuation &seed() const { return mu_; }
  const std::vector<Decision> &decisions() const { return decisions_; }

 private:
  Valuation mu_;
  unsigned width_;
  std::size_t site_cap_;
  std::vector<Decision> decisions_;
  std::map<Word, std::size_t> visits_;
};

// Non-speculative symbolic step. Throws EvalError when stuck.
void sym_ns_step(const Program &p, SymConfig &c, SymTrace &out, PathChooser &ch);

struct SymDomain {
  using V = SymExpr;
  using Cfg = SymConfig;

  const Program &p;
  PathChooser &ch;

  Value pc(const Cfg &c) const { return c.pc; }
  void set_pc(Cfg &c, Value v) const { c.pc = v; }
  void add_sp(Cfg &c, Word delta) const;
  void step(Cfg &c, SymTrace &out) const { sym_ns_step(p, c, out, ch); }
  SymExpr label(Value v) const { return sym_const(v); }
};

struct SymRun {
  SymTrace trace;
  std::vector<Decision> decisions;
  RunStatus status = RunStatus::Terminated;  // FuelExhausted also covers the unrolling cap
  std::string error;
  Valuation seed;
  std::size_t steps = 0;

  std::vector<SymExpr> path_condition() const;
};

enum class SatStatus { Sat, Unsat, Unknown };

struct PathModel {
  SatStatus status = SatStatus::Unknown;
  Valuation model;
  std::string reason;
};

// Satisfiability of a conjunction of 0/1 constraints (each asserted nonzero),
// with a model covering every variable and base-array read they mention.
class PathSolver {
 public:
  virtual ~PathSolver() = default;
  virtual PathModel solve(const std::vector<SymExpr> &constraints, unsigned width) = 0;
};

struct ExploreOptions {
  std::size_t fuel = kDefaultFuel;
  std::size_t site_cap = 8;
  std::size_t max_paths = 4096;
};

struct Exploration {
  std::vector<SymRun> runs;
  bool complete = true;
  std::string incomplete_reason;
  std::size_t queries = 0;
};

// Runs the symbolic always-mispredict semantics once, following `seed`.
SymRun sym_am_run(const Program &p, const SymConfig &init, const AmOptions &opt, const Valuation &seed,
                  const ExploreOptions &xo = {});

// Depth-first concolic enumeration of every feasible path.
Exploration sym_am_explore(const Program &p, const SymConfig &init, const AmOptions &opt, PathSolver &solver,
                           const ExploreOptions &xo = {});

// Evaluates a run under mu, dropping SymPc. Throws Error when mu violates the
// path condition.
Trace concretize(const SymRun &run, const Valuation &mu, unsigned width);

// Concrete initial configuration described by a valuation of sym_initial's
// variables (suffix "" or "_1"/"_2" for self-composed models).
Config concrete_config(const Program &p, const SymInit &init, const Valuation &mu, const std::string &suffix = "");

// Writes run_<i>.trace files, one observation per line, path condition last.
void dump_sym_traces(const std::string &dir, const Exploration &ex);

}  // namespace speclab
