#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "speclab/sym.hpp"

namespace speclab {

struct SolverConfig {
  std::string path = "z3";
  std::vector<std::string> flags;
  unsigned timeout_s = 30;
  std::string dump_dir;  // when set, every query is also written there

  // SPECLAB_SOLVER, SPECLAB_SOLVER_FLAGS (space separated), SPECLAB_SOLVER_TIMEOUT.
  static SolverConfig from_env();
};

// One QF_ABV satisfiability query. Symbols get the suffix given when a term
// is added, so the same expression can be emitted once per copy.
class SmtQuery {
 public:
  explicit SmtQuery(unsigned width) : width_(width) {}

  unsigned width() const { return width_; }
  std::string term(const SymExpr &e, const std::string &suffix);
  std::string literal(Word w) const;
  // (not (= e 0))
  void assert_nonzero(const SymExpr &e, const std::string &suffix);
  void assert_formula(std::string f) { asserts_.push_back(std::move(f)); }
  // Adds the expression's variables and base-array cells to the model request.
  void request_model(const SymExpr &e, const std::string &suffix);

  std::string text() const;

  struct ModelItem {
    std::string var;           // variable, or
    std::string array;         // array cell at the address term
    std::string addr_term;
  };
  const std::vector<ModelItem> &model_items() const { return items_; }

 private:
  std::string mem_term(const SymMem &m, const std::string &suffix);
  std::string bool_of(const std::string &t) const;

  unsigned width_;
  std::set<std::string> vars_;
  std::map<std::string, std::string> arrays_;  // name -> definition ("" when free)
  std::vector<std::string> asserts_;
  std::vector<ModelItem> items_;
  std::set<std::string> requested_;
};

struct SmtAnswer {
  SatStatus status = SatStatus::Unknown;
  Valuation model;  // keys carry their suffixes
  std::string reason;
};

// Launches a fresh solver process for the query.
SmtAnswer run_solver(const SmtQuery &q, const SolverConfig &cfg);

// Parses solver output for the query (exposed for tests).
SmtAnswer parse_solver_output(const SmtQuery &q, const std::string &out);

class SmtPathSolver : public PathSolver {
 public:
  explicit SmtPathSolver(SolverConfig cfg) : cfg_(std::move(cfg)) {}
  PathModel solve(const std::vector<SymExpr> &constraints, unsigned width) override;
  std::size_t queries() const { return queries_; }
  const SolverConfig &config() const { return cfg_; }

 private:
  SolverConfig cfg_;
  std::size_t queries_ = 0;
};

}  // namespace speclab
