#pragma once

#include <optional>
#include <string>
#include <vector>

#include "speclab/am.hpp"
#include "speclab/smt.hpp"
#include "speclab/sym.hpp"

namespace speclab {

struct Policy {
  struct Cell {
    std::string symbol;  // empty for a numeric address
    Word addr = 0;
    bool deref = false;  // the cell the named cell points to
  };
  std::vector<std::string> low_regs;
  std::vector<Cell> low_mem;
};

// Lines: `low reg NAME`, `low mem ADDR`, `low mem SYMBOL`, `low mem *SYMBOL`.
// `#` and `;` start comments. Throws ParseError.
Policy parse_policy(const std::string &text);
Policy load_policy(const std::string &path);

enum class CheckMode { Sni, SeqCt, Gni };
const char *to_string(CheckMode m);
std::optional<CheckMode> parse_mode(const std::string &s);

struct CheckOptions {
  Semantics sem;
  Word window = kDefaultWindow;
  std::size_t rsb_size = kDefaultRsbSize;
  CheckMode mode = CheckMode::Sni;
  ExploreOptions explore;
  SolverConfig solver;
  SymInit init;              // registers fixed to constants, fixed memory
  std::string dump_traces;   // directory, empty for none
};

struct Witness {
  Config first, second;
  Trace first_trace, second_trace;
  std::size_t index = 0;     // first differing position in the compared projection
  std::string check;         // "memory" or "control"
};

enum class VerdictKind { Secure, Insecure, Unknown };
const char *to_string(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<Witness> witness;
  std::string cause;
  std::size_t paths = 0;
  std::size_t queries = 0;
  double seconds = 0;
};

Verdict check_program(const Program &p, const Policy &pol, const CheckOptions &opt);

// Replays a witness concretely: low-equivalent inputs, and traces that differ
// in the way the mode requires. Returns an empty string on success.
std::string replay_witness(const Program &p, const Policy &pol, const CheckOptions &opt, const Witness &w);

// JSON record of a verdict.
std::string verdict_json(const Program &p, const std::string &program_name, const CheckOptions &opt,
                         const Verdict &v);

}  // namespace speclab
