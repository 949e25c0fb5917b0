#pragma once

#include <map>
#include <string>
#include <vector>

#include "speclab/trace.hpp"
#include "speclab/uasm.hpp"

namespace speclab {

struct Config {
  Value pc;
  std::vector<Value> regs;       // indexed by RegId; the pc slot is unused
  std::map<Word, Word> mem;      // unmapped cells read as 0

  Value reg(RegId r) const { return r == kPc ? pc : regs[r]; }
  void set_reg(RegId r, Value v) {
    if (r == kPc) pc = v;
    else regs[r] = v;
  }
  bool operator==(const Config &o) const { return pc == o.pc && regs == o.regs && mem == o.mem; }
};

// pc = 0, every register 0 unless given, memory as given.
Config initial_config(const Program &p, const std::map<std::string, Word> &regs = {},
                      const std::map<Word, Word> &mem = {});

// One step of the non-speculative semantics. Appends the step's observations
// to `out` and updates `c`. When p(pc) is undefined, pc becomes bottom and
// nothing is observed. Throws EvalError when the state is stuck.
void ns_step(const Program &p, Config &c, Trace &out);

enum class RunStatus { Terminated, FuelExhausted, Error };
const char *to_string(RunStatus s);

struct RunResult {
  Trace trace;
  Config final_config;
  RunStatus status = RunStatus::Terminated;
  std::string error;
  std::size_t steps = 0;
};

constexpr std::size_t kDefaultFuel = 10000;

RunResult ns_run(const Program &p, const Config &c0, std::size_t fuel = kDefaultFuel);

}  // namespace speclab
