#pragma once

#include "speclab/am_engine.hpp"
#include "speclab/ns.hpp"

namespace speclab {

struct ConcreteDomain {
  using V = Value;
  using Cfg = Config;

  const Program &p;

  Value pc(const Cfg &c) const { return c.pc; }
  void set_pc(Cfg &c, Value v) const { c.pc = v; }
  void add_sp(Cfg &c, Word delta) const {
    Value sp = c.reg(kSp);
    if (sp.bot) throw EvalError("bottom stack pointer");
    c.set_reg(kSp, Value::word((sp.w + delta) & p.mask()));
  }
  void step(Cfg &c, Trace &out) const { ns_step(p, c, out); }
  Value label(Value v) const { return v; }
};

// Runs the always-mispredict semantics selected by `opt.sem` (the empty
// semantics is the non-speculative one). Throws ConfluenceError when
// opt.check_confluence is set and two components disagree, and Error when the
// semantics cannot run the program at all.
RunResult am_run(const Program &p, const Config &c0, const AmOptions &opt, std::size_t fuel = kDefaultFuel);

}  // namespace speclab
