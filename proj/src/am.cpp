#include "speclab/am.hpp"

namespace speclab {

RunResult am_run(const Program &p, const Config &c0, const AmOptions &opt, std::size_t fuel) {
  ConcreteDomain dom{p};
  AmMachine<ConcreteDomain> m(dom, p, opt, c0);
  RunResult r;
  while (!m.done()) {
    if (r.steps == fuel) {
      r.status = RunStatus::FuelExhausted;
      break;
    }
    ++r.steps;
    try {
      m.step(r.trace);
    } catch (const EvalError &e) {
      r.status = RunStatus::Error;
      r.error = e.what();
      break;
    }
  }
  r.final_config = m.stack().front().cfg;
  return r;
}

}  // namespace speclab
