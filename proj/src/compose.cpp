#include "speclab/compose.hpp"

namespace speclab {

WfReport check_wellformedness(const Semantics &sem, const std::vector<WfCase> &cases, Word window,
                              std::size_t fuel) {
  WfReport rep;
  for (const WfCase &c : cases) {
    // Spec-J refuses programs without endbr targets; nothing to check there.
    if (sem.has(Mech::J) && c.program->labelset().empty()) continue;
    AmOptions opt;
    opt.sem = sem;
    opt.window = window;
    opt.check_confluence = true;
    RunResult whole;
    ++rep.checks;
    try {
      whole = am_run(*c.program, c.init, opt, fuel);
    } catch (const ConfluenceError &e) {
      rep.violations.push_back({"confluence", sem.id(), c.name, e.what()});
      continue;
    } catch (const Error &e) {
      rep.violations.push_back({"confluence", sem.id(), c.name, std::string("cannot run: ") + e.what()});
      continue;
    }
    // A run cut short by fuel cannot be compared with a shorter run.
    if (whole.status == RunStatus::FuelExhausted) continue;
    for (Mech m : sem.mechs) {
      if (sem.mechs.size() < 2) break;
      AmOptions single;
      single.sem = make_composition({m});
      single.window = window;
      ++rep.checks;
      RunResult alone;
      try {
        alone = am_run(*c.program, c.init, single, fuel);
      } catch (const Error &) {
        continue;  // e.g. J without endbr targets: nothing to preserve
      }
      if (alone.status == RunStatus::FuelExhausted) continue;
      Trace projected = canonical_ids(project_trace(whole.trace, m));
      Trace expected = canonical_ids(alone.trace);
      if (projected != expected)
        rep.violations.push_back({"projection", sem.id(), c.name,
                                  std::string("onto ") + mech_name(m) + ": got " + format_trace(projected) +
                                      ", alone " + format_trace(expected)});
    }
  }
  return rep;
}

bool upward_closed(const std::map<std::string, bool> &detects, std::string *counterexample) {
  auto all = all_semantics();
  for (const auto &a : all) {
    auto ia = detects.find(a.id());
    if (ia == detects.end() || !ia->second) continue;
    for (const auto &b : all) {
      if (!subsumes(b, a)) continue;
      auto ib = detects.find(b.id());
      if (ib != detects.end() && !ib->second) {
        if (counterexample) *counterexample = a.id() + " detects but " + b.id() + " does not";
        return false;
      }
    }
  }
  return true;
}

}  // namespace speclab
