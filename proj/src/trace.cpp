#include "speclab/trace.hpp"

namespace speclab {

const char *mech_name(Mech m) {
  static const char *n[] = {"b", "j", "s", "r", "sls"};
  return n[static_cast<int>(m)];
}

const char *mech_upper(Mech m) {
  static const char *n[] = {"B", "J", "S", "R", "SLS"};
  return n[static_cast<int>(m)];
}

std::optional<Mech> parse_mech(const std::string &s) {
  for (int i = 0; i < kMechCount; ++i)
    if (s == mech_name(static_cast<Mech>(i))) return static_cast<Mech>(i);
  return std::nullopt;
}

std::string to_string(const Obs &o) {
  switch (o.kind) {
    case ObsKind::Load: return "load " + to_string(o.val);
    case ObsKind::Store: return "store " + to_string(o.val);
    case ObsKind::Pc: return "pc " + to_string(o.val);
    case ObsKind::Call: return "call " + o.name;
    case ObsKind::Ret: return "ret " + to_string(o.val);
    case ObsKind::Skip: return "skip " + to_string(o.val);
    case ObsKind::Start: return std::string("start_") + mech_upper(o.mech) + " " + std::to_string(o.id);
    case ObsKind::Commit: return std::string("commit_") + mech_upper(o.mech) + " " + std::to_string(o.id);
    case ObsKind::Rollback: return std::string("rollback_") + mech_upper(o.mech) + " " + std::to_string(o.id);
    case ObsKind::SymPc: return "sympc " + to_string(o.val);
  }
  return "?";
}

std::string format_trace(const Trace &t, const std::string &sep) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += sep;
    out += to_string(t[i]);
  }
  return out;
}

std::string bracket_violation(const Trace &t, bool allow_commit) {
  std::vector<const Obs *> open;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Obs &o = t[i];
    if (o.kind == ObsKind::Start) {
      open.push_back(&o);
      continue;
    }
    if (o.kind != ObsKind::Rollback && o.kind != ObsKind::Commit) continue;
    std::string where = " at index " + std::to_string(i);
    if (o.kind == ObsKind::Commit && !allow_commit) return "unexpected commit" + where;
    if (open.empty()) return "close without start" + where;
    const Obs &top = *open.back();
    if (top.id == o.id && top.mech == o.mech) {
      open.pop_back();
    } else if (!(o.mech == Mech::J && top.mech == Mech::J && o.kind == ObsKind::Rollback && o.id > top.id)) {
      return "close of " + std::to_string(o.id) + " does not match open " + std::to_string(top.id) + where;
    }
  }
  if (!open.empty()) return "transaction " + std::to_string(open.back()->id) + " left open";
  return {};
}

}  // namespace speclab
