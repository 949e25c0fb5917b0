#include "speclab/oracle.hpp"

#include <algorithm>

#include "speclab/semantics.hpp"

namespace speclab {

Config PartialConfig::apply(Config c) const {
  if (pc) c.pc = *pc;
  for (const auto &[r, v] : regs) c.set_reg(r, v);
  for (const auto &[a, v] : mem) c.mem[a] = v;
  return c;
}

namespace {

bool triggers(const Program &p, const Instr &in, const OracleQuery &q) {
  switch (q.kind) {
    case Mech::B: return in.op == Op::Beqz;
    case Mech::S: return in.op == Op::Store;
    case Mech::SLS: return in.op == Op::Ret;
    case Mech::R: return in.op == Op::Ret && q.rsb && !q.rsb->empty();
    case Mech::J: return in.op == Op::Jmp && reads_register(*in.e);
  }
  (void)p;
  return false;
}

// The architectural step as a partial configuration.
PartialConfig diff(const Config &before, const Config &after) {
  PartialConfig d;
  d.pc = after.pc;
  for (RegId r = 1; r < after.regs.size(); ++r)
    if (!(before.regs[r] == after.regs[r])) d.regs[r] = after.regs[r];
  for (const auto &[a, v] : after.mem) {
    auto it = before.mem.find(a);
    if (it == before.mem.end() || it->second != v) d.mem[a] = v;
  }
  return d;
}

struct CorrectStep {
  Config next;
  Trace obs;
};

CorrectStep correct_step(const Program &p, const Config &c) {
  CorrectStep s{c, {}};
  ns_step(p, s.next, s.obs);
  return s;
}

std::vector<Word> jump_candidates(const Program &p) {
  if (!p.labelset().empty()) return {p.labelset().begin(), p.labelset().end()};
  auto ls = p.labels();
  return {ls.begin(), ls.end()};
}

Word next_label(const Program &p, const Config &c) { return (c.pc.w + 1) & p.mask(); }

// Prediction that takes the wrong path in the mechanism's own sense.
Prediction mispredict(const Program &p, const Config &c, const OracleQuery &q, Word window) {
  const Instr &in = *p.at(c.pc);
  Prediction pr{{}, window, {}};
  switch (q.kind) {
    case Mech::B: {
      CorrectStep s = correct_step(p, c);
      Value wrong = s.next.pc == in.target ? Value::word(next_label(p, c)) : in.target;
      pr.delta.pc = wrong;
      pr.obs.push_back(Obs::pc(wrong));
      return pr;
    }
    case Mech::S: {
      CorrectStep s = correct_step(p, c);
      pr.delta.pc = Value::word(next_label(p, c));
      pr.delta.bypass = true;
      pr.obs = s.obs;
      return pr;
    }
    case Mech::SLS:
      pr.delta.pc = Value::word(next_label(p, c));
      pr.obs.push_back(Obs::skip(c.pc));
      return pr;
    case Mech::R: {
      Word l = q.rsb->back();
      Value sp = c.reg(kSp);
      if (sp.bot) throw EvalError("bottom stack pointer");
      pr.delta.pc = Value::word(l);
      pr.delta.regs[kSp] = Value::word((sp.w + 8) & p.mask());
      pr.obs.push_back(Obs::ret(Value::word(l)));
      return pr;
    }
    case Mech::J: {
      CorrectStep s = correct_step(p, c);
      Value target = s.next.pc;
      for (Word l : jump_candidates(p))
        if (Value::word(l) != s.next.pc) {
          target = Value::word(l);
          break;
        }
      pr.delta.pc = target;
      pr.obs.push_back(Obs::pc(target));
      return pr;
    }
  }
  return pr;
}

Prediction predict_correct(const Program &p, const Config &c, Word window) {
  CorrectStep s = correct_step(p, c);
  return Prediction{diff(c, s.next), window, s.obs};
}

class Btfnt : public PredictionOracle {
 public:
  std::string name() const override { return "btfnt"; }
  bool supports(Mech kind) const override { return kind == Mech::B; }
  Prediction predict(const Program &p, const History &, const Config &c, const OracleQuery &q) const override {
    const Instr &in = *p.at(c.pc);
    Word next = next_label(p, c);
    Value guess = (!in.target.bot && in.target.w < next) ? in.target : Value::word(next);
    Prediction pr{{}, q.max_window, {Obs::pc(guess)}};
    pr.delta.pc = guess;
    return pr;
  }
};

class AlwaysCorrect : public PredictionOracle {
 public:
  std::string name() const override { return "correct"; }
  bool supports(Mech) const override { return true; }
  Prediction predict(const Program &p, const History &, const Config &c, const OracleQuery &q) const override {
    return predict_correct(p, c, q.max_window);
  }
};

class AlwaysMispredict : public PredictionOracle {
 public:
  std::string name() const override { return "mispredict"; }
  bool supports(Mech) const override { return true; }
  Prediction predict(const Program &p, const History &, const Config &c, const OracleQuery &q) const override {
    return mispredict(p, c, q, q.max_window);
  }
};

// splitmix64 finaliser
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Depends only on the seed, the instruction label and the history length,
// never on data.
class SeededRandom : public PredictionOracle {
 public:
  explicit SeededRandom(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random:" + std::to_string(seed_); }
  bool supports(Mech) const override { return true; }
  Prediction predict(const Program &p, const History &h, const Config &c, const OracleQuery &q) const override {
    std::uint64_t r = mix(seed_ ^ mix(c.pc.w ^ mix(h.size() + 1)));
    Word window = q.max_window == 0 ? 0 : 1 + (r >> 8) % q.max_window;
    if (r & 1) return predict_correct(p, c, window);
    if (q.kind == Mech::J) {
      // pick any candidate target, possibly the right one
      auto cands = jump_candidates(p);
      Word l = cands[(r >> 1) % cands.size()];
      Prediction pr{{}, window, {Obs::pc(Value::word(l))}};
      pr.delta.pc = Value::word(l);
      return pr;
    }
    return mispredict(p, c, q, window);
  }

 private:
  std::uint64_t seed_;
};

void tick(std::optional<Word> &w) {
  if (w && *w > 0) --*w;
}

bool fin(const Program &p, const OracleInstance &i) { return i.stuck || !p.at(i.cfg.pc); }

}  // namespace

std::unique_ptr<PredictionOracle> make_btfnt_oracle() { return std::make_unique<Btfnt>(); }
std::unique_ptr<PredictionOracle> make_always_correct_oracle() { return std::make_unique<AlwaysCorrect>(); }
std::unique_ptr<PredictionOracle> make_always_mispredict_oracle() { return std::make_unique<AlwaysMispredict>(); }
std::unique_ptr<PredictionOracle> make_seeded_random_oracle(std::uint64_t seed) {
  return std::make_unique<SeededRandom>(seed);
}

std::unique_ptr<PredictionOracle> make_oracle(const std::string &name) {
  if (name == "btfnt") return make_btfnt_oracle();
  if (name == "correct") return make_always_correct_oracle();
  if (name == "mispredict") return make_always_mispredict_oracle();
  if (name.rfind("random:", 0) == 0) {
    try {
      return make_seeded_random_oracle(std::stoull(name.substr(7)));
    } catch (const std::exception &) {
    }
  }
  throw Error("unknown oracle '" + name + "'");
}

std::vector<std::string> builtin_oracle_names() { return {"btfnt", "correct", "mispredict", "random:7"}; }

OracleState oracle_initial(const Config &c0) {
  OracleState s(1);
  s[0].cfg = c0;
  return s;
}

bool oracle_done(const OracleState &s) { return s.size() == 1 && s[0].cfg.pc.bot; }

void oracle_step(const Program &p, OracleState &s, const PredictionOracle &o, const OracleOptions &opt, Trace &out) {
  // Finalise the outermost transaction whose window ran out or which is stuck.
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i].window == std::optional<Word>(0) || fin(p, s[i]))) continue;
    OracleInstance &lo = s[i - 1];
    OracleInstance &hi = s[i];
    Config arch = hi.snapshot;
    Trace arch_obs;
    bool arch_ok = true;
    try {
      ns_step(p, arch, arch_obs);
    } catch (const EvalError &) {
      arch_ok = false;
    }
    bool correct = arch_ok && !hi.delta.bypass && hi.delta.apply(hi.snapshot) == arch;
    if (correct) {
      out.push_back(Obs::marker(ObsKind::Commit, opt.kind, lo.ctr));
      lo.ctr = hi.ctr;
      lo.cfg = std::move(hi.cfg);
      lo.h = std::move(hi.h);
      lo.rsb = std::move(hi.rsb);
      lo.stuck = hi.stuck;
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      out.push_back(Obs::marker(ObsKind::Rollback, opt.kind, lo.ctr));
      out.insert(out.end(), arch_obs.begin(), arch_obs.end());
      lo.ctr = hi.ctr;
      lo.h = std::move(hi.h);
      lo.cfg = std::move(arch);
      lo.stuck = !arch_ok;
      // the architectural effect of a return on the RSB
      if (opt.kind == Mech::R && !lo.rsb.empty()) lo.rsb.pop_back();
      tick(lo.window);
      s.resize(i);
      if (!arch_ok && s.size() == 1) throw EvalError("stuck non-speculative state");
    }
    return;
  }

  OracleInstance &top = s.back();
  const Instr *in = p.at(top.cfg.pc);
  const Word here = top.cfg.pc.w;
  if (!in) {
    top.cfg.pc = Value::bottom();
    return;
  }
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (in->op == Op::SpBarr) {
      if (s[i].window) s[i].window = 0;
    } else {
      tick(s[i].window);
    }
  }

  OracleQuery q{opt.kind, opt.max_window, &top.rsb};
  if (in->op != Op::SpBarr && triggers(p, *in, q)) {
    if (!o.supports(opt.kind))
      throw Error("oracle " + o.name() + " cannot predict for mechanism " + mech_name(opt.kind));
    Prediction pr;
    try {
      pr = o.predict(p, top.h, top.cfg, q);
    } catch (const EvalError &) {
      if (s.size() == 1) throw;
      top.stuck = true;
      return;
    }
    pr.window = std::min(pr.window, opt.max_window);
    out.push_back(Obs::marker(ObsKind::Start, opt.kind, top.ctr));
    out.insert(out.end(), pr.obs.begin(), pr.obs.end());
    OracleInstance child;
    child.ctr = top.ctr + 1;
    child.cfg = pr.delta.apply(top.cfg);
    child.h = top.h;
    child.h.push_back({top.cfg.pc.w, top.ctr, pr.delta});
    child.window = pr.window;
    child.rsb = top.rsb;
    if (opt.kind == Mech::R) child.rsb.pop_back();
    child.decorated = true;
    child.snapshot = top.cfg;
    child.delta = std::move(pr.delta);
    s.push_back(std::move(child));
    return;
  }

  try {
    ns_step(p, top.cfg, out);
  } catch (const EvalError &) {
    if (s.size() == 1) throw;
    top.stuck = true;
    return;
  }
  if (in->op == Op::SpBarr) {
    if (top.window) top.window = 0;
  } else {
    tick(top.window);
  }
  if (opt.kind == Mech::R && in->op == Op::Call && top.rsb.size() < opt.rsb_size)
    top.rsb.push_back((here + 1) & p.mask());
}

RunResult oracle_run(const Program &p, const Config &c0, const PredictionOracle &o, const OracleOptions &opt,
                     std::size_t fuel) {
  OracleState s = oracle_initial(c0);
  RunResult r;
  while (!oracle_done(s)) {
    if (r.steps == fuel) {
      r.status = RunStatus::FuelExhausted;
      break;
    }
    ++r.steps;
    try {
      oracle_step(p, s, o, opt, r.trace);
    } catch (const EvalError &e) {
      r.status = RunStatus::Error;
      r.error = e.what();
      break;
    }
  }
  r.final_config = s.front().cfg;
  return r;
}

}  // namespace speclab
