#include "speclab/ns.hpp"

namespace speclab {

const char *to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Terminated: return "terminated";
    case RunStatus::FuelExhausted: return "fuel-exhausted";
    case RunStatus::Error: return "error";
  }
  return "?";
}

Config initial_config(const Program &p, const std::map<std::string, Word> &regs, const std::map<Word, Word> &mem) {
  Config c;
  c.pc = Value::word(0);
  c.regs.assign(p.reg_count(), Value::word(0));
  for (const auto &[name, v] : regs) {
    auto r = p.find_reg(name);
    if (!r) continue;  // registers the program never mentions are irrelevant
    c.set_reg(*r, Value::word(v & p.mask()));
  }
  for (const auto &[a, v] : mem) c.mem[a & p.mask()] = v & p.mask();
  return c;
}

namespace {

Value eval(const Program &p, const Config &c, const Expr &e) {
  return eval_expr_with(e, [&](RegId r) { return c.reg(r); }, p.width());
}

Word word_of(const Value &v, const char *what) {
  if (v.bot) throw EvalError(std::string("bottom used as ") + what);
  return v.w;
}

Word read_mem(const Config &c, Word a) {
  auto it = c.mem.find(a);
  return it == c.mem.end() ? 0 : it->second;
}

}  // namespace

void ns_step(const Program &p, Config &c, Trace &out) {
  const Instr *in = p.at(c.pc);
  if (!in) {
    c.pc = Value::bottom();
    return;
  }
  const Word m = p.mask();
  const Word next = (c.pc.w + 1) & m;
  switch (in->op) {
    case Op::Skip:
    case Op::SpBarr:
    case Op::EndBr:
      c.pc = Value::word(next);
      return;
    case Op::Assign:
      c.set_reg(in->reg, eval(p, c, *in->e));
      if (in->reg != kPc) c.pc = Value::word(next);
      return;
    case Op::CMov: {
      Word cond = word_of(eval(p, c, *in->e2), "condition");
      if (cond == 0) c.set_reg(in->reg, eval(p, c, *in->e));
      if (in->reg != kPc || cond != 0) c.pc = Value::word(next);
      return;
    }
    case Op::Load: {
      Word a = word_of(eval(p, c, *in->e), "address");
      c.set_reg(in->reg, Value::word(read_mem(c, a)));
      out.push_back(Obs::load(Value::word(a)));
      c.pc = Value::word(next);
      return;
    }
    case Op::Store: {
      Word a = word_of(eval(p, c, *in->e), "address");
      Word v = word_of(c.reg(in->reg), "stored value");
      c.mem[a] = v;
      out.push_back(Obs::store(Value::word(a)));
      c.pc = Value::word(next);
      return;
    }
    case Op::Beqz: {
      Word v = word_of(c.reg(in->reg), "branch condition");
      c.pc = v == 0 ? in->target : Value::word(next);
      out.push_back(Obs::pc(c.pc));
      return;
    }
    case Op::Jmp: {
      Value l = eval(p, c, *in->e);
      if (!p.labelset().empty() && reads_register(*in->e) && (l.bot || !p.labelset().count(l.w)))
        throw EvalError("indirect jump to " + to_string(l) + " outside the endbr labelset");
      c.pc = l;
      out.push_back(Obs::pc(l));
      return;
    }
    case Op::Call: {
      auto f = p.function(in->fname);
      if (!f) throw EvalError("call to unknown function " + in->fname);
      Word sp = (word_of(c.reg(kSp), "stack pointer") - 8) & m;
      c.mem[sp] = next;
      c.set_reg(kSp, Value::word(sp));
      c.pc = Value::word(*f);
      out.push_back(Obs::call(in->fname));
      return;
    }
    case Op::Ret: {
      Word sp = word_of(c.reg(kSp), "stack pointer");
      auto it = c.mem.find(sp);
      if (it == c.mem.end()) throw EvalError("ret with undefined return address at " + std::to_string(sp));
      Word l = it->second;
      c.set_reg(kSp, Value::word((sp + 8) & m));
      c.pc = Value::word(l);
      out.push_back(Obs::ret(Value::word(l)));
      return;
    }
  }
}

RunResult ns_run(const Program &p, const Config &c0, std::size_t fuel) {
  RunResult r;
  r.final_config = c0;
  while (!r.final_config.pc.bot) {
    if (r.steps == fuel) {
      r.status = RunStatus::FuelExhausted;
      return r;
    }
    ++r.steps;
    try {
      ns_step(p, r.final_config, r.trace);
    } catch (const EvalError &e) {
      r.status = RunStatus::Error;
      r.error = e.what();
      return r;
    }
  }
  r.status = RunStatus::Terminated;
  return r;
}

}  // namespace speclab
