#include "speclab/sym.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace speclab {

namespace {

SymExpr node(SymNode n) { return std::make_shared<const SymNode>(std::move(n)); }

SymExpr make_binary(BinOp op, SymExpr x, SymExpr y) {
  SymNode n;
  n.kind = SymNode::Kind::Binary;
  n.bop = op;
  n.a = std::move(x);
  n.b = std::move(y);
  return node(std::move(n));
}

// e = base + off, base null for constants.
std::pair<SymExpr, Word> linear(const SymExpr &e) {
  if (e->kind == SymNode::Kind::Const) return {nullptr, e->value.w};
  if (e->kind == SymNode::Kind::Binary && e->bop == BinOp::Add && e->b->kind == SymNode::Kind::Const)
    return {e->a, e->b->value.w};
  return {e, 0};
}

bool same_base(const SymExpr &a, const SymExpr &b) {
  if (!a || !b) return !a && !b;
  return sym_equal(a, b);
}

}  // namespace

SymExpr sym_const(Value v) {
  SymNode n;
  n.kind = SymNode::Kind::Const;
  n.value = v;
  return node(std::move(n));
}

SymExpr sym_word(Word w, unsigned width) { return sym_const(Value::word(w & width_mask(width))); }

SymExpr sym_var(const std::string &name) {
  SymNode n;
  n.kind = SymNode::Kind::Var;
  n.name = name;
  return node(std::move(n));
}

bool is_const(const SymExpr &e) { return e->kind == SymNode::Kind::Const; }

SymExpr sym_unary(UnOp op, SymExpr x, unsigned width) {
  if (is_const(x)) {
    if (x->value.bot) throw EvalError("bottom operand");
    return sym_word(apply_unop(op, x->value.w, width), width);
  }
  SymNode n;
  n.kind = SymNode::Kind::Unary;
  n.uop = op;
  n.a = std::move(x);
  return node(std::move(n));
}

SymExpr sym_binary(BinOp op, SymExpr x, SymExpr y, unsigned width) {
  const Word mask = width_mask(width);
  if (is_const(x) && is_const(y)) {
    if (x->value.bot || y->value.bot) throw EvalError("bottom operand");
    return sym_word(apply_binop(op, x->value.w, y->value.w, width), width);
  }
  if ((is_const(x) && x->value.bot) || (is_const(y) && y->value.bot)) throw EvalError("bottom operand");
  auto cy = [&](Word w) { return is_const(y) && y->value.w == w; };
  switch (op) {
    case BinOp::Add: {
      if (is_const(x)) std::swap(x, y);
      if (!is_const(y)) break;
      if (y->value.w == 0) return x;
      auto [base, off] = linear(x);
      Word sum = (off + y->value.w) & mask;
      if (sum == 0) return base;
      return make_binary(BinOp::Add, base, sym_word(sum, width));
    }
    case BinOp::Sub:
      if (is_const(y)) return sym_binary(BinOp::Add, x, sym_word(0 - y->value.w, width), width);
      if (sym_equal(x, y)) return sym_word(0, width);
      break;
    case BinOp::Mul:
      if (is_const(x)) std::swap(x, y);
      if (cy(0)) return y;
      if (cy(1)) return x;
      break;
    case BinOp::And:
      if (is_const(x)) std::swap(x, y);
      if (cy(0)) return y;
      if (cy(mask)) return x;
      break;
    case BinOp::Or:
      if (is_const(x)) std::swap(x, y);
      if (cy(0)) return x;
      break;
    case BinOp::Xor:
      if (is_const(x)) std::swap(x, y);
      if (cy(0)) return x;
      if (sym_equal(x, y)) return sym_word(0, width);
      break;
    case BinOp::Shl:
    case BinOp::Shr:
      if (is_const(y) && y->value.w % width == 0) return x;
      break;
    case BinOp::Eq:
      if (must_equal(x, y)) return sym_word(1, width);
      if (must_differ(x, y)) return sym_word(0, width);
      break;
    case BinOp::Ne:
      if (must_equal(x, y)) return sym_word(0, width);
      if (must_differ(x, y)) return sym_word(1, width);
      break;
    case BinOp::Lt:
    case BinOp::Gt:
      if (sym_equal(x, y)) return sym_word(0, width);
      break;
    case BinOp::Le:
    case BinOp::Ge:
      if (sym_equal(x, y)) return sym_word(1, width);
      break;
    case BinOp::Div:
      if (cy(0)) throw EvalError("division by zero");
      if (cy(1)) return x;
      break;
  }
  return make_binary(op, std::move(x), std::move(y));
}

SymExpr sym_ite(SymExpr cond, SymExpr then, SymExpr otherwise) {
  if (is_const(cond)) return cond->value.w != 0 ? then : otherwise;
  if (sym_equal(then, otherwise)) return then;
  SymNode n;
  n.kind = SymNode::Kind::Ite;
  n.a = std::move(cond);
  n.b = std::move(then);
  n.c = std::move(otherwise);
  return node(std::move(n));
}

SymMem sym_base(const std::string &name, std::shared_ptr<const MemoryImage> image) {
  auto m = std::make_shared<SymMemNode>();
  m->name = name;
  m->image = std::move(image);
  return m;
}

SymMem sym_write(SymMem m, SymExpr addr, SymExpr val) {
  auto w = std::make_shared<SymMemNode>();
  w->prev = std::move(m);
  w->addr = std::move(addr);
  w->val = std::move(val);
  return w;
}

SymExpr sym_read(const SymMem &m, SymExpr addr, unsigned width) {
  if (is_const(addr) && addr->value.bot) throw EvalError("bottom used as address");
  SymMem cur = m;
  for (; !cur->is_base(); cur = cur->prev) {
    if (must_equal(addr, cur->addr)) return cur->val;
    if (!must_differ(addr, cur->addr)) break;
  }
  if (cur->is_base() && cur->image && is_const(addr)) {
    auto it = cur->image->find(addr->value.w);
    return sym_word(it == cur->image->end() ? 0 : it->second, width);
  }
  SymNode n;
  n.kind = SymNode::Kind::Read;
  n.mem = cur;
  n.a = std::move(addr);
  return node(std::move(n));
}

SymExpr sym_all(const std::vector<SymExpr> &cs, unsigned width) {
  SymExpr acc = sym_word(1, width);
  for (const auto &c : cs) acc = sym_binary(BinOp::And, acc, c, width);
  return acc;
}

bool sym_equal(const SymExpr &a, const SymExpr &b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case SymNode::Kind::Const: return a->value == b->value;
    case SymNode::Kind::Var: return a->name == b->name;
    case SymNode::Kind::Unary: return a->uop == b->uop && sym_equal(a->a, b->a);
    case SymNode::Kind::Binary: return a->bop == b->bop && sym_equal(a->a, b->a) && sym_equal(a->b, b->b);
    case SymNode::Kind::Ite: return sym_equal(a->a, b->a) && sym_equal(a->b, b->b) && sym_equal(a->c, b->c);
    case SymNode::Kind::Read: return sym_mem_equal(a->mem, b->mem) && sym_equal(a->a, b->a);
  }
  return false;
}

bool sym_mem_equal(const SymMem &a, const SymMem &b) {
  if (a == b) return true;
  if (!a || !b || a->is_base() != b->is_base()) return false;
  if (a->is_base()) return a->name == b->name && a->image == b->image;
  return sym_equal(a->addr, b->addr) && sym_equal(a->val, b->val) && sym_mem_equal(a->prev, b->prev);
}

bool must_equal(const SymExpr &a, const SymExpr &b) {
  if (is_const(a) && is_const(b)) return a->value == b->value;
  auto [ba, oa] = linear(a);
  auto [bb, ob] = linear(b);
  return oa == ob && same_base(ba, bb);
}

bool must_differ(const SymExpr &a, const SymExpr &b) {
  if (is_const(a) && is_const(b)) return a->value != b->value;
  auto [ba, oa] = linear(a);
  auto [bb, ob] = linear(b);
  return oa != ob && same_base(ba, bb);
}

namespace {

template <class F>
void walk(const SymExpr &e, std::unordered_set<const void *> &seen, F &&f);

template <class F>
void walk_mem(const SymMem &m, std::unordered_set<const void *> &seen, F &&f) {
  for (SymMem cur = m; cur; cur = cur->prev) {
    if (!seen.insert(cur.get()).second) return;
    if (cur->is_base()) {
      f(nullptr, cur);
      return;
    }
    walk(cur->addr, seen, f);
    walk(cur->val, seen, f);
  }
}

// f(expr, mem) is called on every node.
template <class F>
void walk(const SymExpr &e, std::unordered_set<const void *> &seen, F &&f) {
  if (!e || !seen.insert(e.get()).second) return;
  f(e, nullptr);
  walk(e->a, seen, f);
  walk(e->b, seen, f);
  walk(e->c, seen, f);
  if (e->mem) walk_mem(e->mem, seen, f);
}

SymMem base_of(SymMem m) {
  while (!m->is_base()) m = m->prev;
  return m;
}

}  // namespace

void collect_vars(const SymExpr &e, std::set<std::string> &vars, std::set<std::string> &arrays) {
  std::unordered_set<const void *> seen;
  walk(e, seen, [&](const SymExpr &x, const SymMem &m) {
    if (x && x->kind == SymNode::Kind::Var) vars.insert(x->name);
    if (m && !m->image) arrays.insert(m->name);
  });
}

void collect_base_reads(const SymExpr &e, std::vector<std::pair<SymMem, SymExpr>> &reads) {
  std::unordered_set<const void *> seen;
  walk(e, seen, [&](const SymExpr &x, const SymMem &) {
    if (x && x->kind == SymNode::Kind::Read) {
      SymMem b = base_of(x->mem);
      if (!b->image) reads.emplace_back(b, x->a);
    }
  });
}

Word Valuation::var(const std::string &n) const {
  auto it = vars.find(n);
  return it == vars.end() ? 0 : it->second;
}

Word Valuation::cell(const std::string &array, Word addr) const {
  auto it = arrays.find(array);
  if (it == arrays.end()) return 0;
  auto c = it->second.find(addr);
  return c == it->second.end() ? 0 : c->second;
}

Value sym_eval(const SymExpr &e, const Valuation &mu, unsigned width) {
  const Word mask = width_mask(width);
  switch (e->kind) {
    case SymNode::Kind::Const: return e->value;
    case SymNode::Kind::Var: return Value::word(mu.var(e->name) & mask);
    case SymNode::Kind::Unary: {
      Value x = sym_eval(e->a, mu, width);
      if (x.bot) throw EvalError("bottom operand");
      return Value::word(apply_unop(e->uop, x.w, width));
    }
    case SymNode::Kind::Binary: {
      Value x = sym_eval(e->a, mu, width);
      Value y = sym_eval(e->b, mu, width);
      if (x.bot || y.bot) throw EvalError("bottom operand");
      return Value::word(apply_binop(e->bop, x.w, y.w, width));
    }
    case SymNode::Kind::Ite:
      return sym_eval(e->a, mu, width).w != 0 ? sym_eval(e->b, mu, width) : sym_eval(e->c, mu, width);
    case SymNode::Kind::Read: {
      Word a = sym_eval(e->a, mu, width).w;
      for (SymMem cur = e->mem; cur; cur = cur->prev) {
        if (cur->is_base()) {
          if (cur->image) {
            auto it = cur->image->find(a);
            return Value::word(it == cur->image->end() ? 0 : it->second);
          }
          return Value::word(mu.cell(cur->name, a) & mask);
        }
        if (sym_eval(cur->addr, mu, width).w == a) return sym_eval(cur->val, mu, width);
      }
      return Value::word(0);
    }
  }
  return Value::bottom();
}

namespace {

std::string mem_string(const SymMem &m) {
  if (m->is_base()) return m->name;
  return "write(" + mem_string(m->prev) + ", " + to_string(m->addr) + ", " + to_string(m->val) + ")";
}

}  // namespace

std::string to_string(const SymExpr &e) {
  if (!e) return "?";
  switch (e->kind) {
    case SymNode::Kind::Const: return to_string(e->value);
    case SymNode::Kind::Var: return e->name;
    case SymNode::Kind::Unary: return std::string(op_text(e->uop)) + to_string(e->a);
    case SymNode::Kind::Binary:
      return "(" + to_string(e->a) + " " + op_text(e->bop) + " " + to_string(e->b) + ")";
    case SymNode::Kind::Ite: return "(" + to_string(e->a) + " ? " + to_string(e->b) + " : " + to_string(e->c) + ")";
    case SymNode::Kind::Read:
      if (e->mem->is_base()) return e->mem->name + "[" + to_string(e->a) + "]";
      return "read(" + mem_string(e->mem) + ", " + to_string(e->a) + ")";
  }
  return "?";
}

std::string to_string(const SymObs &o) {
  switch (o.kind) {
    case ObsKind::Load: return "load " + to_string(o.val);
    case ObsKind::Store: return "store " + to_string(o.val);
    case ObsKind::Pc: return "pc " + to_string(o.val);
    case ObsKind::Call: return "call " + o.name;
    case ObsKind::Ret: return "ret " + to_string(o.val);
    case ObsKind::Skip: return "skip " + to_string(o.val);
    case ObsKind::SymPc: return "sympc " + to_string(o.val);
    default: {
      Obs m = Obs::marker(o.kind, o.mech, o.id);
      return to_string(m);
    }
  }
}

bool operator==(const SymObs &a, const SymObs &b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ObsKind::Call: return a.name == b.name;
    case ObsKind::Start:
    case ObsKind::Commit:
    case ObsKind::Rollback: return a.mech == b.mech && a.id == b.id;
    default: return sym_equal(a.val, b.val);
  }
}

std::string format_sym_trace(const SymTrace &t, const std::string &sep) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += sep;
    out += to_string(t[i]);
  }
  return out;
}

bool SymConfig::operator==(const SymConfig &o) const {
  if (!(pc == o.pc) || regs.size() != o.regs.size() || !sym_mem_equal(mem, o.mem)) return false;
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (!sym_equal(regs[i], o.regs[i])) return false;
  return true;
}

SymConfig sym_initial(const Program &p, const SymInit &init) {
  SymConfig c;
  c.pc = Value::word(0);
  c.regs.resize(p.reg_count());
  for (RegId r = 0; r < p.reg_count(); ++r) {
    auto it = init.concrete_regs.find(r);
    c.regs[r] = it != init.concrete_regs.end() ? sym_word(it->second, p.width()) : sym_var("r_" + p.reg_name(r));
  }
  c.regs[kPc] = sym_word(0, p.width());
  c.mem = sym_base("m0", init.memory);
  return c;
}

std::size_t PathChooser::choose(Word site, std::vector<SymExpr> alts, SymTrace &out) {
  if (++visits_[site] > site_cap_)
    throw ExplorationLimit("symbolic branch at label " + std::to_string(site) + " unrolled more than " +
                           std::to_string(site_cap_) + " times");
  std::size_t taken = alts.size();
  for (std::size_t i = 0; i < alts.size(); ++i)
    if (sym_eval(alts[i], mu_, width_).w != 0) {
      taken = i;
      break;
    }
  if (taken == alts.size()) throw Error("seed valuation satisfies no branch alternative");
  out.push_back(SymObs{ObsKind::SymPc, alts[taken], Mech::B, 0, {}});
  decisions_.push_back({site, std::move(alts), taken});
  return taken;
}

Word PathChooser::value(const SymExpr &e) const { return sym_eval(e, mu_, width_).w; }

namespace {

struct SymStepper {
  const Program &p;
  SymConfig &c;
  SymTrace &out;
  PathChooser &ch;
  unsigned w = p.width();

  SymExpr reg(RegId r) const { return r == kPc ? sym_const(c.pc) : c.regs[r]; }

  void set_reg(RegId r, SymExpr v) {
    if (r == kPc) {
      c.pc = resolve(std::move(v), p.labels(), false);
      return;
    }
    c.regs[r] = std::move(v);
  }

  // Guards symbolic divisors with a decision, then builds the expression.
  SymExpr eval(const Expr &e) {
    switch (e.kind) {
      case Expr::Kind::Const: return sym_const(e.value);
      case Expr::Kind::Reg: return reg(e.reg);
      case Expr::Kind::Unary: return sym_unary(e.uop, eval(*e.a), w);
      case Expr::Kind::Binary: {
        SymExpr x = eval(*e.a);
        SymExpr y = eval(*e.b);
        if (e.bop == BinOp::Div && !is_const(y)) {
          SymExpr zero = sym_word(0, w);
          std::size_t k = ch.choose(c.pc.w, {sym_binary(BinOp::Ne, y, zero, w), sym_binary(BinOp::Eq, y, zero, w)}, out);
          if (k == 1) throw EvalError("division by zero");
        }
        return sym_binary(e.bop, x, y, w);
      }
    }
    return nullptr;
  }

  static void require_word(const SymExpr &e, const char *what) {
    if (is_const(e) && e->value.bot) throw EvalError(std::string("bottom used as ") + what);
  }

  // Turns a symbolic control target into a concrete pc: one alternative per
  // candidate label and one for "none of them". Outside the candidates the
  // jump is stuck when `stuck_outside`, otherwise it lands on the seed's
  // (non-label) value.
  Value resolve(SymExpr t, const std::set<Word> &cands, bool stuck_outside) {
    if (is_const(t)) {
      if (stuck_outside && (t->value.bot || !cands.count(t->value.w)))
        throw EvalError("indirect jump to " + to_string(t->value) + " outside the endbr labelset");
      return t->value;
    }
    std::vector<SymExpr> alts;
    std::vector<SymExpr> outside;
    for (Word l : cands) {
      SymExpr lw = sym_word(l, w);
      alts.push_back(sym_binary(BinOp::Eq, t, lw, w));
      outside.push_back(sym_binary(BinOp::Ne, t, lw, w));
    }
    alts.push_back(sym_all(outside, w));
    std::size_t k = ch.choose(c.pc.w, std::move(alts), out);
    if (k < cands.size()) return Value::word(*std::next(cands.begin(), static_cast<std::ptrdiff_t>(k)));
    if (stuck_outside) throw EvalError("indirect jump outside the endbr labelset");
    return Value::word(ch.value(t));
  }

  void run() {
    const Instr *in = p.at(c.pc);
    if (!in) {
      c.pc = Value::bottom();
      return;
    }
    const Word next = (c.pc.w + 1) & p.mask();
    switch (in->op) {
      case Op::Skip:
      case Op::SpBarr:
      case Op::EndBr:
        c.pc = Value::word(next);
        return;
      case Op::Assign:
        set_reg(in->reg, eval(*in->e));
        if (in->reg != kPc) c.pc = Value::word(next);
        return;
      case Op::CMov: {
        SymExpr cond = eval(*in->e2);
        require_word(cond, "condition");
        SymExpr val = eval(*in->e);
        if (in->reg == kPc && !is_const(cond)) {
          SymExpr zero = sym_word(0, w);
          std::size_t k =
              ch.choose(c.pc.w, {sym_binary(BinOp::Eq, cond, zero, w), sym_binary(BinOp::Ne, cond, zero, w)}, out);
          cond = sym_word(k == 0 ? 0 : 1, w);
        }
        if (is_const(cond)) {
          if (cond->value.w == 0) set_reg(in->reg, val);
          if (in->reg != kPc || cond->value.w != 0) c.pc = Value::word(next);
          return;
        }
        c.regs[in->reg] = sym_ite(sym_binary(BinOp::Eq, cond, sym_word(0, w), w), val, c.regs[in->reg]);
        c.pc = Value::word(next);
        return;
      }
      case Op::Load: {
        SymExpr a = eval(*in->e);
        require_word(a, "address");
        SymExpr v = sym_read(c.mem, a, w);
        out.push_back(SymObs::load(a));
        // as in the concrete rule, a load into pc is overwritten by pc+1
        if (in->reg != kPc) c.regs[in->reg] = v;
        c.pc = Value::word(next);
        return;
      }
      case Op::Store: {
        SymExpr a = eval(*in->e);
        require_word(a, "address");
        SymExpr v = reg(in->reg);
        require_word(v, "stored value");
        c.mem = sym_write(c.mem, a, v);
        out.push_back(SymObs::store(a));
        c.pc = Value::word(next);
        return;
      }
      case Op::Beqz: {
        SymExpr v = reg(in->reg);
        require_word(v, "branch condition");
        bool zero;
        if (is_const(v)) {
          zero = v->value.w == 0;
        } else {
          SymExpr z = sym_word(0, w);
          zero = ch.choose(c.pc.w, {sym_binary(BinOp::Eq, v, z, w), sym_binary(BinOp::Ne, v, z, w)}, out) == 0;
        }
        c.pc = zero ? in->target : Value::word(next);
        out.push_back(SymObs::pc(sym_const(c.pc)));
        return;
      }
      case Op::Jmp: {
        SymExpr t = eval(*in->e);
        bool restricted = !p.labelset().empty() && reads_register(*in->e);
        c.pc = restricted ? resolve(t, p.labelset(), true) : resolve(t, p.labels(), false);
        out.push_back(SymObs::pc(t));
        return;
      }
      case Op::Call: {
        auto f = p.function(in->fname);
        if (!f) throw EvalError("call to unknown function " + in->fname);
        SymExpr sp = reg(kSp);
        require_word(sp, "stack pointer");
        sp = sym_binary(BinOp::Sub, sp, sym_word(8, w), w);
        c.mem = sym_write(c.mem, sp, sym_word(next, w));
        c.regs[kSp] = sp;
        c.pc = Value::word(*f);
        out.push_back(SymObs::call(in->fname));
        return;
      }
      case Op::Ret: {
        SymExpr sp = reg(kSp);
        require_word(sp, "stack pointer");
        SymExpr l = sym_read(c.mem, sp, w);
        c.pc = resolve(l, p.labels(), false);
        c.regs[kSp] = sym_binary(BinOp::Add, sp, sym_word(8, w), w);
        out.push_back(SymObs::ret(l));
        return;
      }
    }
  }
};

}  // namespace

void sym_ns_step(const Program &p, SymConfig &c, SymTrace &out, PathChooser &ch) {
  // Work on copies so that a stuck step leaves the configuration untouched.
  SymConfig next = c;
  SymTrace obs;
  SymStepper s{p, next, obs, ch};
  try {
    s.run();
  } catch (const EvalError &) {
    // Decisions taken before getting stuck are part of the path.
    for (auto &o : obs)
      if (o.kind == ObsKind::SymPc) out.push_back(std::move(o));
    throw;
  }
  c = std::move(next);
  out.insert(out.end(), std::make_move_iterator(obs.begin()), std::make_move_iterator(obs.end()));
}

void SymDomain::add_sp(Cfg &c, Word delta) const {
  c.regs[kSp] = sym_binary(BinOp::Add, c.regs[kSp], sym_word(delta, p.width()), p.width());
}

std::vector<SymExpr> SymRun::path_condition() const {
  std::vector<SymExpr> pc;
  for (const auto &d : decisions) pc.push_back(d.alts[d.taken]);
  return pc;
}

SymRun sym_am_run(const Program &p, const SymConfig &init, const AmOptions &opt, const Valuation &seed,
                  const ExploreOptions &xo) {
  PathChooser ch(seed, p.width(), xo.site_cap);
  SymDomain dom{p, ch};
  AmMachine<SymDomain> m(dom, p, opt, init);
  SymRun r;
  r.seed = seed;
  while (!m.done()) {
    if (r.steps == xo.fuel) {
      r.status = RunStatus::FuelExhausted;
      r.error = "fuel exhausted after " + std::to_string(r.steps) + " steps";
      break;
    }
    ++r.steps;
    try {
      m.step(r.trace);
    } catch (const EvalError &e) {
      r.status = RunStatus::Error;
      r.error = e.what();
      break;
    } catch (const ExplorationLimit &e) {
      r.status = RunStatus::FuelExhausted;
      r.error = e.what();
      break;
    }
  }
  r.decisions = ch.decisions();
  return r;
}

namespace {

bool satisfies(const std::vector<SymExpr> &cs, const Valuation &mu, unsigned width) {
  try {
    for (const auto &c : cs)
      if (sym_eval(c, mu, width).w == 0) return false;
  } catch (const EvalError &) {
    return false;
  }
  return true;
}

}  // namespace

Exploration sym_am_explore(const Program &p, const SymConfig &init, const AmOptions &opt, PathSolver &solver,
                           const ExploreOptions &xo) {
  struct Work {
    Valuation seed;
    std::size_t bound;
    std::vector<SymExpr> prefix;  // expected path condition, last entry is the flipped decision
  };
  Exploration ex;
  auto incomplete = [&](const std::string &why) {
    if (ex.complete) ex.incomplete_reason = why;
    ex.complete = false;
  };
  std::vector<Work> stack{{Valuation{}, 0, {}}};
  while (!stack.empty()) {
    if (ex.runs.size() == xo.max_paths) {
      incomplete("more than " + std::to_string(xo.max_paths) + " paths");
      break;
    }
    Work wk = std::move(stack.back());
    stack.pop_back();
    SymRun run = sym_am_run(p, init, opt, wk.seed, xo);
    std::vector<SymExpr> pc = run.path_condition();
    bool follows = pc.size() >= wk.prefix.size();
    for (std::size_t i = 0; follows && i < wk.prefix.size(); ++i) follows = sym_equal(pc[i], wk.prefix[i]);
    if (!follows) {
      incomplete("a solver model did not reproduce its path");
      continue;
    }
    if (run.status == RunStatus::FuelExhausted) incomplete(run.error);
    // Children in reverse so that the shallowest flip is explored first.
    std::vector<Work> children;
    for (std::size_t i = wk.bound; i < run.decisions.size(); ++i) {
      const Decision &d = run.decisions[i];
      for (std::size_t j = 0; j < d.alts.size(); ++j) {
        if (j == d.taken) continue;
        std::vector<SymExpr> q(pc.begin(), pc.begin() + static_cast<std::ptrdiff_t>(i));
        q.push_back(d.alts[j]);
        ++ex.queries;
        PathModel m = solver.solve(q, p.width());
        if (m.status == SatStatus::Unsat) continue;
        if (m.status == SatStatus::Unknown) {
          incomplete("solver: " + m.reason);
          continue;
        }
        if (!satisfies(q, m.model, p.width())) {
          incomplete("solver model does not satisfy the path condition");
          continue;
        }
        children.push_back({std::move(m.model), i + 1, std::move(q)});
      }
    }
    ex.runs.push_back(std::move(run));
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(std::move(*it));
  }
  return ex;
}

Trace concretize(const SymRun &run, const Valuation &mu, unsigned width) {
  if (!satisfies(run.path_condition(), mu, width)) throw Error("valuation does not satisfy the path condition");
  Trace t;
  for (const auto &o : run.trace) {
    switch (o.kind) {
      case ObsKind::SymPc: break;
      case ObsKind::Start:
      case ObsKind::Commit:
      case ObsKind::Rollback: t.push_back(Obs::marker(o.kind, o.mech, o.id)); break;
      case ObsKind::Call: t.push_back(Obs::call(o.name)); break;
      default: {
        Obs c;
        c.kind = o.kind;
        c.val = sym_eval(o.val, mu, width);
        t.push_back(c);
      }
    }
  }
  return t;
}

Config concrete_config(const Program &p, const SymInit &init, const Valuation &mu, const std::string &suffix) {
  Config c;
  c.pc = Value::word(0);
  c.regs.assign(p.reg_count(), Value::word(0));
  for (RegId r = 1; r < p.reg_count(); ++r) {
    auto it = init.concrete_regs.find(r);
    Word v = it != init.concrete_regs.end() ? it->second : mu.var("r_" + p.reg_name(r) + suffix);
    c.regs[r] = Value::word(v & p.mask());
  }
  if (init.memory) {
    c.mem = *init.memory;
  } else {
    auto it = mu.arrays.find("m0" + suffix);
    if (it != mu.arrays.end())
      for (const auto &[a, v] : it->second) c.mem[a & p.mask()] = v & p.mask();
  }
  return c;
}

void dump_sym_traces(const std::string &dir, const Exploration &ex) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < ex.runs.size(); ++i) {
    std::ofstream f(std::filesystem::path(dir) / ("run_" + std::to_string(i) + ".trace"));
    const SymRun &r = ex.runs[i];
    for (const auto &o : r.trace) f << to_string(o) << "\n";
    f << "; status " << to_string(r.status) << (r.error.empty() ? "" : " (" + r.error + ")") << "\n";
    f << "; pathcond";
    auto pc = r.path_condition();
    if (pc.empty()) f << " true";
    for (std::size_t k = 0; k < pc.size(); ++k) f << (k ? " && " : " ") << to_string(pc[k]);
    f << "\n";
  }
}

}  // namespace speclab
