#pragma once

// The always-mispredict machine, written once over an execution domain so
// that the concrete and the symbolic semantics share the transaction logic.
//
// A domain D provides:
//   using V;    observation payload
//   using Cfg;  configuration
//   Value pc(const Cfg&) const;
//   void set_pc(Cfg&, Value) const;
//   void add_sp(Cfg&, Word delta) const;
//   void step(Cfg&, std::vector<BasicObs<V>>&);   non-speculative step, throws EvalError when stuck
//   V label(Value) const;

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "speclab/semantics.hpp"
#include "speclab/trace.hpp"
#include "speclab/uasm.hpp"

namespace speclab {

constexpr Word kDefaultWindow = 20;
constexpr std::size_t kDefaultRsbSize = 16;

struct AmOptions {
  Semantics sem;
  Word window = kDefaultWindow;
  std::size_t rsb_size = kDefaultRsbSize;
  // Run every applicable component on each step and compare the results.
  bool check_confluence = false;
};

class ConfluenceError : public Error {
 public:
  using Error::Error;
};

template <class Cfg>
struct AmInstance {
  Word ctr = 0;
  Cfg cfg;
  std::optional<Word> window;  // nullopt on the non-speculative instance
  std::vector<Word> rsb;
  Mech kind = Mech::B;         // mechanism that opened this transaction
  bool stuck = false;

  bool operator==(const AmInstance &o) const {
    return ctr == o.ctr && cfg == o.cfg && window == o.window && rsb == o.rsb && kind == o.kind &&
           stuck == o.stuck;
  }
};

template <class D>
class AmMachine {
 public:
  using V = typename D::V;
  using Cfg = typename D::Cfg;
  using Inst = AmInstance<Cfg>;
  using Tr = std::vector<BasicObs<V>>;

  AmMachine(D &dom, const Program &p, const AmOptions &opt, Cfg init) : dom_(dom), p_(p), opt_(opt) {
    Inst base;
    base.cfg = std::move(init);
    stack_.push_back(std::move(base));
  }

  bool done() const { return stack_.size() == 1 && dom_.pc(stack_[0].cfg).bot; }
  const std::vector<Inst> &stack() const { return stack_; }

  // Throws EvalError when the non-speculative instance is stuck.
  void step(Tr &out) {
    Inst &top = stack_.back();
    const Value pc = dom_.pc(top.cfg);
    const Instr *in = p_.at(pc);
    if (stack_.size() > 1 && (top.stuck || !in || *top.window == 0)) {
      rollback(stack_, out);
      return;
    }
    if (!in) {
      dom_.set_pc(top.cfg, Value::bottom());
      return;
    }
    if (in->op == Op::SpBarr) {
      ns_on_top(stack_, out);
      if (stack_.back().window) stack_.back().window = 0;
      return;
    }
    if (opt_.sem.empty()) {
      ns_on_top(stack_, out);
      return;
    }

    std::vector<Mech> able;
    for (Mech k : opt_.sem.mechs)
      if (!(opt_.sem.excluded(k) & op_bit(in->op))) able.push_back(k);
    if (able.empty())
      throw Error(std::string("no component of ") + opt_.sem.id() + " can execute " + op_name(in->op));

    if constexpr (requires(const Inst &a) { a == a; }) {
      if (opt_.check_confluence && able.size() > 1) {
        std::vector<Inst> first = stack_;
        Tr first_tr;
        component_step(able[0], *in, first, first_tr);
        for (std::size_t i = 1; i < able.size(); ++i) {
          std::vector<Inst> other = stack_;
          Tr other_tr;
          component_step(able[i], *in, other, other_tr);
          if (!(other == first) || !(other_tr == first_tr))
            throw ConfluenceError(std::string("components ") + mech_name(able[0]) + " and " + mech_name(able[i]) +
                                  " disagree on " + op_name(in->op) + " at label " + to_string(pc));
        }
        stack_ = std::move(first);
        out.insert(out.end(), first_tr.begin(), first_tr.end());
        return;
      }
    }
    component_step(able[0], *in, stack_, out);
  }

 private:
  static bool triggers(Mech k, const Instr &in, const Program &p) {
    switch (k) {
      case Mech::B: return in.op == Op::Beqz;
      case Mech::S: return in.op == Op::Store;
      case Mech::SLS: return in.op == Op::Ret;
      case Mech::R: return in.op == Op::Call || in.op == Op::Ret;
      case Mech::J: return in.op == Op::Jmp && reads_register(*in.e);
    }
    (void)p;
    return false;
  }

  void rollback(std::vector<Inst> &st, Tr &out) {
    Inst popped = std::move(st.back());
    st.pop_back();
    Inst &below = st.back();
    out.push_back(BasicObs<V>::marker(ObsKind::Rollback, popped.kind, below.ctr));
    below.ctr = popped.ctr;
  }

  static void tick(Inst &i) {
    if (i.window && *i.window > 0) --*i.window;
  }

  // Runs the non-speculative step on the top instance. A speculative
  // instance that gets stuck is marked for rollback instead of failing.
  // Returns false when the instance got stuck.
  bool ns_on_top(std::vector<Inst> &st, Tr &out) {
    Inst &top = st.back();
    try {
      dom_.step(top.cfg, out);
    } catch (const EvalError &) {
      if (st.size() == 1) throw;
      top.stuck = true;
      return false;
    }
    tick(top);
    return true;
  }

  Word child_window(const Inst &lower) const {
    return lower.window ? std::min(opt_.window, *lower.window) : opt_.window;
  }

  void push(std::vector<Inst> &st, Mech kind, Word ctr, Cfg cfg, Word window, std::vector<Word> rsb) {
    Inst i;
    i.ctr = ctr;
    i.cfg = std::move(cfg);
    i.window = window;
    i.rsb = std::move(rsb);
    i.kind = kind;
    st.push_back(std::move(i));
  }

  void component_step(Mech k, const Instr &in, std::vector<Inst> &st, Tr &out) {
    if (!triggers(k, in, p_)) {
      ns_on_top(st, out);
      return;
    }
    const Cfg pre = st.back().cfg;
    const Value pc = dom_.pc(pre);
    const Word next = (pc.w + 1) & p_.mask();
    switch (k) {
      case Mech::B: {
        if (!ns_on_top(st, out)) return;
        Inst &lo = st.back();
        Value correct = dom_.pc(lo.cfg);
        Value wrong = correct == in.target ? Value::word(next) : in.target;
        Cfg spec = pre;
        dom_.set_pc(spec, wrong);
        Word ctr = lo.ctr;
        out.push_back(BasicObs<V>::marker(ObsKind::Start, Mech::B, ctr));
        out.push_back(BasicObs<V>::pc(dom_.label(wrong)));
        push(st, Mech::B, ctr + 1, std::move(spec), child_window(lo), lo.rsb);
        return;
      }
      case Mech::S:
      case Mech::SLS: {
        if (!ns_on_top(st, out)) return;
        Inst &lo = st.back();
        Cfg spec = pre;
        dom_.set_pc(spec, Value::word(next));
        Word ctr = lo.ctr;
        out.push_back(BasicObs<V>::marker(ObsKind::Start, k, ctr));
        out.push_back(BasicObs<V>::skip(dom_.label(pc)));
        push(st, k, ctr + 1, std::move(spec), child_window(lo), lo.rsb);
        return;
      }
      case Mech::R: {
        if (in.op == Op::Call) {
          if (!ns_on_top(st, out)) return;
          if (st.back().rsb.size() < opt_.rsb_size) st.back().rsb.push_back(next);
          return;
        }
        if (st.back().rsb.empty()) {
          ns_on_top(st, out);
          return;
        }
        Word predicted = st.back().rsb.back();
        st.back().rsb.pop_back();
        if (!ns_on_top(st, out)) return;
        Inst &lo = st.back();
        if (dom_.pc(lo.cfg) == Value::word(predicted)) return;
        Cfg spec = pre;
        dom_.set_pc(spec, Value::word(predicted));
        dom_.add_sp(spec, 8);
        Word ctr = lo.ctr;
        out.push_back(BasicObs<V>::marker(ObsKind::Start, Mech::R, ctr));
        out.push_back(BasicObs<V>::ret(dom_.label(Value::word(predicted))));
        push(st, Mech::R, ctr + 1, std::move(spec), child_window(lo), lo.rsb);
        return;
      }
      case Mech::J: {
        if (p_.labelset().empty())
          throw Error("indirect-jump speculation needs endbr-marked targets; the program has none");
        if (!ns_on_top(st, out)) return;
        Inst &lo = st.back();
        Value correct = dom_.pc(lo.cfg);
        std::vector<Word> targets;
        for (Word l : p_.labelset())
          if (Value::word(l) != correct) targets.push_back(l);
        if (targets.empty()) return;
        Word ctr = lo.ctr;
        Word w = child_window(lo);
        std::vector<Word> rsb = lo.rsb;
        out.push_back(BasicObs<V>::marker(ObsKind::Start, Mech::J, ctr));
        out.push_back(BasicObs<V>::pc(dom_.label(Value::word(targets.back()))));
        for (std::size_t i = 0; i < targets.size(); ++i) {
          Cfg spec = pre;
          dom_.set_pc(spec, Value::word(targets[i]));
          push(st, Mech::J, ctr + 1 + i, std::move(spec), w, rsb);
        }
        return;
      }
    }
  }

  D &dom_;
  const Program &p_;
  const AmOptions &opt_;
  std::vector<Inst> stack_;
};

}  // namespace speclab
