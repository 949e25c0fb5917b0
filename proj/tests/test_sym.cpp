#include <gtest/gtest.h>

#include "speclab/am.hpp"
#include "speclab/smt.hpp"
#include "speclab/sym.hpp"

using namespace speclab;

namespace {

const char *kBounds = R"(
0: x <- y < size
1: beqz x, bot
2: load z, A + y
3: z <- z * 512
4: load w, B + z
5: temp <- temp & w
)";

AmOptions spec_b(Word window) {
  AmOptions o;
  o.sem = parse_semantics("b");
  o.window = window;
  return o;
}

}  // namespace

TEST(Sym, BoundsCheckHasTwoPaths) {
  Program p = parse_program(kBounds);
  SmtPathSolver solver(SolverConfig::from_env());
  SymConfig init = sym_initial(p, {});
  Exploration ex = sym_am_explore(p, init, spec_b(2), solver);
  ASSERT_TRUE(ex.complete) << ex.incomplete_reason;
  ASSERT_EQ(ex.runs.size(), 2u);
  std::vector<std::string> traces;
  for (const auto &r : ex.runs) traces.push_back(format_sym_trace(r.trace));
  std::sort(traces.begin(), traces.end());
  EXPECT_EQ(traces[1],
            "sympc ((r_y < r_size) == 0) . pc bot . start_B 0 . pc 2 . load (r_A + r_y) . rollback_B 0");
  EXPECT_EQ(traces[0],
            "sympc ((r_y < r_size) != 0) . pc 2 . start_B 0 . pc bot . rollback_B 0 . load (r_A + r_y) . "
            "load (r_B + (m0[(r_A + r_y)] * 512))");
}

TEST(Sym, ConcretizeMatchesConcreteRun) {
  Program p = parse_program(kBounds);
  SymConfig init = sym_initial(p, {});
  Valuation mu;
  mu.vars = {{"r_y", 5}, {"r_size", 3}, {"r_A", 0x1000}, {"r_B", 0x8000}};
  SymRun run = sym_am_run(p, init, spec_b(2), mu);
  Config c = concrete_config(p, {}, mu);
  EXPECT_EQ(concretize(run, mu, p.width()), am_run(p, c, spec_b(2)).trace);
  Valuation other = mu;
  other.vars["r_y"] = 1;
  EXPECT_THROW(concretize(run, other, p.width()), Error);
}

TEST(Sym, StraightLineHasOnePath) {
  Program p = parse_program("0: load a, b + 4\n1: store a, c\n");
  SmtPathSolver solver(SolverConfig::from_env());
  Exploration ex = sym_am_explore(p, sym_initial(p, {}), spec_b(3), solver);
  ASSERT_EQ(ex.runs.size(), 1u);
  EXPECT_TRUE(ex.runs[0].path_condition().empty());
  EXPECT_EQ(ex.queries, 0u);
}

TEST(Sym, ReadOverWriteAgreesWithEnumeration) {
  const unsigned w = 4;
  SymExpr a = sym_var("a"), b = sym_var("b"), v = sym_var("v");
  SymMem m = sym_write(sym_base("m0"), a, v);
  SymExpr r = sym_read(m, b, w);
  SymExpr same = sym_read(m, a, w);
  EXPECT_TRUE(sym_equal(same, v));
  SymExpr shifted = sym_read(sym_write(sym_base("m0"), sym_binary(BinOp::Add, a, sym_word(1, w), w), v), a, w);
  EXPECT_EQ(shifted->kind, SymNode::Kind::Read);
  EXPECT_TRUE(shifted->mem->is_base());
  for (Word x = 0; x < 16; ++x)
    for (Word y = 0; y < 16; ++y) {
      Valuation mu;
      mu.vars = {{"a", x}, {"b", y}, {"v", 9}};
      for (Word k = 0; k < 16; ++k) mu.arrays["m0"][k] = (k * 3) & 15;
      Word expect = x == y ? 9 : (y * 3) & 15;
      ASSERT_EQ(sym_eval(r, mu, w).w, expect);
    }
}

TEST(Sym, SimplifierKeepsMeaning) {
  const unsigned w = 4;
  SymExpr x = sym_var("x");
  SymExpr e = sym_binary(BinOp::Sub, sym_binary(BinOp::Add, x, sym_word(5, w), w), sym_word(5, w), w);
  EXPECT_TRUE(sym_equal(e, x));
  EXPECT_TRUE(is_const(sym_binary(BinOp::Eq, sym_binary(BinOp::Add, x, sym_word(1, w), w), x, w)));
  EXPECT_THROW(sym_binary(BinOp::Div, x, sym_word(0, w), w), EvalError);
}

TEST(Smt, Encoding) {
  SmtQuery q(4);
  EXPECT_EQ(q.term(sym_word(7, 4), ""), "(_ bv7 4)");
  SymExpr c = sym_ite(sym_var("c"), sym_word(1, 4), sym_word(2, 4));
  EXPECT_EQ(q.term(c, "_1"), "(ite (not (= c_1 (_ bv0 4))) (_ bv1 4) (_ bv2 4))");
  SmtQuery a(4), b(4);
  SymExpr e = sym_binary(BinOp::Shl, sym_var("x"), sym_var("y"), 4);
  a.assert_nonzero(e, "");
  b.assert_nonzero(e, "");
  EXPECT_EQ(a.text(), b.text());
  EXPECT_NE(a.text().find("bvurem"), std::string::npos);
}

TEST(Smt, SolverAnswers) {
  SolverConfig cfg = SolverConfig::from_env();
  SmtPathSolver s(cfg);
  EXPECT_EQ(s.solve({sym_word(0, 4)}, 4).status, SatStatus::Unsat);
  PathModel m = s.solve({sym_binary(BinOp::Eq, sym_var("x"), sym_word(3, 4), 4)}, 4);
  ASSERT_EQ(m.status, SatStatus::Sat) << m.reason;
  EXPECT_EQ(m.model.var("x"), 3u);
  // read(write(m0, a, v), a) != v is unsatisfiable
  SymNode rn;
  rn.kind = SymNode::Kind::Read;
  rn.mem = sym_write(sym_base("m0"), sym_var("a"), sym_var("v"));
  rn.a = sym_var("a");
  SymExpr raw = std::make_shared<const SymNode>(rn);
  SymNode ne;
  ne.kind = SymNode::Kind::Binary;
  ne.bop = BinOp::Ne;
  ne.a = raw;
  ne.b = sym_var("v");
  EXPECT_EQ(s.solve({std::make_shared<const SymNode>(ne)}, 4).status, SatStatus::Unsat);
  // memory cells come back in the model
  SymExpr cell = sym_read(sym_base("m0"), sym_var("p"), 4);
  PathModel mm = s.solve({sym_binary(BinOp::Eq, cell, sym_word(11, 4), 4)}, 4);
  ASSERT_EQ(mm.status, SatStatus::Sat);
  EXPECT_EQ(sym_eval(cell, mm.model, 4).w, 11u);
}

TEST(Smt, MissingSolverIsUnknown) {
  SolverConfig cfg;
  cfg.path = "/nonexistent/solver";
  SmtPathSolver s(cfg);
  EXPECT_EQ(s.solve({sym_var("x")}, 4).status, SatStatus::Unknown);
}
