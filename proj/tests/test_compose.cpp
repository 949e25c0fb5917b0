#include <gtest/gtest.h>

#include "speclab/compose.hpp"

using namespace speclab;

TEST(Compose, DerivedExclusions) {
  Semantics sr = make_composition({Mech::S, Mech::R});
  EXPECT_EQ(sr.excluded(Mech::S), op_bit(Op::Call) | op_bit(Op::Ret));
  EXPECT_EQ(sr.excluded(Mech::R), op_bit(Op::Store));
  EXPECT_EQ(make_composition({Mech::B}).excluded(Mech::B), 0u);
  Semantics bjsr = parse_semantics("b+j+s+r");
  EXPECT_EQ(bjsr.excluded(Mech::B), op_bit(Op::Call) | op_bit(Op::Ret) | op_bit(Op::Store) | op_bit(Op::Jmp));
  EXPECT_THROW(parse_semantics("r+sls"), SemanticsError);
  EXPECT_EQ(all_combinations().size(), 18u);
}

TEST(Compose, ProjectionOfCombinedTrace) {
  // Store-bypass inside a return misprediction.
  Program p = parse_program(R"(
0: jmp 3
fn f:
1: store v, sp
2: ret
3: call f
4: store v, 40
5: load a, 40
)");
  Config c = initial_config(p, {{"sp", 0x800}, {"v", 7}}, {});
  AmOptions o;
  o.sem = parse_semantics("s+r");
  o.window = 4;
  auto both = am_run(p, c, o);
  std::string t = format_trace(both.trace);
  EXPECT_NE(t.find("start_R"), std::string::npos) << t;
  EXPECT_NE(t.find("start_S"), std::string::npos) << t;
  for (Mech m : {Mech::S, Mech::R}) {
    AmOptions single = o;
    single.sem = make_composition({m});
    EXPECT_EQ(canonical_ids(project_trace(both.trace, m)), canonical_ids(am_run(p, c, single).trace));
  }
}

TEST(Compose, WellFormedOnSample) {
  Program p = parse_program("0: beqz x, 3\n1: store x, 9\n2: load y, 9\n3: skip\n");
  std::vector<WfCase> cases{{"s", &p, initial_config(p, {{"x", 0}}, {})},
                            {"s1", &p, initial_config(p, {{"x", 1}}, {})}};
  WfReport r = check_wellformedness(parse_semantics("b+s"), cases);
  EXPECT_TRUE(r.ok());
  EXPECT_GT(r.checks, 0u);
}

TEST(Compose, BrokenReturnComposition) {
  Program p = parse_program("0: jmp 2\nfn f:\n1: ret\n2: call f\n3: skip\n");
  std::vector<WfCase> cases{{"ret", &p, initial_config(p, {{"sp", 64}}, {})}};
  WfReport r = check_wellformedness(broken_r_sls(), cases);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].condition, "confluence");
}

TEST(Compose, UpwardClosure) {
  std::map<std::string, bool> d;
  for (const auto &s : all_semantics()) d[s.id()] = s.has(Mech::S);
  EXPECT_TRUE(upward_closed(d));
  d["b+s"] = false;
  std::string why;
  EXPECT_FALSE(upward_closed(d, &why));
  EXPECT_NE(why.find("b+s"), std::string::npos);
}
