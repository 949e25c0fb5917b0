#include <gtest/gtest.h>

#include <filesystem>

#include "speclab/am.hpp"
#include "speclab/corpus.hpp"
#include "speclab/x86.hpp"

using namespace speclab;

namespace {

std::string corpus_file(const std::string &rel) { return std::string(SPECLAB_CORPUS_DIR) + "/" + rel; }

int count_op(const Program &p, Op op) {
  int n = 0;
  for (const auto &li : p.body()) n += li.instr.op == op;
  return n;
}

// Loads that are not of the named scalars.
std::vector<Word> array_loads(const Program &p, const Trace &t) {
  std::set<Word> scalars;
  for (const auto &name : {"size", "y", "k", "temp"})
    if (auto it = p.symbols().find(name); it != p.symbols().end()) scalars.insert(it->second);
  std::vector<Word> out;
  for (const auto &o : t)
    if (o.kind == ObsKind::Load && !scalars.count(o.val.w)) out.push_back(o.val.w);
  return out;
}

Config v1_config(const Program &p, Word y, Word a_y) {
  const auto &s = p.symbols();
  return initial_config(p, {}, {{s.at("size"), 16}, {s.at("y"), y}, {s.at("A") + y, a_y}});
}

}  // namespace

TEST(X86, UnprotectedBoundsCheck) {
  Program p = load_program_file(corpus_file("x86/listing07_v1.s"));
  EXPECT_EQ(count_op(p, Op::Beqz), 1);
  EXPECT_EQ(p.symbols().at("size"), 0x100u);
  EXPECT_EQ(p.symbols().at("y"), 0x108u);
  Word A = p.symbols().at("A"), B = p.symbols().at("B");

  RunResult r = ns_run(p, v1_config(p, 5, 7));
  EXPECT_EQ(r.status, RunStatus::Terminated);
  EXPECT_EQ(array_loads(p, r.trace), (std::vector<Word>{A + 5, B + 7 * 512}));

  // Out of bounds: nothing but the scalars, unless speculation runs the body.
  Config oob = v1_config(p, 40, 3);
  EXPECT_TRUE(array_loads(p, ns_run(p, oob).trace).empty());
  AmOptions b;
  b.sem = parse_semantics("b");
  RunResult s = am_run(p, oob, b);
  EXPECT_EQ(array_loads(p, s.trace), (std::vector<Word>{A + 40, B + 3 * 512}));
}

TEST(X86, HardenedLoadIsMasked) {
  Program p = load_program_file(corpus_file("x86/listing08_v1_slh.s"));
  AmOptions b;
  b.sem = parse_semantics("b");
  Word A = p.symbols().at("A");
  // Different values at A[y] out of bounds give the same speculative trace.
  RunResult r1 = am_run(p, v1_config(p, 40, 3), b);
  RunResult r2 = am_run(p, v1_config(p, 40, 9), b);
  EXPECT_EQ(r1.trace, r2.trace);
  auto loads = array_loads(p, r1.trace);
  ASSERT_EQ(loads.size(), 2u);
  EXPECT_EQ(loads[0], A + 40);
  EXPECT_EQ(loads[1], p.symbols().at("B") - 1);

  // In bounds the mask is zero and the lookup is the usual one.
  RunResult ok = am_run(p, v1_config(p, 5, 7), b);
  EXPECT_EQ(array_loads(p, nspec_project(ok.trace)), (std::vector<Word>{A + 5, p.symbols().at("B") + 7 * 512}));
}

TEST(X86, Rejections) {
  EXPECT_THROW(translate_x86("  mov %eax, %rbx\n"), ParseError);
  try {
    translate_x86("  mov %eax, %rbx\n");
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("sub-registers unsupported"), std::string::npos);
  }
  EXPECT_THROW(translate_x86("  vpaddd %ymm0, %ymm1, %ymm2\n"), ParseError);
  EXPECT_THROW(translate_x86(""), Error);
  EXPECT_THROW(translate_x86("# only a comment\n"), Error);
}

TEST(X86, FlagLowering) {
  std::string t = translate_x86_text("  cmp %rbx, %rax\n  jae L\n  mov $1, %rcx\nL:\n  nop\n");
  EXPECT_NE(t.find("zf <- rax == rbx"), std::string::npos) << t;
  EXPECT_NE(t.find("cf <- rax < rbx"), std::string::npos) << t;
  Program p = translate_x86("  cmp %rbx, %rax\n  jae L\n  mov $1, %rcx\nL:\n  nop\n");
  // jae is taken when rax >= rbx, so rcx stays 0.
  for (auto [ax, bx, cx] : {std::tuple<Word, Word, Word>{5, 3, 0}, {3, 3, 0}, {2, 3, 1}}) {
    Config c = initial_config(p, {{"rax", ax}, {"rbx", bx}});
    RunResult r = ns_run(p, c);
    EXPECT_EQ(r.final_config.reg(*p.find_reg("rcx")).w, cx) << ax << " " << bx;
  }
}

TEST(X86, DefaultLayout) {
  SymbolUse use;
  use.scalars = {"y", "size", "zeta", "alpha"};
  use.arrays = {"B", "A"};
  auto l = default_symbol_layout(use);
  EXPECT_EQ(l.at("size"), 0x100u);
  EXPECT_EQ(l.at("y"), 0x108u);
  EXPECT_EQ(l.at("alpha"), 0x110u);
  EXPECT_EQ(l.at("zeta"), 0x118u);
  EXPECT_EQ(l.at("A"), 0x1000u);
  EXPECT_EQ(l.at("B"), 0x2000u);
  EXPECT_TRUE(default_symbol_layout({}).empty());

  // No two symbols overlap: scalars take 8 bytes, arrays 0x1000.
  for (int n : {1, 5, 40}) {
    SymbolUse u;
    for (int i = 0; i < n; ++i) {
      u.scalars.insert("s" + std::to_string(i));
      u.arrays.insert("a" + std::to_string(i));
    }
    std::vector<std::pair<Word, Word>> spans;
    for (const auto &[name, addr] : default_symbol_layout(u))
      spans.emplace_back(addr, addr + (u.arrays.count(name) ? 0x1000 : 8));
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) EXPECT_LE(spans[i - 1].second, spans[i].first);
  }
}

TEST(X86, LayoutOverride) {
  X86Options o;
  o.layout["y"] = 0x40;
  Program p = translate_x86("  mov y, %rax\n", o);
  EXPECT_EQ(p.symbols().at("y"), 0x40u);
}

TEST(X86, RoundTripsThroughPrinter) {
  for (const auto &entry : std::filesystem::directory_iterator(corpus_file("x86"))) {
    Program p = load_program_file(entry.path().string());
    EXPECT_TRUE(check_well_formed(p).empty()) << entry.path();
    Program q = parse_program(print_program(p));
    EXPECT_TRUE(same_program(p, q)) << entry.path() << "\n" << print_program(p);
  }
}
