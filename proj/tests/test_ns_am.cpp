#include <gtest/gtest.h>

#include "speclab/am.hpp"

using namespace speclab;

namespace {

const char *kExample31 = R"(
0: x <- y < size
1: beqz x, bot
2: load z, A + y
3: z <- z * 512
4: load w, B + z
5: temp <- temp & w
)";

Config bounds_config(const Program &p, Word y, Word size) {
  return initial_config(p, {{"y", y}, {"size", size}, {"A", 0x1000}, {"B", 0x8000}}, {{0x1000 + y, 3}});
}

}  // namespace

TEST(Ns, OutOfBounds) {
  Program p = parse_program(kExample31);
  auto r = ns_run(p, bounds_config(p, 20, 10));
  EXPECT_EQ(r.status, RunStatus::Terminated);
  EXPECT_EQ(format_trace(r.trace), "pc bot");
}

TEST(Ns, InBounds) {
  Program p = parse_program(kExample31);
  auto r = ns_run(p, bounds_config(p, 2, 10));
  EXPECT_EQ(format_trace(r.trace), "pc 2 . load 4098 . load " + std::to_string(0x8000 + 3 * 512));
}

TEST(Am, BranchTraces) {
  Program p = parse_program(kExample31);
  AmOptions o;
  o.sem = parse_semantics("b");
  o.window = 2;
  auto out = am_run(p, bounds_config(p, 20, 10), o);
  EXPECT_EQ(format_trace(out.trace), "pc bot . start_B 0 . pc 2 . load 4116 . rollback_B 0");
  auto in = am_run(p, bounds_config(p, 2, 10), o);
  EXPECT_EQ(format_trace(in.trace),
            "pc 2 . start_B 0 . pc bot . rollback_B 0 . load 4098 . load " + std::to_string(0x8000 + 3 * 512));
}
