#include <gtest/gtest.h>

#include <random>

#include "program_gen.hpp"
#include "speclab/compose.hpp"
#include "speclab/oracle.hpp"
#include "speclab/smt.hpp"
#include "speclab/sym.hpp"

using namespace speclab;

namespace {

constexpr std::size_t kFuel = 2000;

// Same outcome, and the non-speculative projection of the speculative trace is
// the non-speculative trace.
::testing::AssertionResult consistent(const RunResult &ns, const RunResult &spec) {
  if (ns.status == RunStatus::FuelExhausted || spec.status == RunStatus::FuelExhausted)
    return ::testing::AssertionSuccess();
  if (ns.status != spec.status)
    return ::testing::AssertionFailure() << "status " << to_string(ns.status) << " vs " << to_string(spec.status)
                                         << " (" << spec.error << ")";
  Trace proj;
  try {
    proj = nspec_project(spec.trace);
  } catch (const ProjectionError &e) {
    return ::testing::AssertionFailure() << e.what() << " in " << format_trace(spec.trace);
  }
  if (proj != ns.trace)
    return ::testing::AssertionFailure() << "ns " << format_trace(ns.trace) << "\nspec " << format_trace(spec.trace);
  return ::testing::AssertionSuccess();
}



std::vector<std::string> corpus(std::uint32_t seed, int n, int max_instrs) {
  std::mt19937 rng(seed);
  gen::Options go;
  go.max_instrs = max_instrs;
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(gen::program(rng, go));
  return out;
}

}  // namespace

// Every oracle agrees with the non-speculative semantics after projection,
// over all initial register files.
TEST(Properties, NsConsistencyOracle) {
  std::vector<std::unique_ptr<PredictionOracle>> oracles;
  for (const auto &n : builtin_oracle_names()) oracles.push_back(make_oracle(n));
  auto progs = corpus(20240611, 1000, 6);
  for (const auto &src : progs) {
    Program p = parse_program(src, 4);
    for (Word a = 0; a < 16; ++a)
      for (Word b = 0; b < 16; ++b) {
        Config c = gen::config(p, a, b);
        RunResult ns = ns_run(p, c, kFuel);
        for (const auto &o : oracles)
          for (Mech m : {Mech::B, Mech::J, Mech::S, Mech::R, Mech::SLS}) {
            if (!o->supports(m)) continue;
            OracleOptions oo;
            oo.kind = m;
            oo.max_window = 3;
            ASSERT_TRUE(consistent(ns, oracle_run(p, c, *o, oo, kFuel)))
                << src << "a=" << a << " b=" << b << " oracle " << o->name() << " " << mech_name(m);
          }
      }
  }
  EXPECT_EQ(progs.size(), 1000u);
}

// The same for every always-mispredict semantics, singletons and combinations.
TEST(Properties, NsConsistencyAlwaysMispredict) {
  const auto sems = all_semantics();
  auto progs = corpus(20240611, 1000, 6);
  for (const auto &src : progs) {
    Program p = parse_program(src, 4);
    for (Word a = 0; a < 16; ++a)
      for (Word b = 0; b < 16; ++b) {
        Config c = gen::config(p, a, b);
        RunResult ns = ns_run(p, c, kFuel);
        for (const auto &s : sems) {
          if (s.has(Mech::J) && p.labelset().empty()) continue;
          AmOptions ao;
          ao.sem = s;
          ao.window = 3;
          ASSERT_TRUE(consistent(ns, am_run(p, c, ao, kFuel))) << src << "a=" << a << " b=" << b << " " << s.id();
        }
      }
  }
  EXPECT_EQ(progs.size(), 1000u);
}

// Confluence and projection preservation for every combination.
TEST(Properties, CompositionWellFormed) {
  std::mt19937 rng(77);
  gen::Options go;
  go.max_instrs = 6;
  std::vector<Program> progs;
  for (int i = 0; i < 300; ++i) progs.push_back(parse_program(gen::program(rng, go), 4));
  std::vector<WfCase> cases;
  for (std::size_t i = 0; i < progs.size(); ++i)
    for (Word a : {0, 3, 9})
      for (Word b : {0, 5})
        cases.push_back({"p" + std::to_string(i), &progs[i], gen::config(progs[i], a, b)});
  for (const auto &s : all_combinations()) {
    WfReport r = check_wellformedness(s, cases, 3, kFuel);
    EXPECT_TRUE(r.ok()) << s.id() << ": " << r.violations.front().condition << " " << r.violations.front().detail;
  }
  // The unrestricted {R, SLS} pair has a witness.
  WfReport broken = check_wellformedness(broken_r_sls(), cases, 3, kFuel);
  ASSERT_FALSE(broken.ok());
  EXPECT_EQ(broken.violations.front().condition, "confluence");
}

// The symbolic run set, concretized, is exactly the concrete always-mispredict
// behaviour: every initial register file satisfies one path condition and that
// run concretizes to the concrete trace.
TEST(Properties, SymbolicConsistency) {
  auto progs = corpus(4242, 240, 6);
  auto sems = all_semantics();
  SmtPathSolver solver(SolverConfig::from_env());
  auto image = std::make_shared<const MemoryImage>(gen::memory_image());
  int checked = 0;
  std::size_t paths = 0;
  for (std::size_t i = 0; i < progs.size(); ++i) {
    Program p = parse_program(progs[i], 4);
    AmOptions ao;
    ao.window = 3;
    if (i % 24 != 23) ao.sem = sems[i % 23];
    if (ao.sem.has(Mech::J) && p.labelset().empty()) ao.sem = parse_semantics("b");
    SymInit init;
    init.memory = image;
    if (auto sp = p.find_reg("sp")) init.concrete_regs[*sp] = 12;
    ExploreOptions xo;
    xo.fuel = kFuel;
    Exploration ex = sym_am_explore(p, sym_initial(p, init), ao, solver, xo);
    if (!ex.complete) continue;
    paths += ex.runs.size();
    for (Word a = 0; a < 16; ++a)
      for (Word b = 0; b < 16; ++b) {
        Valuation mu;
        mu.vars = {{"r_a", a}, {"r_b", b}};
        RunResult concrete = am_run(p, gen::config(p, a, b), ao, kFuel);
        int matching = 0;
        for (const auto &run : ex.runs) {
          Trace t;
          try {
            t = concretize(run, mu, 4);
          } catch (const Error &) {
            continue;
          }
          ++matching;
          ASSERT_EQ(t, concrete.trace) << progs[i] << ao.sem.id() << " a=" << a << " b=" << b << "\nsym "
                                       << format_sym_trace(run.trace);
          ASSERT_EQ(run.status, concrete.status) << progs[i] << ao.sem.id() << " a=" << a << " b=" << b;
        }
        ASSERT_EQ(matching, 1) << progs[i] << ao.sem.id() << " a=" << a << " b=" << b;
      }
    ++checked;
  }
  EXPECT_GE(checked, 200);
  RecordProperty("paths", static_cast<int>(paths));
}
