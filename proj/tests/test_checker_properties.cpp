#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "program_gen.hpp"
#include "speclab/am.hpp"
#include "speclab/checker.hpp"
#include "speclab/oracle.hpp"

using namespace speclab;

namespace {

constexpr std::size_t kFuel = 400;

enum class Truth { Secure, Insecure, Undecided };

// Exhaustive answer at W=4: a is low, b is high, sp and memory are fixed.
struct BruteForce {
  Truth sni = Truth::Undecided, seqct = Truth::Undecided, gni = Truth::Undecided;
};

BruteForce brute_force(const Program &p, const Semantics &sem, Word window) {
  BruteForce out;
  AmOptions spec;
  spec.sem = sem;
  spec.window = window;
  AmOptions ns;
  ns.window = window;
  std::vector<RunResult> s(256), n(256);
  try {
    for (Word a = 0; a < 16; ++a)
      for (Word b = 0; b < 16; ++b) {
        Config c = gen::config(p, a, b);
        s[a * 16 + b] = am_run(p, c, spec, kFuel);
        n[a * 16 + b] = am_run(p, c, ns, kFuel);
        if (s[a * 16 + b].status == RunStatus::FuelExhausted || n[a * 16 + b].status == RunStatus::FuelExhausted)
          return out;
      }
  } catch (const Error &) {
    return out;
  }
  bool sni = false, seqct = false, gni = false;
  for (Word a = 0; a < 16; ++a)
    for (Word b1 = 0; b1 < 16; ++b1)
      for (Word b2 = b1 + 1; b2 < 16; ++b2) {
        const RunResult &x = s[a * 16 + b1], &y = s[a * 16 + b2];
        if (nspec_project(x.trace) == nspec_project(y.trace) && spec_project(x.trace) != spec_project(y.trace))
          sni = true;
        if (x.trace != y.trace || x.status != y.status) gni = true;
        const RunResult &u = n[a * 16 + b1], &v = n[a * 16 + b2];
        if (u.trace != v.trace || u.status != v.status) seqct = true;
      }
  auto truth = [](bool bad) { return bad ? Truth::Insecure : Truth::Secure; };
  out.sni = truth(sni);
  out.seqct = truth(seqct);
  out.gni = truth(gni);
  return out;
}

CheckOptions options(const Program &p, const Semantics &sem, CheckMode mode, Word window) {
  CheckOptions o;
  o.sem = sem;
  o.mode = mode;
  o.window = window;
  o.explore.fuel = kFuel;
  o.solver = SolverConfig::from_env();
  o.init.concrete_regs[kSp] = 12;
  o.init.memory = std::make_shared<const MemoryImage>(gen::memory_image(p.width()));
  return o;
}

// Independent re-check of an Insecure witness.
::testing::AssertionResult witness_holds(const Program &p, const CheckOptions &opt, const Witness &w) {
  RegId a = *p.find_reg("a");
  if (w.first.reg(a) != w.second.reg(a)) return ::testing::AssertionFailure() << "inputs not low-equivalent";
  AmOptions ao;
  if (opt.mode != CheckMode::SeqCt) ao.sem = opt.sem;
  ao.window = opt.window;
  RunResult x = am_run(p, w.first, ao, kFuel), y = am_run(p, w.second, ao, kFuel);
  if (x.trace != w.first_trace || y.trace != w.second_trace) return ::testing::AssertionFailure() << "traces do not replay";
  if (opt.mode == CheckMode::Sni) {
    if (nspec_project(x.trace) != nspec_project(y.trace)) return ::testing::AssertionFailure() << "ns traces differ";
    Trace sx = spec_project(x.trace), sy = spec_project(y.trace);
    if (sx == sy) return ::testing::AssertionFailure() << "speculative traces agree";
    if (w.index >= std::max(sx.size(), sy.size()) || (w.index < std::min(sx.size(), sy.size()) && sx[w.index] == sy[w.index]))
      return ::testing::AssertionFailure() << "cited index " << w.index << " does not differ";
  } else if (x.trace == y.trace && x.status == y.status) {
    return ::testing::AssertionFailure() << "runs are indistinguishable";
  }
  return ::testing::AssertionSuccess();
}

const char *name(Truth t) { return t == Truth::Secure ? "secure" : t == Truth::Insecure ? "insecure" : "undecided"; }

struct Tally {
  int seen = 0, decided = 0;
  int insecure[3] = {0, 0, 0};
};

// Checks p in all three modes against the enumerated truth.
void compare(const std::string &src, const Program &p, const Semantics &sem, Word window, const BruteForce &truth,
             Tally &t) {
  ++t.seen;
  Policy pol;
  pol.low_regs = {"a", "sp"};
  VerdictKind got[3];
  bool all = true;
  int k = 0;
  for (CheckMode mode : {CheckMode::Sni, CheckMode::SeqCt, CheckMode::Gni}) {
    CheckOptions opt = options(p, sem, mode, window);
    Verdict v;
    try {
      v = check_program(p, pol, opt);
    } catch (const Error &e) {
      v.kind = VerdictKind::Unknown;  // e.g. J with no landing pads on a path the runs never take
      v.cause = e.what();
    }
    got[k] = v.kind;
    Truth want = mode == CheckMode::Sni ? truth.sni : mode == CheckMode::SeqCt ? truth.seqct : truth.gni;
    if (v.kind == VerdictKind::Unknown) {
      all = false;
    } else {
      EXPECT_EQ(to_string(v.kind), std::string(name(want)))
          << to_string(mode) << " under " << sem.id() << " (" << v.cause << ")\n" << src;
    }
    if (v.kind == VerdictKind::Insecure) {
      ++t.insecure[k];
      EXPECT_TRUE(v.witness.has_value());
      if (v.witness) EXPECT_TRUE(witness_holds(p, opt, *v.witness)) << to_string(mode) << "\n" << src;
    }
    ++k;
  }
  if (!all) return;
  ++t.decided;
  bool gni_secure = got[2] == VerdictKind::Secure;
  EXPECT_EQ(gni_secure, got[0] == VerdictKind::Secure && got[1] == VerdictKind::Secure) << src;
  if (gni_secure) EXPECT_EQ(got[0], VerdictKind::Secure);
}

// SNI under oracle o, by enumeration; nullopt when some run does not finish.
std::optional<bool> oracle_sni(const Program &p, const PredictionOracle &o, Mech m, Word window) {
  OracleOptions oo;
  oo.kind = m;
  oo.max_window = window;
  std::vector<RunResult> runs(256);
  for (Word a = 0; a < 16; ++a)
    for (Word b = 0; b < 16; ++b) {
      runs[a * 16 + b] = oracle_run(p, gen::config(p, a, b), o, oo, kFuel);
      if (runs[a * 16 + b].status == RunStatus::FuelExhausted) return std::nullopt;
    }
  for (Word a = 0; a < 16; ++a)
    for (Word b1 = 0; b1 < 16; ++b1)
      for (Word b2 = b1 + 1; b2 < 16; ++b2) {
        const Trace &x = runs[a * 16 + b1].trace, &y = runs[a * 16 + b2].trace;
        if (nspec_project(x) == nspec_project(y) && spec_project(x) != spec_project(y)) return false;
      }
  return true;
}

const std::vector<std::string> kSems = {"b", "s", "r", "sls", "b+s", "s+r", "b+r", "b+j+s+r", "j"};

}  // namespace

// The symbolic checker agrees with exhaustive enumeration of all low-equal
// input pairs, in all three modes; insecure witnesses replay; GNI is exactly
// SeqCT and SNI together.
TEST(CheckerProperties, AgreesWithBruteForce) {
  std::mt19937 rng(771);
  gen::Options go;
  go.max_instrs = 8;
  Tally t;
  for (int i = 0; i < 240; ++i) {
    std::string src = gen::program(rng, go);
    Program p = parse_program(src, 4);
    p.reg("a");
    p.reg("b");
    Semantics sem = parse_semantics(kSems[static_cast<std::size_t>(i) % kSems.size()]);
    BruteForce truth = brute_force(p, sem, 3);
    if (truth.sni != Truth::Undecided) compare(src, p, sem, 3, truth, t);
  }
  std::cout << t.seen << " programs enumerated, " << t.decided << " decided in every mode; insecure: "
            << t.insecure[0] << " sni, " << t.insecure[1] << " seqct, " << t.insecure[2] << " gni\n";
  EXPECT_GE(t.decided, 100);
  EXPECT_GE(t.insecure[1], 20);
}

// Always-mispredict covers every predictor: a program secure under the
// abstract machine is secure under each built-in oracle.
TEST(CheckerProperties, OraclesAreOverapproximated) {
  std::mt19937 rng(4242);
  gen::Options go;
  go.max_instrs = 6;
  int secure = 0, compared = 0;
  for (int i = 0; i < 400; ++i) {
    std::string src = gen::program(rng, go);
    Program p = parse_program(src, 4);
    p.reg("a");
    p.reg("b");
    Mech m = std::vector<Mech>{Mech::B, Mech::J, Mech::S, Mech::R, Mech::SLS}[static_cast<std::size_t>(i) % 5];
    Semantics sem = parse_semantics(mech_name(m));
    if (brute_force(p, sem, 3).sni != Truth::Secure) continue;
    ++secure;
    for (const auto &name : builtin_oracle_names()) {
      auto o = make_oracle(name);
      if (!o->supports(m)) continue;
      auto ok = oracle_sni(p, *o, m, 3);
      if (!ok) continue;
      ++compared;
      EXPECT_TRUE(*ok) << "oracle " << name << " under " << mech_name(m) << "\n" << src;
    }
  }
  std::cout << secure << " programs secure under the abstract machine, " << compared << " oracle comparisons\n";
  EXPECT_GE(secure, 100);
}

// Purely speculative leaks are rare among random programs, so screen many by
// enumeration and check every one that has such a leak.
TEST(CheckerProperties, FindsEveryEnumeratedSpeculativeLeak) {
  std::mt19937 rng(9113);
  gen::Options go;
  go.max_instrs = 8;
  Tally t;
  int screened = 0;
  for (int i = 0; i < 20000 && t.seen < 40; ++i) {
    std::string src = gen::program(rng, go);
    Program p = parse_program(src, 4);
    p.reg("a");
    p.reg("b");
    Semantics sem = parse_semantics(kSems[static_cast<std::size_t>(i) % kSems.size()]);
    BruteForce truth = brute_force(p, sem, 3);
    ++screened;
    if (truth.sni == Truth::Insecure) compare(src, p, sem, 3, truth, t);
  }
  std::cout << screened << " programs screened, " << t.seen << " with a speculative leak, " << t.insecure[0]
            << " reported insecure\n";
  EXPECT_EQ(t.seen, 40);
  EXPECT_EQ(t.insecure[0], t.seen);
}
