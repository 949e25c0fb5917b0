#pragma once

// Small random μASM programs for the property suites. Programs use registers
// a and b (plus sp), 4-bit words by default, and optionally a function f
// reached by call.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "speclab/ns.hpp"

namespace gen {

struct Options {
  int max_instrs = 6;
  bool calls = true;
  bool indirect = true;
  bool barriers = true;
  bool backward = false;  // backward branches and jumps
};

inline int pick(std::mt19937 &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::string reg(std::mt19937 &rng) { return pick(rng, 0, 1) ? "a" : "b"; }

inline std::string expr(std::mt19937 &rng) {
  static const char *ops[] = {"+", "-", "&", "^", "<", "*", "|"};
  switch (pick(rng, 0, 3)) {
    case 0: return std::to_string(pick(rng, 0, 15));
    case 1: return reg(rng);
    case 2: return reg(rng) + " " + ops[pick(rng, 0, 6)] + " " + std::to_string(pick(rng, 0, 15));
    default: return reg(rng) + " " + ops[pick(rng, 0, 6)] + " " + reg(rng);
  }
}

// One instruction at label `at` in a program whose labels run [lo, end).
inline std::string instr(std::mt19937 &rng, int at, int lo, int end, const Options &o, bool has_f) {
  for (;;) {
    switch (pick(rng, 0, 11)) {
      case 0: return "skip";
      case 1:
      case 2: return reg(rng) + " <- " + expr(rng);
      case 3:
      case 4: return "load " + reg(rng) + ", " + expr(rng);
      case 5:
      case 6: return "store " + reg(rng) + ", " + expr(rng);
      case 7: {
        int t = pick(rng, o.backward ? lo : at + 2, end + 1);
        if (t == at + 1) continue;
        return "beqz " + reg(rng) + ", " + (t > end ? std::string("bot") : std::to_string(t));
      }
      case 8: return "cmov " + reg(rng) + ", " + expr(rng) + ", " + reg(rng);
      case 9:
        if (!o.barriers) continue;
        return "spbarr";
      case 10:
        if (!o.indirect) continue;
        if (pick(rng, 0, 2) == 0) return "endbr";
        return "jmp " + reg(rng);
      case 11:
        if (has_f) return "call f";
        if (!o.backward) continue;
        return "jmp " + std::to_string(pick(rng, lo, end));
    }
  }
}

inline std::string program(std::mt19937 &rng, const Options &o) {
  int n = pick(rng, 1, o.max_instrs);
  std::ostringstream out;
  bool has_f = o.calls && n >= 4 && pick(rng, 0, 2) == 0;
  int lo = 0;
  if (has_f) {
    int flen = pick(rng, 1, std::min(2, n - 3));
    int main = 1 + flen + 1;
    out << "0: jmp " << main << "\nfn f:\n";
    for (int i = 1; i <= flen; ++i) out << i << ": " << instr(rng, i, 1, main, o, false) << "\n";
    out << (flen + 1) << ": ret\n";
    lo = main;
  }
  int end = has_f ? n : n;
  // main occupies [lo, end)
  if (lo >= end) end = lo + 1;
  for (int i = lo; i < end; ++i) out << i << ": " << instr(rng, i, lo, end, o, has_f) << "\n";
  return out.str();
}

// Fully defined memory so that returns never read an unmapped cell.
inline std::map<speclab::Word, speclab::Word> memory_image(unsigned width = 4) {
  std::map<speclab::Word, speclab::Word> m;
  speclab::Word size = speclab::Word{1} << width;
  for (speclab::Word i = 0; i < size; ++i) m[i] = (i * 5 + 3) & (size - 1);
  return m;
}

inline speclab::Config config(const speclab::Program &p, speclab::Word a, speclab::Word b) {
  return speclab::initial_config(p, {{"a", a}, {"b", b}, {"sp", 12}}, memory_image(p.width()));
}

}  // namespace gen
