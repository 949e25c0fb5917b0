#pragma once

#include <map>
#include <set>
#include <string>

#include "speclab/uasm.hpp"

namespace speclab {

// Data symbols referenced by a listing. Arrays are symbols used as a
// displacement over a register (A(%rbx)); scalars are everything else.
struct SymbolUse {
  std::set<std::string> scalars;
  std::set<std::string> arrays;
};

// Scalars get consecutive 8-byte slots from 0x100 (size, y, k, temp first,
// then the rest in name order); arrays get 0x1000-byte regions from 0x1000
// in name order. A name used both ways is an array.
std::map<std::string, Word> default_symbol_layout(const SymbolUse &use);

struct X86Options {
  std::map<std::string, Word> layout;  // overrides the default address of a symbol
};

// AT&T subset: mov lea add sub and or xor shl shr cmp test, j{mp,e,ne,a,ae,b,be},
// cmov{e,ne,a,ae,b,be}, lfence, call, ret, nop, endbr64. Only 64-bit registers.
// Flags live in the registers zf and cf; conditions are tested through cc,
// memory operands of arithmetic go through tmp. Jump targets that are never
// defined bind to the end of the program. Throws ParseError.
std::string translate_x86_text(const std::string &listing, const X86Options &opt = {});
Program translate_x86(const std::string &listing, const X86Options &opt = {});

}  // namespace speclab
