#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "speclab/trace.hpp"
#include "speclab/uasm.hpp"

namespace speclab {

// Set of instruction kinds, one bit per Op.
using OpSet = std::uint32_t;
constexpr OpSet op_bit(Op op) { return OpSet{1} << static_cast<int>(op); }

// Instruction kinds whose speculation a mechanism owns.
OpSet owned_ops(Mech m);

// A speculative semantics: a set of mechanisms plus, per mechanism, the
// exclusion set Z of instruction kinds it must leave to the others. The empty
// set of mechanisms is the non-speculative semantics.
struct Semantics {
  std::vector<Mech> mechs;                    // ascending
  std::array<OpSet, kMechCount> exclude{};    // indexed by Mech

  bool has(Mech m) const;
  bool empty() const { return mechs.empty(); }
  std::string id() const;                     // "b+s", or "ns"
  OpSet excluded(Mech m) const { return exclude[static_cast<int>(m)]; }
};

class SemanticsError : public Error {
 public:
  using Error::Error;
};

// Derives Z from the owner map. Throws SemanticsError for {R, SLS} or
// duplicates.
Semantics make_composition(std::vector<Mech> mechs);

// "b", "b+j+s+r", "ns". Throws SemanticsError on unknown or conflicting ids.
Semantics parse_semantics(const std::string &id);

// The 18 admissible non-empty combinations with at least two members, plus
// nothing else; singletons come from all_singletons().
std::vector<Semantics> all_combinations();
std::vector<Semantics> all_singletons();
// Every admissible non-empty semantics (5 singletons + 18 combinations).
std::vector<Semantics> all_semantics();

// {R, SLS} with empty exclusion sets, which breaks confluence on ret.
Semantics broken_r_sls();

// Applies a Z override, e.g. for negative well-formedness tests.
Semantics with_exclusions(std::vector<Mech> mechs, std::array<OpSet, kMechCount> z);

// a is a sub-combination of b.
bool subsumes(const Semantics &b, const Semantics &a);

}  // namespace speclab
