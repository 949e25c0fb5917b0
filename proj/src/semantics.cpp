#include "speclab/semantics.hpp"

#include <algorithm>

namespace speclab {

OpSet owned_ops(Mech m) {
  switch (m) {
    case Mech::B: return op_bit(Op::Beqz);
    case Mech::J: return op_bit(Op::Jmp);
    case Mech::S: return op_bit(Op::Store);
    case Mech::R: return op_bit(Op::Call) | op_bit(Op::Ret);
    case Mech::SLS: return op_bit(Op::Ret);
  }
  return 0;
}

bool Semantics::has(Mech m) const { return std::find(mechs.begin(), mechs.end(), m) != mechs.end(); }

std::string Semantics::id() const {
  if (mechs.empty()) return "ns";
  std::string s;
  for (Mech m : mechs) {
    if (!s.empty()) s += "+";
    s += mech_name(m);
  }
  return s;
}

Semantics with_exclusions(std::vector<Mech> mechs, std::array<OpSet, kMechCount> z) {
  std::sort(mechs.begin(), mechs.end());
  if (std::adjacent_find(mechs.begin(), mechs.end()) != mechs.end())
    throw SemanticsError("mechanism listed twice");
  Semantics s;
  s.mechs = std::move(mechs);
  s.exclude = z;
  for (auto &x : s.exclude) x &= ~op_bit(Op::SpBarr);
  return s;
}

Semantics make_composition(std::vector<Mech> mechs) {
  bool r = std::count(mechs.begin(), mechs.end(), Mech::R) > 0;
  bool sls = std::count(mechs.begin(), mechs.end(), Mech::SLS) > 0;
  if (r && sls) throw SemanticsError("combinations of r and sls are not supported");
  std::array<OpSet, kMechCount> z{};
  for (Mech k : mechs)
    for (Mech other : mechs)
      if (other != k) z[static_cast<int>(k)] |= owned_ops(other);
  return with_exclusions(std::move(mechs), z);
}

Semantics parse_semantics(const std::string &id) {
  if (id == "ns") return Semantics{};
  std::vector<Mech> ms;
  std::size_t start = 0;
  while (start <= id.size()) {
    std::size_t plus = id.find('+', start);
    std::string part = id.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    auto m = parse_mech(part);
    if (!m) throw SemanticsError("unknown mechanism '" + part + "' in '" + id + "'");
    ms.push_back(*m);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return make_composition(ms);
}

std::vector<Semantics> all_singletons() {
  std::vector<Semantics> out;
  for (int i = 0; i < kMechCount; ++i) out.push_back(make_composition({static_cast<Mech>(i)}));
  return out;
}

std::vector<Semantics> all_semantics() {
  std::vector<Semantics> out;
  for (unsigned mask = 1; mask < (1u << kMechCount); ++mask) {
    std::vector<Mech> ms;
    for (int i = 0; i < kMechCount; ++i)
      if (mask & (1u << i)) ms.push_back(static_cast<Mech>(i));
    bool r = mask & (1u << static_cast<int>(Mech::R));
    bool sls = mask & (1u << static_cast<int>(Mech::SLS));
    if (r && sls) continue;
    out.push_back(make_composition(ms));
  }
  std::stable_sort(out.begin(), out.end(), [](const Semantics &a, const Semantics &b) {
    if (a.mechs.size() != b.mechs.size()) return a.mechs.size() < b.mechs.size();
    return a.mechs < b.mechs;
  });
  return out;
}

std::vector<Semantics> all_combinations() {
  std::vector<Semantics> out;
  for (auto &s : all_semantics())
    if (s.mechs.size() >= 2) out.push_back(s);
  return out;
}

Semantics broken_r_sls() { return with_exclusions({Mech::R, Mech::SLS}, {}); }

bool subsumes(const Semantics &b, const Semantics &a) {
  return std::includes(b.mechs.begin(), b.mechs.end(), a.mechs.begin(), a.mechs.end());
}

}  // namespace speclab
