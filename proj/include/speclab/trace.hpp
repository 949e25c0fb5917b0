#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "speclab/uasm.hpp"

namespace speclab {

enum class Mech { B, J, S, R, SLS };
constexpr int kMechCount = 5;
const char *mech_name(Mech m);       // "b", "j", ...
const char *mech_upper(Mech m);      // "B", "J", ...
std::optional<Mech> parse_mech(const std::string &s);

enum class ObsKind { Load, Store, Pc, Call, Ret, Skip, Start, Commit, Rollback, SymPc };

inline bool is_marker(ObsKind k) { return k == ObsKind::Start || k == ObsKind::Commit || k == ObsKind::Rollback; }

// One observation. `val` carries the address or label (Load/Store/Pc/Ret/Skip)
// or the branch condition (SymPc); V is Value for concrete runs.
template <class V>
struct BasicObs {
  ObsKind kind = ObsKind::Pc;
  V val{};
  Mech mech = Mech::B;   // markers
  Word id = 0;           // markers
  std::string name;      // Call

  static BasicObs load(V v) { return {ObsKind::Load, std::move(v), Mech::B, 0, {}}; }
  static BasicObs store(V v) { return {ObsKind::Store, std::move(v), Mech::B, 0, {}}; }
  static BasicObs pc(V v) { return {ObsKind::Pc, std::move(v), Mech::B, 0, {}}; }
  static BasicObs ret(V v) { return {ObsKind::Ret, std::move(v), Mech::B, 0, {}}; }
  static BasicObs skip(V v) { return {ObsKind::Skip, std::move(v), Mech::B, 0, {}}; }
  static BasicObs call(std::string f) { return {ObsKind::Call, V{}, Mech::B, 0, std::move(f)}; }
  static BasicObs marker(ObsKind k, Mech m, Word id) { return {k, V{}, m, id, {}}; }
};

using Obs = BasicObs<Value>;
using Trace = std::vector<Obs>;

inline bool operator==(const Obs &a, const Obs &b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ObsKind::Call: return a.name == b.name;
    case ObsKind::Start:
    case ObsKind::Commit:
    case ObsKind::Rollback: return a.mech == b.mech && a.id == b.id;
    default: return a.val == b.val;
  }
}
inline bool operator!=(const Obs &a, const Obs &b) { return !(a == b); }

std::string to_string(const Obs &o);
std::string format_trace(const Trace &t, const std::string &sep = " . ");

class ProjectionError : public Error {
 public:
  using Error::Error;
};

// Non-speculative projection: rolled-back segments are erased back to their
// Start (nested segments go with them); Start and Commit markers are dropped.
template <class V>
std::vector<BasicObs<V>> nspec_project(const std::vector<BasicObs<V>> &t) {
  std::vector<BasicObs<V>> out;
  // Walk right to left, then reverse.
  std::size_t i = t.size();
  while (i > 0) {
    const auto &o = t[--i];
    if (o.kind == ObsKind::Start || o.kind == ObsKind::Commit) continue;
    if (o.kind == ObsKind::Rollback) {
      bool found = false;
      while (i > 0) {
        const auto &p = t[--i];
        if (p.kind == ObsKind::Start && p.id == o.id) {
          found = true;
          break;
        }
      }
      if (!found) throw ProjectionError("rollback " + std::to_string(o.id) + " has no matching start");
      continue;
    }
    out.push_back(o);
  }
  return {out.rbegin(), out.rend()};
}

// Speculative projection: only observations inside rolled-back segments,
// without markers.
template <class V>
std::vector<BasicObs<V>> spec_project(const std::vector<BasicObs<V>> &t) {
  std::vector<BasicObs<V>> out;
  std::size_t i = t.size();
  while (i > 0) {
    const auto &o = t[--i];
    if (o.kind != ObsKind::Rollback) continue;
    bool found = false;
    while (i > 0) {
      const auto &p = t[--i];
      if (p.kind == ObsKind::Start && p.id == o.id) {
        found = true;
        break;
      }
      if (!is_marker(p.kind)) out.push_back(p);
    }
    if (!found) throw ProjectionError("rollback " + std::to_string(o.id) + " has no matching start");
  }
  return {out.rbegin(), out.rend()};
}

// Removes every Start_y ... Rollback_y segment with y != keep. Commits of
// other mechanisms are dropped together with their Start.
template <class V>
std::vector<BasicObs<V>> project_trace(const std::vector<BasicObs<V>> &t, Mech keep) {
  std::vector<BasicObs<V>> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto &o = t[i];
    if (o.kind == ObsKind::Start && o.mech != keep) {
      std::size_t j = i + 1;
      for (; j < t.size(); ++j)
        if ((t[j].kind == ObsKind::Rollback || t[j].kind == ObsKind::Commit) && t[j].id == o.id && t[j].mech == o.mech)
          break;
      if (j == t.size()) throw ProjectionError("start " + std::to_string(o.id) + " is never closed");
      if (t[j].kind == ObsKind::Rollback) {
        i = j;
      }
      // A committed transaction's body stays, only its markers go.
      continue;
    }
    if (o.kind == ObsKind::Commit && o.mech != keep) continue;
    out.push_back(o);
  }
  return out;
}

// Renumbers transaction ids by order of first appearance, so that traces
// produced with different counter histories can be compared.
template <class V>
std::vector<BasicObs<V>> canonical_ids(std::vector<BasicObs<V>> t) {
  std::map<Word, Word> ren;
  for (auto &o : t) {
    if (!is_marker(o.kind)) continue;
    auto [it, fresh] = ren.emplace(o.id, ren.size());
    o.id = it->second;
  }
  return t;
}

// Every Commit/Rollback id was opened by an earlier Start of the same
// mechanism, ignoring the inner ids of Spec-J batches (which have no Start of
// their own). Returns an empty string when the trace is well bracketed.
std::string bracket_violation(const Trace &t, bool allow_commit);

}  // namespace speclab
