#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "speclab/ns.hpp"

namespace speclab {

// δ: predicted values for part of a configuration.
struct PartialConfig {
  std::optional<Value> pc;
  std::map<RegId, Value> regs;
  std::map<Word, Word> mem;
  // A store-bypass prediction: never counts as correct, even when the bypassed
  // store would not have changed memory.
  bool bypass = false;

  Config apply(Config c) const;
};

struct HistoryEntry {
  Word label;
  Word id;
  PartialConfig delta;
};
using History = std::vector<HistoryEntry>;

struct Prediction {
  PartialConfig delta;
  Word window;
  Trace obs;
};

// What an oracle may look at besides (p, h, σ).
struct OracleQuery {
  Mech kind;
  Word max_window;
  const std::vector<Word> *rsb;  // Spec-R only
};

class PredictionOracle {
 public:
  virtual ~PredictionOracle() = default;
  virtual std::string name() const = 0;
  virtual bool supports(Mech kind) const = 0;
  virtual Prediction predict(const Program &p, const History &h, const Config &c, const OracleQuery &q) const = 0;
};

std::unique_ptr<PredictionOracle> make_btfnt_oracle();
std::unique_ptr<PredictionOracle> make_always_correct_oracle();
std::unique_ptr<PredictionOracle> make_always_mispredict_oracle();
std::unique_ptr<PredictionOracle> make_seeded_random_oracle(std::uint64_t seed);

// Names: "btfnt", "correct", "mispredict", "random:<seed>".
std::unique_ptr<PredictionOracle> make_oracle(const std::string &name);
std::vector<std::string> builtin_oracle_names();

struct OracleInstance {
  Word ctr = 0;
  Config cfg;
  History h;
  std::optional<Word> window;
  std::vector<Word> rsb;
  bool stuck = false;
  // Decoration of a pushed instance: the configuration it speculated from and
  // the prediction.
  bool decorated = false;
  Config snapshot;
  PartialConfig delta;
};

using OracleState = std::vector<OracleInstance>;

struct OracleOptions {
  Mech kind = Mech::B;
  Word max_window = 20;
  std::size_t rsb_size = 16;
};

OracleState oracle_initial(const Config &c0);
bool oracle_done(const OracleState &s);

// One step of the oracle semantics for a single mechanism. Throws EvalError
// when the non-speculative instance is stuck.
void oracle_step(const Program &p, OracleState &s, const PredictionOracle &o, const OracleOptions &opt, Trace &out);

RunResult oracle_run(const Program &p, const Config &c0, const PredictionOracle &o, const OracleOptions &opt,
                     std::size_t fuel = kDefaultFuel);

}  // namespace speclab
