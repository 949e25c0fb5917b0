#pragma once

#include <map>
#include <string>
#include <vector>

#include "speclab/checker.hpp"

namespace speclab {

// `.s` files go through the x86 front end, everything else is μASM.
Program load_program_file(const std::string &path);
std::string read_file(const std::string &path);

// Fixes the named registers of p in opt.init; names p does not use are ignored.
void fix_registers(const Program &p, const std::map<std::string, Word> &regs, CheckOptions &opt);

struct CorpusEntry {
  std::string id;
  std::string program;                          // path, resolved against the manifest
  std::string policy;
  std::vector<std::string> semantics;           // ids in manifest order
  std::map<std::string, std::string> expected;  // semantics id -> secure|insecure|unknown
  std::vector<std::string> tags;
  CheckMode mode = CheckMode::Sni;
  Word window = kDefaultWindow;
  std::map<std::string, Word> init;             // registers fixed to a value in both runs
};

// One JSON object per line. `expected` is either one verdict for every
// semantics or an object keyed by semantics id. Throws Error with the line.
std::vector<CorpusEntry> parse_manifest(const std::string &text, const std::string &base_dir);
std::vector<CorpusEntry> load_manifest(const std::string &path);

struct EntryResult {
  std::string id;
  std::string semantics;
  std::string expected;
  std::string actual;   // verdict, or "error"
  std::string detail;   // error message or unknown cause
  std::vector<std::string> tags;
  double seconds = 0;
  std::size_t paths = 0, queries = 0;

  bool mismatch() const { return expected != actual; }
};

struct Report {
  std::vector<EntryResult> results;  // sorted by (id, semantics order)
  double seconds = 0;

  std::size_t mismatches() const;
};

// Runs every entry under every listed semantics on `jobs` worker threads.
Report run_corpus(const std::vector<CorpusEntry> &entries, const CheckOptions &base, unsigned jobs = 0);

std::string report_json(const Report &r);
// Rows are entries, columns semantics; ✓ secure, ✗ insecure, ? unknown,
// E error, a trailing ! marks a mismatch.
std::string report_table(const Report &r);

}  // namespace speclab
