// speclab: speculative non-interference checker for μASM and a small x86 subset.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "speclab/corpus.hpp"
#include "speclab/oracle.hpp"
#include "speclab/x86.hpp"

using namespace speclab;

namespace {

enum Exit { kSecure = 0, kInsecure = 1, kUsage = 2, kUnknown = 3 };

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::string, Word> assignment(const std::string &s) {
  auto eq = s.find('=');
  if (eq == std::string::npos) throw Usage("expected NAME=VALUE, got '" + s + "'");
  try {
    return {s.substr(0, eq), std::stoull(s.substr(eq + 1), nullptr, 0)};
  } catch (const std::exception &) {
    throw Usage("bad value in '" + s + "'");
  }
}

void print_witness_table(const Program &p, const Witness &w) {
  auto config = [&](const char *tag, const Config &c) {
    std::cout << "  " << tag << ":";
    for (RegId r = 1; r < p.reg_count(); ++r)
      if (c.regs[r].w != 0) std::cout << " " << p.reg_name(r) << "=" << c.regs[r].w;
    for (const auto &[a, v] : c.mem) std::cout << " [" << a << "]=" << v;
    std::cout << "\n";
  };
  std::cout << "witness (" << w.check << " check, differs at observation " << w.index << "):\n";
  config("first ", w.first);
  config("second", w.second);
  std::cout << "  first trace : " << format_trace(w.first_trace) << "\n";
  std::cout << "  second trace: " << format_trace(w.second_trace) << "\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"speclab: symbolic checking of speculative non-interference"};
  app.require_subcommand(1);

  std::string file, sem_id = "b", policy_path, mode_id = "sni", format = "table", smt_dump, dump_traces, out_path;
  std::string oracle_name;
  Word window = kDefaultWindow;
  std::size_t rsb = kDefaultRsbSize, fuel = kDefaultFuel;
  unsigned jobs = 0;
  std::vector<std::string> regs, mems;

  auto *check = app.add_subcommand("check", "check a program against a policy");
  check->add_option("file", file, "μASM file, or x86 .s file")->required();
  check->add_option("--sem", sem_id, "semantics, e.g. b, b+s, b+j+s+r");
  check->add_option("--policy", policy_path, "policy file");
  check->add_option("--window", window, "speculative window");
  check->add_option("--rsb", rsb, "return stack buffer size");
  check->add_option("--fuel", fuel, "step bound per path");
  check->add_option("--init", regs, "register fixed to a value in both runs, NAME=VALUE");
  check->add_option("--mode", mode_id, "sni, seqct or gni");
  check->add_option("--smt-dump", smt_dump, "directory for solver queries");
  check->add_option("--dump-traces", dump_traces, "directory for symbolic traces");
  check->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));

  auto *corpus = app.add_subcommand("corpus", "run a corpus manifest and compare verdicts");
  corpus->add_option("manifest", file, "JSON-lines manifest")->required();
  corpus->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));
  corpus->add_option("--jobs", jobs, "worker threads (0: one per core)");

  auto *translate = app.add_subcommand("translate", "translate an x86 listing to μASM");
  translate->add_option("file", file, "x86 .s file")->required();
  translate->add_option("-o,--output", out_path, "output file (default stdout)");

  auto *run = app.add_subcommand("run", "run a program concretely and print its trace");
  run->add_option("file", file, "μASM file, or x86 .s file")->required();
  run->add_option("--sem", sem_id, "semantics for the always-mispredict run (ns for none)");
  run->add_option("--oracle", oracle_name, "use the oracle semantics with this predictor: btfnt, correct, mispredict, random:N");
  run->add_option("--window", window, "speculative window");
  run->add_option("--reg", regs, "initial register, NAME=VALUE");
  run->add_option("--mem", mems, "initial memory cell, ADDR=VALUE (or SYMBOL=VALUE)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*translate) {
      std::string text = translate_x86_text(read_file(file));
      translate_x86(read_file(file));  // validates the result
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(out_path);
        if (!f) throw Usage("cannot write " + out_path);
        f << text;
      }
      return 0;
    }

    CheckOptions opt;
    opt.solver = SolverConfig::from_env();
    opt.solver.dump_dir = smt_dump;
    opt.window = window;
    opt.rsb_size = rsb;
    opt.explore.fuel = fuel;

    if (*corpus) {
      Report r = run_corpus(load_manifest(file), opt, jobs);
      std::cout << (format == "json" ? report_json(r) + "\n" : report_table(r));
      return r.mismatches() == 0 ? 0 : 1;
    }

    Program p = load_program_file(file);

    if (*run) {
      Config c = initial_config(p);
      for (const auto &s : regs) {
        auto [n, v] = assignment(s);
        RegId r = p.reg(n);
        c.regs.resize(p.reg_count());
        c.set_reg(r, Value::word(v & p.mask()));
      }
      for (const auto &s : mems) {
        auto [key, v] = assignment(s);
        Word addr = 0;
        if (auto sym = p.symbols().find(key); sym != p.symbols().end()) {
          addr = sym->second;
        } else {
          try {
            addr = std::stoull(key, nullptr, 0) & p.mask();
          } catch (const std::exception &) {
            throw Usage("unknown memory cell '" + key + "'");
          }
        }
        c.mem[addr] = v & p.mask();
      }
      RunResult r;
      if (!oracle_name.empty()) {
        Semantics s = parse_semantics(sem_id);
        if (s.mechs.size() != 1) throw Usage("--oracle needs a single mechanism in --sem");
        auto o = make_oracle(oracle_name);
        OracleOptions oo;
        oo.kind = s.mechs[0];
        oo.max_window = window;
        r = oracle_run(p, c, *o, oo);
      } else {
        AmOptions ao;
        ao.sem = parse_semantics(sem_id);
        ao.window = window;
        r = am_run(p, c, ao);
      }
      std::cout << format_trace(r.trace, "\n") << "\n" << to_string(r.status) << "\n";
      return 0;
    }

    auto mode = parse_mode(mode_id);
    if (!mode) throw Usage("unknown mode '" + mode_id + "'");
    opt.mode = *mode;
    try {
      opt.sem = parse_semantics(sem_id);
    } catch (const SemanticsError &e) {
      throw Usage(e.what());
    }
    opt.dump_traces = dump_traces;
    std::map<std::string, Word> fixed;
    for (const auto &s : regs) fixed.insert(assignment(s));
    fix_registers(p, fixed, opt);
    Policy pol = policy_path.empty() ? Policy{} : load_policy(policy_path);
    Verdict v = check_program(p, pol, opt);
    if (format == "json") {
      std::cout << verdict_json(p, file, opt, v) << "\n";
    } else {
      std::cout << file << ": " << to_string(v.kind) << " under " << (opt.mode == CheckMode::SeqCt ? "ns" : opt.sem.id())
                << " (" << to_string(opt.mode) << ", window " << opt.window << ", " << v.paths << " paths, "
                << v.queries << " queries, " << v.seconds << " s)\n";
      if (!v.cause.empty()) std::cout << "cause: " << v.cause << "\n";
      if (v.witness) print_witness_table(p, *v.witness);
    }
    switch (v.kind) {
      case VerdictKind::Secure: return kSecure;
      case VerdictKind::Insecure: return kInsecure;
      case VerdictKind::Unknown: return kUnknown;
    }
  } catch (const Usage &e) {
    std::cerr << "speclab: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "speclab: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
