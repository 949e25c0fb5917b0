#include "speclab/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "speclab/x86.hpp"

namespace speclab {

namespace fs = std::filesystem;

std::string read_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Program load_program_file(const std::string &path) {
  std::string text = read_file(path);
  if (fs::path(path).extension() == ".s") return translate_x86(text);
  Program p = parse_program(text);
  if (p.body().empty()) throw Error("empty program");
  return p;
}

void fix_registers(const Program &p, const std::map<std::string, Word> &regs, CheckOptions &opt) {
  for (const auto &[name, v] : regs)
    if (auto r = p.find_reg(name); r && *r != kPc) opt.init.concrete_regs[*r] = v & p.mask();
}

std::vector<CorpusEntry> parse_manifest(const std::string &text, const std::string &base_dir) {
  std::vector<CorpusEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto resolve = [&](const std::string &p) {
    if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
    return (fs::path(base_dir) / p).string();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      CorpusEntry e;
      e.program = resolve(j.at("program").get<std::string>());
      e.policy = resolve(j.value("policy", std::string()));
      e.id = j.value("id", fs::path(e.program).stem().string());
      const auto &sems = j.at("semantics");
      if (sems.is_string()) e.semantics.push_back(sems.get<std::string>());
      else e.semantics = sems.get<std::vector<std::string>>();
      const auto &exp = j.at("expected");
      for (const auto &s : e.semantics) {
        std::string v = exp.is_string() ? exp.get<std::string>() : exp.at(s).get<std::string>();
        if (v != "secure" && v != "insecure" && v != "unknown") throw Error("bad expected verdict '" + v + "'");
        e.expected[s] = v;
      }
      if (j.contains("tags")) e.tags = j["tags"].get<std::vector<std::string>>();
      if (j.contains("mode")) {
        auto m = parse_mode(j["mode"].get<std::string>());
        if (!m) throw Error("bad mode");
        e.mode = *m;
      }
      e.window = j.value("window", kDefaultWindow);
      if (j.contains("init")) e.init = j["init"].get<std::map<std::string, Word>>();
      out.push_back(std::move(e));
    } catch (const std::exception &ex) {
      throw Error("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<CorpusEntry> load_manifest(const std::string &path) {
  return parse_manifest(read_file(path), fs::path(path).parent_path().string());
}

std::size_t Report::mismatches() const {
  return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto &r) { return r.mismatch(); }));
}

namespace {

EntryResult run_one(const CorpusEntry &e, const std::string &sem, const CheckOptions &base) {
  EntryResult r;
  r.id = e.id;
  r.semantics = sem;
  r.expected = e.expected.at(sem);
  r.tags = e.tags;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Program p = load_program_file(e.program);
    Policy pol = e.policy.empty() ? Policy{} : load_policy(e.policy);
    CheckOptions opt = base;
    opt.sem = parse_semantics(sem);
    opt.mode = e.mode;
    opt.window = e.window;
    fix_registers(p, e.init, opt);
    Verdict v = check_program(p, pol, opt);
    r.actual = to_string(v.kind);
    r.detail = v.cause;
    r.paths = v.paths;
    r.queries = v.queries;
  } catch (const std::exception &ex) {
    r.actual = "error";
    r.detail = ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

Report run_corpus(const std::vector<CorpusEntry> &entries, const CheckOptions &base, unsigned jobs) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t k = 0; k < entries[i].semantics.size(); ++k) tasks.emplace_back(i, k);
  std::vector<EntryResult> results(tasks.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next++) < tasks.size();) {
      const auto &[i, k] = tasks[t];
      results[t] = run_one(entries[i], entries[i].semantics[k], base);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto &th : pool) th.join();

  // Stable sort by id keeps each entry's semantics in manifest order.
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return results[a].id < results[b].id; });
  Report rep;
  for (auto i : order) rep.results.push_back(std::move(results[i]));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string report_json(const Report &r) {
  nlohmann::json j;
  j["schema"] = "speclab-report/1";
  j["seconds"] = r.seconds;
  j["mismatches"] = r.mismatches();
  j["results"] = nlohmann::json::array();
  for (const auto &e : r.results) {
    nlohmann::json x = {{"id", e.id},           {"semantics", e.semantics}, {"expected", e.expected},
                        {"actual", e.actual},   {"mismatch", e.mismatch()}, {"seconds", e.seconds},
                        {"paths", e.paths},     {"queries", e.queries},     {"tags", e.tags}};
    if (!e.detail.empty()) x["detail"] = e.detail;
    j["results"].push_back(x);
  }
  return j.dump(2);
}

std::string report_table(const Report &r) {
  std::vector<std::string> ids, sems;
  std::map<std::pair<std::string, std::string>, const EntryResult *> cell;
  for (const auto &e : r.results) {
    if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) ids.push_back(e.id);
    if (std::find(sems.begin(), sems.end(), e.semantics) == sems.end()) sems.push_back(e.semantics);
    cell[{e.id, e.semantics}] = &e;
  }
  std::size_t idw = 5;
  for (const auto &i : ids) idw = std::max(idw, i.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(idw)) << "entry";
  for (const auto &s : sems) out << "  " << std::setw(static_cast<int>(std::max<std::size_t>(s.size(), 2))) << s;
  out << "\n";
  for (const auto &i : ids) {
    out << std::setw(static_cast<int>(idw)) << i;
    for (const auto &s : sems) {
      std::size_t w = std::max<std::size_t>(s.size(), 2);
      auto it = cell.find({i, s});
      std::string c;
      if (it != cell.end()) {
        const auto &a = it->second->actual;
        c = a == "secure" ? "✓" : a == "insecure" ? "✗" : a == "unknown" ? "?" : "E";
        if (it->second->mismatch()) c += "!";
      }
      // The check marks are one column wide but three bytes long.
      std::size_t visible = c.empty() ? 0 : (c[0] == '?' || c[0] == 'E' ? c.size() : c.size() - 2);
      out << "  " << c << std::string(w > visible ? w - visible : 0, ' ');
    }
    out << "\n";
  }
  out << r.results.size() << " checks, " << r.mismatches() << " mismatches, " << std::fixed << std::setprecision(1)
      << r.seconds << " s\n";
  for (const auto &e : r.results)
    if (e.mismatch())
      out << "mismatch: " << e.id << " under " << e.semantics << ": expected " << e.expected << ", got " << e.actual
          << (e.detail.empty() ? "" : " (" + e.detail + ")") << "\n";
  return out.str();
}

}  // namespace speclab
