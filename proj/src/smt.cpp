#include "speclab/smt.hpp"

#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace speclab {

SolverConfig SolverConfig::from_env() {
  SolverConfig c;
  if (const char *p = std::getenv("SPECLAB_SOLVER"); p && *p) c.path = p;
  if (const char *f = std::getenv("SPECLAB_SOLVER_FLAGS")) {
    std::istringstream in(f);
    for (std::string tok; in >> tok;) c.flags.push_back(tok);
  }
  if (const char *t = std::getenv("SPECLAB_SOLVER_TIMEOUT")) {
    try {
      c.timeout_s = static_cast<unsigned>(std::stoul(t));
    } catch (const std::exception &) {
    }
  }
  return c;
}

std::string SmtQuery::literal(Word w) const {
  return "(_ bv" + std::to_string(w & width_mask(width_)) + " " + std::to_string(width_) + ")";
}

std::string SmtQuery::bool_of(const std::string &t) const { return "(not (= " + t + " " + literal(0) + "))"; }

namespace {

const char *bv_op(BinOp op) {
  switch (op) {
    case BinOp::Add: return "bvadd";
    case BinOp::Sub: return "bvsub";
    case BinOp::Mul: return "bvmul";
    case BinOp::Div: return "bvudiv";
    case BinOp::And: return "bvand";
    case BinOp::Or: return "bvor";
    case BinOp::Xor: return "bvxor";
    case BinOp::Shl: return "bvshl";
    case BinOp::Shr: return "bvlshr";
    case BinOp::Lt: return "bvult";
    case BinOp::Le: return "bvule";
    case BinOp::Ge: return "bvuge";
    case BinOp::Gt: return "bvugt";
    case BinOp::Eq:
    case BinOp::Ne: return "=";
  }
  return "?";
}

}  // namespace

std::string SmtQuery::mem_term(const SymMem &m, const std::string &suffix) {
  if (m->is_base()) {
    std::string name = m->name + suffix;
    if (!arrays_.count(name)) {
      std::string def;
      if (m->image) {
        std::string sort = "(Array (_ BitVec " + std::to_string(width_) + ") (_ BitVec " + std::to_string(width_) + "))";
        def = "((as const " + sort + ") " + literal(0) + ")";
        for (const auto &[a, v] : *m->image) def = "(store " + def + " " + literal(a) + " " + literal(v) + ")";
      }
      arrays_[name] = def;
    }
    return name;
  }
  return "(store " + mem_term(m->prev, suffix) + " " + term(m->addr, suffix) + " " + term(m->val, suffix) + ")";
}

std::string SmtQuery::term(const SymExpr &e, const std::string &suffix) {
  switch (e->kind) {
    case SymNode::Kind::Const:
      if (e->value.bot) throw Error("bottom cannot be encoded");
      return literal(e->value.w);
    case SymNode::Kind::Var:
      vars_.insert(e->name + suffix);
      return e->name + suffix;
    case SymNode::Kind::Unary: {
      std::string a = term(e->a, suffix);
      switch (e->uop) {
        case UnOp::Neg: return "(bvneg " + a + ")";
        case UnOp::Not: return "(bvnot " + a + ")";
        case UnOp::LNot: return "(ite (= " + a + " " + literal(0) + ") " + literal(1) + " " + literal(0) + ")";
      }
      return "?";
    }
    case SymNode::Kind::Binary: {
      std::string a = term(e->a, suffix);
      std::string b = term(e->b, suffix);
      if (is_comparison(e->bop)) {
        std::string yes = literal(1), no = literal(0);
        if (e->bop == BinOp::Ne) std::swap(yes, no);
        return "(ite (" + std::string(bv_op(e->bop)) + " " + a + " " + b + ") " + yes + " " + no + ")";
      }
      if (e->bop == BinOp::Shl || e->bop == BinOp::Shr)
        b = "(bvurem " + b + " " + literal(width_) + ")";
      return "(" + std::string(bv_op(e->bop)) + " " + a + " " + b + ")";
    }
    case SymNode::Kind::Ite:
      return "(ite " + bool_of(term(e->a, suffix)) + " " + term(e->b, suffix) + " " + term(e->c, suffix) + ")";
    case SymNode::Kind::Read:
      return "(select " + mem_term(e->mem, suffix) + " " + term(e->a, suffix) + ")";
  }
  return "?";
}

void SmtQuery::assert_nonzero(const SymExpr &e, const std::string &suffix) {
  asserts_.push_back(bool_of(term(e, suffix)));
}

void SmtQuery::request_model(const SymExpr &e, const std::string &suffix) {
  std::set<std::string> vars, arrays;
  collect_vars(e, vars, arrays);
  for (const auto &v : vars) {
    std::string n = v + suffix;
    vars_.insert(n);
    if (requested_.insert(n).second) items_.push_back({n, "", ""});
  }
  std::vector<std::pair<SymMem, SymExpr>> reads;
  collect_base_reads(e, reads);
  for (const auto &[base, addr] : reads) {
    std::string arr = mem_term(base, suffix);
    std::string a = term(addr, suffix);
    if (requested_.insert(arr + "@" + a).second) items_.push_back({"", arr, a});
  }
}

std::string SmtQuery::text() const {
  std::ostringstream out;
  std::string bv = "(_ BitVec " + std::to_string(width_) + ")";
  out << "(set-logic QF_ABV)\n";
  for (const auto &v : vars_) out << "(declare-fun " << v << " () " << bv << ")\n";
  for (const auto &[name, def] : arrays_) {
    std::string sort = "(Array " + bv + " " + bv + ")";
    if (def.empty()) out << "(declare-fun " << name << " () " << sort << ")\n";
    else out << "(define-fun " << name << " () " << sort << " " << def << ")\n";
  }
  for (const auto &a : asserts_) out << "(assert " << a << ")\n";
  out << "(check-sat)\n";
  if (!items_.empty()) {
    out << "(get-value (";
    for (const auto &it : items_) {
      if (!it.var.empty()) out << " " << it.var;
      else out << " " << it.addr_term << " (select " << it.array << " " << it.addr_term << ")";
    }
    out << "))\n";
  }
  return out.str();
}

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SParser {
 public:
  explicit SParser(const std::string &s) : s_(s) {}
  bool at_end() {
    skip();
    return i_ >= s_.size();
  }
  SExpr parse() {
    skip();
    if (i_ >= s_.size()) throw Error("unexpected end of solver output");
    SExpr e;
    if (s_[i_] == '(') {
      e.is_list = true;
      ++i_;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw Error("unbalanced solver output");
        if (s_[i_] == ')') {
          ++i_;
          return e;
        }
        e.list.push_back(parse());
      }
    }
    if (s_[i_] == '"') {
      std::size_t j = s_.find('"', i_ + 1);
      e.atom = s_.substr(i_, j == std::string::npos ? std::string::npos : j + 1 - i_);
      i_ = j == std::string::npos ? s_.size() : j + 1;
      return e;
    }
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    e.atom = s_.substr(i_, j - i_);
    i_ = j;
    return e;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  const std::string &s_;
  std::size_t i_ = 0;
};

Word parse_bv(const SExpr &e) {
  if (!e.is_list) {
    const std::string &a = e.atom;
    if (a.rfind("#x", 0) == 0) return std::stoull(a.substr(2), nullptr, 16);
    if (a.rfind("#b", 0) == 0) return std::stoull(a.substr(2), nullptr, 2);
    throw Error("unexpected model value '" + a + "'");
  }
  // (_ bvN W)
  if (e.list.size() == 3 && e.list[0].atom == "_" && e.list[1].atom.rfind("bv", 0) == 0)
    return std::stoull(e.list[1].atom.substr(2));
  throw Error("unexpected model value");
}

}  // namespace

SmtAnswer parse_solver_output(const SmtQuery &q, const std::string &out) {
  SmtAnswer ans;
  std::istringstream in(out);
  std::string first;
  in >> first;
  if (first == "unsat") {
    ans.status = SatStatus::Unsat;
    return ans;
  }
  if (first != "sat") {
    ans.reason = first.empty() ? "no solver output" : out.substr(0, 300);
    return ans;
  }
  if (q.model_items().empty()) {
    ans.status = SatStatus::Sat;
    return ans;
  }
  std::string rest = out.substr(out.find("sat") + 3);
  try {
    SParser sp(rest);
    SExpr vals = sp.parse();
    std::vector<Word> flat;
    for (const auto &pair : vals.list) {
      if (!pair.is_list || pair.list.size() != 2) throw Error("malformed get-value answer");
      flat.push_back(parse_bv(pair.list[1]));
    }
    std::size_t k = 0;
    for (const auto &it : q.model_items()) {
      if (!it.var.empty()) {
        ans.model.vars[it.var] = flat.at(k++);
      } else {
        Word a = flat.at(k++);
        ans.model.arrays[it.array][a] = flat.at(k++);
      }
    }
  } catch (const std::exception &e) {
    ans.reason = std::string("cannot read model: ") + e.what();
    return ans;
  }
  ans.status = SatStatus::Sat;
  return ans;
}

namespace {

std::string shell_quote(const std::string &s) {
  std::string r = "'";
  for (char c : s) {
    if (c == '\'') r += "'\\''";
    else r += c;
  }
  return r + "'";
}

std::atomic<unsigned> dump_counter{0};

}  // namespace

SmtAnswer run_solver(const SmtQuery &q, const SolverConfig &cfg) {
  std::string text = q.text();
  if (!cfg.dump_dir.empty()) {
    std::filesystem::create_directories(cfg.dump_dir);
    char name[32];
    std::snprintf(name, sizeof name, "query_%05u.smt2", dump_counter++);
    std::ofstream(std::filesystem::path(cfg.dump_dir) / name) << text;
  }
  char path[] = "/tmp/speclab_XXXXXX.smt2";
  int fd = mkstemps(path, 5);
  if (fd < 0) return {SatStatus::Unknown, {}, "cannot create a temporary query file"};
  {
    std::size_t off = 0;
    while (off < text.size()) {
      ssize_t n = write(fd, text.data() + off, text.size() - off);
      if (n <= 0) break;
      off += static_cast<std::size_t>(n);
    }
    close(fd);
  }
  std::string cmd = "timeout " + std::to_string(cfg.timeout_s + 1) + " " + shell_quote(cfg.path);
  for (const auto &f : cfg.flags) cmd += " " + shell_quote(f);
  cmd += " " + std::string(path) + " 2>&1";
  std::string out;
  if (FILE *p = popen(cmd.c_str(), "r")) {
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int rc = pclose(p);
    if (WIFEXITED(rc) && WEXITSTATUS(rc) == 124) out = "timeout";
  } else {
    out = "cannot start solver " + cfg.path;
  }
  std::remove(path);
  return parse_solver_output(q, out);
}

PathModel SmtPathSolver::solve(const std::vector<SymExpr> &constraints, unsigned width) {
  SmtQuery q(width);
  for (const auto &c : constraints) {
    q.assert_nonzero(c, "");
    q.request_model(c, "");
  }
  ++queries_;
  SmtAnswer a = run_solver(q, cfg_);
  return PathModel{a.status, std::move(a.model), a.reason};
}

}  // namespace speclab
