#include "speclab/x86.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <vector>

namespace speclab {

std::map<std::string, Word> default_symbol_layout(const SymbolUse &use) {
  std::map<std::string, Word> out;
  static const char *first[] = {"size", "y", "k", "temp"};
  std::vector<std::string> scalars;
  for (const char *n : first)
    if (use.scalars.count(n) && !use.arrays.count(n)) scalars.push_back(n);
  for (const auto &n : use.scalars)
    if (!use.arrays.count(n) && std::find(scalars.begin(), scalars.end(), n) == scalars.end()) scalars.push_back(n);
  Word next = 0x100;
  for (const auto &n : scalars) {
    out[n] = next;
    next += 8;
  }
  Word region = 0x1000;
  for (const auto &n : use.arrays) {
    out[n] = region;
    region += 0x1000;
  }
  return out;
}

namespace {

struct Operand {
  enum class Kind { Imm, Reg, Mem, Label } kind = Kind::Imm;
  Word imm = 0;
  std::string sym;     // Imm: $sym; Mem: displacement symbol; Label: name
  std::string reg;     // Reg
  Word disp = 0;       // Mem
  std::string base, index;
  Word scale = 1;
  bool indirect = false;  // jmp *...
};

struct Line {
  int lineno = 0;
  std::vector<std::string> labels;
  std::string mnem;
  std::vector<Operand> ops;
};

std::string trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_name(const std::string &s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

std::optional<Word> number(const std::string &s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used, 0);
    if (used == s.size()) return static_cast<Word>(v);
  } catch (const std::out_of_range &) {
    try {
      std::size_t used = 0;
      Word v = std::stoull(s, &used, 0);
      if (used == s.size()) return v;
    } catch (const std::exception &) {
    }
  } catch (const std::exception &) {
  }
  return std::nullopt;
}

const std::set<std::string> &full_registers() {
  static const std::set<std::string> r = {"rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp",
                                          "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15"};
  return r;
}

bool is_subregister(const std::string &r) {
  static const std::set<std::string> legacy = {"eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp", "ax",
                                               "bx",  "cx",  "dx",  "si",  "di",  "bp",  "sp",  "al",  "bl",
                                               "cl",  "dl",  "ah",  "bh",  "ch",  "dh",  "sil", "dil", "bpl",
                                               "spl"};
  if (legacy.count(r)) return true;
  if (r.size() > 2 && r[0] == 'r' && std::isdigit(static_cast<unsigned char>(r[1]))) {
    char last = r.back();
    return last == 'd' || last == 'w' || last == 'b';
  }
  return false;
}

class LineParser {
 public:
  explicit LineParser(int lineno) : lineno_(lineno) {}

  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(lineno_, 1, msg); }

  std::string reg(std::string s) const {
    s = trim(s);
    if (s.empty() || s[0] != '%') fail("expected a register, got '" + s + "'");
    std::string r = s.substr(1);
    if (is_subregister(r)) fail("sub-registers unsupported: %" + r);
    if (!full_registers().count(r)) fail("unknown register %" + r);
    return r;
  }

  Operand operand(std::string s) const {
    s = trim(s);
    Operand o;
    if (s.empty()) fail("empty operand");
    if (s[0] == '*') {
      o = operand(s.substr(1));
      if (o.kind == Operand::Kind::Imm) fail("bad indirect operand");
      o.indirect = true;
      return o;
    }
    if (s[0] == '$') {
      std::string v = trim(s.substr(1));
      if (auto n = number(v)) o.imm = *n;
      else if (is_name(v)) o.sym = v;
      else fail("bad immediate '" + s + "'");
      return o;
    }
    if (s[0] == '%') {
      o.kind = Operand::Kind::Reg;
      o.reg = reg(s);
      return o;
    }
    o.kind = Operand::Kind::Mem;
    std::string disp = s, inner;
    auto open = s.find('(');
    if (open != std::string::npos) {
      if (s.back() != ')') fail("bad memory operand '" + s + "'");
      disp = trim(s.substr(0, open));
      inner = s.substr(open + 1, s.size() - open - 2);
      std::vector<std::string> parts;
      std::stringstream ss(inner);
      std::string part;
      while (std::getline(ss, part, ',')) parts.push_back(trim(part));
      if (parts.empty() || parts.size() > 3) fail("bad memory operand '" + s + "'");
      if (!parts[0].empty()) o.base = reg(parts[0]);
      if (parts.size() > 1) o.index = reg(parts[1]);
      if (parts.size() > 2) {
        auto sc = number(parts[2]);
        if (!sc || (*sc != 1 && *sc != 2 && *sc != 4 && *sc != 8)) fail("bad scale in '" + s + "'");
        o.scale = *sc;
      }
    }
    if (!disp.empty()) {
      auto sign = disp.find_first_of("+-", 1);
      std::string head = trim(disp.substr(0, sign));
      if (auto n = number(head)) {
        o.disp = *n;
      } else if (is_name(head)) {
        o.sym = head;
      } else {
        fail("bad displacement '" + disp + "'");
      }
      if (sign != std::string::npos) {
        auto n = number(trim(disp.substr(sign)));
        if (!n || !o.sym.size()) fail("bad displacement '" + disp + "'");
        o.disp = *n;
      }
    }
    if (o.base.empty() && o.index.empty() && o.sym.empty() && open == std::string::npos) fail("bad operand '" + s + "'");
    return o;
  }

 private:
  int lineno_;
};

std::vector<std::string> split_operands(const std::string &s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<Line> parse_lines(const std::string &text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::vector<std::string> pending;
  while (std::getline(in, raw)) {
    ++lineno;
    auto cut = raw.find_first_of("#;");
    std::string t = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    for (;;) {
      auto colon = t.find(':');
      if (colon == std::string::npos) break;
      std::string head = trim(t.substr(0, colon));
      if (!is_name(head)) break;
      pending.push_back(head);
      t = trim(t.substr(colon + 1));
    }
    if (t.empty()) continue;
    if (t[0] == '.') continue;  // assembler directive
    Line l;
    l.lineno = lineno;
    l.labels = std::move(pending);
    pending.clear();
    auto sp = t.find_first_of(" \t");
    l.mnem = t.substr(0, sp);
    std::transform(l.mnem.begin(), l.mnem.end(), l.mnem.begin(), [](unsigned char c) { return std::tolower(c); });
    LineParser lp(lineno);
    if (sp != std::string::npos)
      for (const auto &s : split_operands(t.substr(sp))) {
        bool branch = l.mnem[0] == 'j' || l.mnem == "call";
        if (branch && is_name(s)) {
          Operand o;
          o.kind = Operand::Kind::Label;
          o.sym = s;
          l.ops.push_back(o);
        } else {
          l.ops.push_back(lp.operand(s));
        }
      }
    out.push_back(std::move(l));
  }
  if (!pending.empty()) {
    Line l;
    l.lineno = lineno;
    l.labels = std::move(pending);
    out.push_back(std::move(l));  // labels at the end, no instruction
  }
  return out;
}

std::string word(Word w) { return std::to_string(w); }

// Register holding zero exactly when the condition holds, as an expression.
std::optional<std::string> negated_condition(const std::string &cc) {
  if (cc == "e" || cc == "z") return "zf == 0";
  if (cc == "ne" || cc == "nz") return "zf";
  if (cc == "b" || cc == "c" || cc == "nae") return "cf == 0";
  if (cc == "ae" || cc == "nc" || cc == "nb") return "cf";
  if (cc == "be" || cc == "na") return "(cf | zf) == 0";
  if (cc == "a" || cc == "nbe") return "cf | zf";
  return std::nullopt;
}

class Lowering {
 public:
  Lowering(const std::map<std::string, Word> &layout, const std::set<std::string> &code_labels)
      : layout_(layout), code_labels_(code_labels) {}

  std::vector<std::string> out;

  void lower(const Line &l) {
    LineParser lp(l.lineno);
    const auto &ops = l.ops;
    const std::string &m = l.mnem;
    auto arity = [&](std::size_t n) {
      if (ops.size() != n) lp.fail(m + " expects " + std::to_string(n) + " operand(s)");
    };
    auto reg_dst = [&](const Operand &o) {
      if (o.kind != Operand::Kind::Reg) lp.fail(m + ": destination must be a register");
      return name(o.reg);
    };

    if (m == "mov" || m == "movq") {
      arity(2);
      const Operand &src = ops[0], &dst = ops[1];
      if (src.kind == Operand::Kind::Mem && dst.kind == Operand::Kind::Mem) lp.fail("mov: two memory operands");
      if (dst.kind == Operand::Kind::Mem) {
        if (src.kind == Operand::Kind::Reg) {
          emit("store " + name(src.reg) + ", " + address(dst, lp));
        } else {
          emit("tmp <- " + value(src, lp));
          emit("store tmp, " + address(dst, lp));
        }
      } else if (src.kind == Operand::Kind::Mem) {
        emit("load " + reg_dst(dst) + ", " + address(src, lp));
      } else {
        emit(reg_dst(dst) + " <- " + value(src, lp));
      }
    } else if (m == "lea" || m == "leaq") {
      arity(2);
      if (ops[0].kind != Operand::Kind::Mem) lp.fail("lea needs a memory operand");
      emit(reg_dst(ops[1]) + " <- " + address(ops[0], lp));
    } else if (auto op = arith(m)) {
      arity(2);
      const Operand &src = ops[0], &dst = ops[1];
      if (dst.kind == Operand::Kind::Mem) {
        if (src.kind == Operand::Kind::Mem) lp.fail(m + ": two memory operands");
        std::string a = address(dst, lp);
        emit("load tmp, " + a);
        emit("tmp <- tmp " + *op + " " + value(src, lp));
        emit("store tmp, " + a);
      } else {
        std::string d = reg_dst(dst);
        std::string s = operand_value(src, lp);
        if (m == "xor" && src.kind == Operand::Kind::Reg && src.reg == dst.reg) emit(d + " <- 0");
        else emit(d + " <- " + d + " " + *op + " " + s);
      }
    } else if (m == "cmp" || m == "cmpq" || m == "test" || m == "testq") {
      arity(2);
      if (ops[0].kind == Operand::Kind::Mem && ops[1].kind == Operand::Kind::Mem) lp.fail(m + ": two memory operands");
      std::string b = operand_value(ops[0], lp);
      std::string a = operand_value(ops[1], lp);
      if (m[0] == 'c') {
        emit("zf <- " + a + " == " + b);
        emit("cf <- " + a + " < " + b);
      } else {
        emit("zf <- (" + a + " & " + b + ") == 0");
        emit("cf <- 0");
      }
    } else if (m == "jmp") {
      arity(1);
      const Operand &t = ops[0];
      if (t.kind == Operand::Kind::Label) emit("jmp " + target(t.sym));
      else if (!t.indirect) lp.fail("jmp: indirect targets need '*'");
      else if (t.kind == Operand::Kind::Reg) emit("jmp " + name(t.reg));
      else {
        emit("load tmp, " + address(t, lp));
        emit("jmp tmp");
      }
    } else if (m.size() > 1 && m[0] == 'j') {
      arity(1);
      auto cond = negated_condition(m.substr(1));
      if (!cond) lp.fail("unsupported mnemonic '" + m + "'");
      if (ops[0].kind != Operand::Kind::Label) lp.fail(m + " needs a label");
      emit("cc <- " + *cond);
      emit("beqz cc, " + target(ops[0].sym));
    } else if (m.rfind("cmov", 0) == 0) {
      arity(2);
      auto cond = negated_condition(m.substr(4));
      if (!cond) lp.fail("unsupported mnemonic '" + m + "'");
      std::string d = reg_dst(ops[1]);
      emit("cmov " + d + ", " + operand_value(ops[0], lp) + ", " + *cond);
    } else if (m == "lfence") {
      arity(0);
      emit("spbarr");
    } else if (m == "endbr64") {
      arity(0);
      emit("endbr");
    } else if (m == "nop") {
      emit("skip");
    } else if (m == "ret" || m == "retq") {
      arity(0);
      emit("ret");
    } else if (m == "call" || m == "callq") {
      arity(1);
      if (ops[0].kind != Operand::Kind::Label || !code_labels_.count(ops[0].sym)) lp.fail("call needs a defined label");
      emit("call " + ops[0].sym);
    } else {
      lp.fail("unsupported mnemonic '" + m + "'");
    }
  }

  void emit(std::string s) { out.push_back(std::move(s)); }

  std::set<std::string> implicit_labels;  // jump targets never defined

 private:
  static std::string name(const std::string &reg) { return reg == "rsp" ? "sp" : reg; }

  static std::optional<std::string> arith(const std::string &m) {
    std::string b = m;
    if (b.size() == 4 && b.back() == 'q') b.pop_back();
    if (b == "add") return "+";
    if (b == "sub") return "-";
    if (b == "and") return "&";
    if (b == "or") return "|";
    if (b == "xor") return "^";
    if (b == "shl" || b == "sal") return "<<";
    if (b == "shr") return ">>";
    if (b == "imul") return "*";
    return std::nullopt;
  }

  std::string symbol(const std::string &s, const LineParser &lp) const {
    if (code_labels_.count(s)) return s;
    if (!layout_.count(s)) lp.fail("unknown symbol '" + s + "'");
    return s;
  }

  std::string target(const std::string &s) {
    if (!code_labels_.count(s)) implicit_labels.insert(s);
    return s;
  }

  std::string address(const Operand &o, const LineParser &lp) const {
    std::vector<std::string> parts;
    if (!o.sym.empty()) parts.push_back(symbol(o.sym, lp));
    if (!o.base.empty()) parts.push_back(name(o.base));
    if (!o.index.empty()) parts.push_back(o.scale == 1 ? name(o.index) : name(o.index) + " * " + word(o.scale));
    if (o.disp != 0 || parts.empty()) parts.push_back(word(o.disp));
    std::string s;
    for (const auto &p : parts) s += (s.empty() ? "" : " + ") + p;
    return s;
  }

  // Register or immediate.
  std::string value(const Operand &o, const LineParser &lp) const {
    if (o.kind == Operand::Kind::Reg) return name(o.reg);
    if (o.kind == Operand::Kind::Imm) return o.sym.empty() ? word(o.imm) : symbol(o.sym, lp);
    lp.fail("expected a register or immediate");
  }

  // Any operand; memory is loaded into tmp first.
  std::string operand_value(const Operand &o, const LineParser &lp) {
    if (o.kind == Operand::Kind::Mem) {
      emit("load tmp, " + address(o, lp));
      return "tmp";
    }
    return value(o, lp);
  }

  const std::map<std::string, Word> &layout_;
  const std::set<std::string> &code_labels_;
};

}  // namespace

std::string translate_x86_text(const std::string &listing, const X86Options &opt) {
  std::vector<Line> lines = parse_lines(listing);
  std::set<std::string> code_labels;
  for (const auto &l : lines)
    for (const auto &n : l.labels)
      if (!code_labels.insert(n).second) throw ParseError(l.lineno, 1, "label '" + n + "' defined twice");

  SymbolUse use;
  for (const auto &l : lines)
    for (const auto &o : l.ops) {
      if (o.sym.empty() || code_labels.count(o.sym) || o.kind == Operand::Kind::Label) continue;
      bool array = o.kind == Operand::Kind::Mem && (!o.base.empty() || !o.index.empty());
      (array ? use.arrays : use.scalars).insert(o.sym);
    }
  std::map<std::string, Word> layout = default_symbol_layout(use);
  for (const auto &[n, a] : opt.layout) layout[n] = a;
  static const std::set<std::string> reserved = {"zf", "cf", "cc", "tmp", "sp", "pc"};
  for (const auto &[n, a] : layout)
    if (reserved.count(n) || full_registers().count(n)) throw ParseError(1, 1, "symbol name '" + n + "' clashes with a register");

  Lowering low(layout, code_labels);
  std::ostringstream out;
  for (const auto &[n, a] : layout)
    if (use.scalars.count(n) || use.arrays.count(n)) out << "data " << n << " = " << a << "\n";
  for (const auto &l : lines) {
    for (const auto &n : l.labels) out << n << ":\n";
    if (l.mnem.empty()) continue;
    low.out.clear();
    low.lower(l);
    for (const auto &s : low.out) out << "  " << s << "\n";
  }
  for (const auto &n : low.implicit_labels) {
    if (layout.count(n)) throw ParseError(1, 1, "jump to data symbol '" + n + "'");
    out << n << ":\n";
  }
  return out.str();
}

Program translate_x86(const std::string &listing, const X86Options &opt) {
  Program p = parse_program(translate_x86_text(listing, opt));
  if (p.body().empty()) throw Error("empty program");
  return p;
}

}  // namespace speclab
