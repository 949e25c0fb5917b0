#include "speclab/uasm.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace speclab {

std::string to_string(const Value &v) { return v.bot ? "bot" : std::to_string(v.w); }

ParseError::ParseError(int l, int c, const std::string &msg)
    : Error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg), line(l), col(c) {}

const char *op_text(UnOp op) {
  switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::Not: return "~";
    case UnOp::LNot: return "!";
  }
  return "?";
}

const char *op_text(BinOp op) {
  static const char *names[] = {"+", "-", "*", "/", "&", "|", "^", "<<", ">>", "<", "<=", "==", "!=", ">=", ">"};
  return names[static_cast<int>(op)];
}

bool is_comparison(BinOp op) { return op >= BinOp::Lt; }

const char *op_name(Op op) {
  static const char *names[] = {"skip", "assign", "load", "store", "jmp", "beqz",
                                "cmov", "spbarr", "call", "ret", "endbr"};
  return names[static_cast<int>(op)];
}

ExprPtr Expr::constant(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Const;
  e->value = v;
  return e;
}

ExprPtr Expr::regref(RegId r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Reg;
  e->reg = r;
  return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->uop = op;
  e->a = std::move(x);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr x, ExprPtr y) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->bop = op;
  e->a = std::move(x);
  e->b = std::move(y);
  return e;
}

bool reads_register(const Expr &e) {
  switch (e.kind) {
    case Expr::Kind::Const: return false;
    case Expr::Kind::Reg: return true;
    case Expr::Kind::Unary: return reads_register(*e.a);
    case Expr::Kind::Binary: return reads_register(*e.a) || reads_register(*e.b);
  }
  return false;
}

Word apply_unop(UnOp op, Word x, unsigned width) {
  Word m = width_mask(width);
  switch (op) {
    case UnOp::Neg: return (~x + 1) & m;
    case UnOp::Not: return ~x & m;
    case UnOp::LNot: return x == 0 ? 1 : 0;
  }
  return 0;
}

Word apply_binop(BinOp op, Word x, Word y, unsigned width) {
  Word m = width_mask(width);
  switch (op) {
    case BinOp::Add: return (x + y) & m;
    case BinOp::Sub: return (x - y) & m;
    case BinOp::Mul: return (x * y) & m;
    case BinOp::Div:
      if (y == 0) throw EvalError("division by zero");
      return (x / y) & m;
    case BinOp::And: return x & y;
    case BinOp::Or: return x | y;
    case BinOp::Xor: return x ^ y;
    case BinOp::Shl: return (x << (y % width)) & m;
    case BinOp::Shr: return (x >> (y % width)) & m;
    case BinOp::Lt: return x < y;
    case BinOp::Le: return x <= y;
    case BinOp::Eq: return x == y;
    case BinOp::Ne: return x != y;
    case BinOp::Ge: return x >= y;
    case BinOp::Gt: return x > y;
  }
  return 0;
}

Value eval_expr(const Expr &e, const RegReader &regs, unsigned width) {
  return eval_expr_with(e, regs, width);
}

Program::Program(unsigned width) : width_(width) {
  if (width == 0 || width > 64) throw Error("word width must be between 1 and 64");
  reg("pc");
  reg("sp");
}

RegId Program::reg(const std::string &name) {
  auto it = reg_index_.find(name);
  if (it != reg_index_.end()) return it->second;
  RegId id = static_cast<RegId>(regs_.size());
  regs_.push_back(name);
  reg_index_.emplace(name, id);
  return id;
}

std::optional<RegId> Program::find_reg(const std::string &name) const {
  auto it = reg_index_.find(name);
  if (it == reg_index_.end()) return std::nullopt;
  return it->second;
}

void Program::add(Word label, Instr in) {
  label &= mask();
  if (in.op == Op::EndBr) labelset_.insert(label);
  index_.emplace(label, body_.size());  // first occurrence wins; duplicates are reported by check_well_formed
  body_.push_back({label, std::move(in)});
}

const Instr *Program::at(Word label) const {
  auto it = index_.find(label);
  return it == index_.end() ? nullptr : &body_[it->second].instr;
}

std::optional<Word> Program::function(const std::string &name) const {
  auto it = functions_.find(name);
  if (it == functions_.end()) return std::nullopt;
  return it->second;
}

std::set<Word> Program::labels() const {
  std::set<Word> out;
  for (const auto &li : body_) out.insert(li.label);
  return out;
}

std::vector<std::string> check_well_formed(const Program &p) {
  std::vector<std::string> out;
  std::set<Word> seen;
  for (const auto &li : p.body()) {
    if (!seen.insert(li.label).second) out.push_back("duplicate label " + std::to_string(li.label));
  }
  if (!seen.count(0)) out.push_back("no initial instruction");
  for (const auto &li : p.body()) {
    const Instr &in = li.instr;
    if (in.op == Op::Beqz && !in.target.bot && in.target.w == ((li.label + 1) & p.mask()))
      out.push_back("beqz at label " + std::to_string(li.label) + " targets the next label");
    if (in.op == Op::Call && !p.function(in.fname))
      out.push_back("call to unknown function " + in.fname);
  }
  return out;
}

namespace {

std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

bool is_ident(const std::string &s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

const std::set<std::string> &keywords() {
  static const std::set<std::string> k = {"skip", "load", "store", "jmp", "beqz", "cmov", "spbarr",
                                          "call", "ret", "endbr", "fn", "bot", "data"};
  return k;
}

struct SourceLine {
  int lineno;
  int col;  // column of the instruction text
  std::string text;
  Word label;
};

// Recursive-descent expression parser using C precedence.
class ExprParser {
 public:
  ExprParser(const std::string &s, int line, int col0, Program &p, const std::map<std::string, Word> &names)
      : s_(s), line_(line), col0_(col0), p_(p), names_(names) {}

  ExprPtr parse_all() {
    ExprPtr e = parse_bin(0);
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_, 1) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string &msg) { throw ParseError(line_, col0_ + static_cast<int>(pos_), msg); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(const std::string &tok) {
    skip_ws();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  // Binary levels from loosest to tightest.
  struct Level {
    std::vector<std::pair<std::string, BinOp>> ops;
  };

  static const std::vector<Level> &levels() {
    static const std::vector<Level> lv = {
        {{{"|", BinOp::Or}}},
        {{{"^", BinOp::Xor}}},
        {{{"&", BinOp::And}}},
        {{{"==", BinOp::Eq}, {"!=", BinOp::Ne}}},
        {{{"<=", BinOp::Le}, {">=", BinOp::Ge}, {"<<", BinOp::Shl}, {">>", BinOp::Shr},
          {"<", BinOp::Lt}, {">", BinOp::Gt}}},
        {{{"+", BinOp::Add}, {"-", BinOp::Sub}}},
        {{{"*", BinOp::Mul}, {"/", BinOp::Div}}},
    };
    return lv;
  }

  // The relational and shift operators share a token prefix, so level 4 is
  // split by hand: shifts bind tighter than relations.
  ExprPtr parse_bin(std::size_t level) {
    if (level == 4) return parse_rel();
    if (level >= levels().size()) return parse_unary();
    ExprPtr lhs = parse_bin(level + 1);
    for (;;) {
      skip_ws();
      bool matched = false;
      for (const auto &[tok, op] : levels()[level].ops) {
        if (s_.compare(pos_, tok.size(), tok) != 0) continue;
        // don't read "||"/"&&" or the first char of "==" etc. as a single op
        if ((tok == "|" || tok == "&") && s_.compare(pos_, 2, tok + tok) == 0) fail("operator " + tok + tok + " not supported");
        pos_ += tok.size();
        lhs = Expr::binary(op, lhs, parse_bin(level + 1));
        matched = true;
        break;
      }
      if (!matched) return lhs;
    }
  }

  ExprPtr parse_rel() {
    ExprPtr lhs = parse_shift();
    for (;;) {
      skip_ws();
      BinOp op;
      if (accept("<=")) op = BinOp::Le;
      else if (accept(">=")) op = BinOp::Ge;
      else if (s_.compare(pos_, 2, "<<") == 0 || s_.compare(pos_, 2, ">>") == 0) return lhs;
      else if (accept("<")) op = BinOp::Lt;
      else if (accept(">")) op = BinOp::Gt;
      else return lhs;
      lhs = Expr::binary(op, lhs, parse_shift());
    }
  }

  ExprPtr parse_shift() {
    ExprPtr lhs = parse_bin(5);
    for (;;) {
      if (accept("<<")) lhs = Expr::binary(BinOp::Shl, lhs, parse_bin(5));
      else if (accept(">>")) lhs = Expr::binary(BinOp::Shr, lhs, parse_bin(5));
      else return lhs;
    }
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (accept("-")) return Expr::unary(UnOp::Neg, parse_unary());
    if (accept("~")) return Expr::unary(UnOp::Not, parse_unary());
    if (s_.compare(pos_, 2, "!=") != 0 && accept("!")) return Expr::unary(UnOp::LNot, parse_unary());
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_bin(0);
      if (!accept(")")) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return Expr::constant(Value::word(parse_number()));
    if (is_ident_start(c)) {
      std::size_t b = pos_;
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
      std::string id = s_.substr(b, pos_ - b);
      if (id == "bot") return Expr::constant(Value::bottom());
      auto it = names_.find(id);
      if (it != names_.end()) return Expr::constant(Value::word(it->second & p_.mask()));
      if (keywords().count(id)) fail("keyword '" + id + "' used as register");
      return Expr::regref(p_.reg(id));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  Word parse_number() {
    std::size_t b = pos_;
    int base = 10;
    if (s_.compare(pos_, 2, "0x") == 0 || s_.compare(pos_, 2, "0X") == 0) {
      base = 16;
      pos_ += 2;
    }
    std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_]))) {
      if (base == 10 && !std::isdigit(static_cast<unsigned char>(s_[pos_]))) break;
      ++pos_;
    }
    if (pos_ == digits) fail("malformed number");
    if (pos_ < s_.size() && is_ident_char(s_[pos_])) fail("malformed number");
    try {
      return std::stoull(s_.substr(digits, pos_ - digits), nullptr, base) & p_.mask();
    } catch (const std::out_of_range &) {
      pos_ = b;
      fail("number out of range");
    }
  }

  const std::string &s_;
  std::size_t pos_ = 0;
  int line_, col0_;
  Program &p_;
  const std::map<std::string, Word> &names_;
};

// Splits "a, b, c" at top-level commas.
std::vector<std::pair<std::string, int>> split_operands(const std::string &s, int col0) {
  std::vector<std::pair<std::string, int>> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      std::string piece = s.substr(start, i - start);
      std::size_t lead = 0;
      while (lead < piece.size() && std::isspace(static_cast<unsigned char>(piece[lead]))) ++lead;
      out.emplace_back(trim(piece), col0 + static_cast<int>(start + lead));
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  return out;
}

}  // namespace

Program parse_program(const std::string &text, unsigned width) {
  Program p(width);
  std::vector<SourceLine> lines;
  std::map<std::string, Word> names;
  std::vector<std::pair<std::string, int>> pending;  // names waiting for the next label
  std::set<std::string> declared;
  std::map<std::string, Word> data;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  Word next_label = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t semi = raw.find(';');
    std::string body = semi == std::string::npos ? raw : raw.substr(0, semi);
    std::size_t lead = 0;
    while (lead < body.size() && std::isspace(static_cast<unsigned char>(body[lead]))) ++lead;
    std::string t = trim(body);
    int col = static_cast<int>(lead) + 1;
    if (t.empty()) continue;

    // "data NAME = ADDR" names a memory address.
    if (t.rfind("data", 0) == 0 && t.size() > 4 && std::isspace(static_cast<unsigned char>(t[4]))) {
      std::size_t eq = t.find('=');
      std::string name = trim(t.substr(4, eq == std::string::npos ? std::string::npos : eq - 4));
      if (eq == std::string::npos || !is_ident(name) || keywords().count(name))
        throw ParseError(lineno, col, "expected 'data NAME = ADDR'");
      if (!declared.insert(name).second) throw ParseError(lineno, col, "name '" + name + "' bound twice");
      std::string num = trim(t.substr(eq + 1));
      try {
        std::size_t used = 0;
        Word v = std::stoull(num, &used, 0);
        if (used != num.size()) throw std::invalid_argument("addr");
        data[name] = v & p.mask();
      } catch (const std::exception &) {
        throw ParseError(lineno, col, "malformed address '" + num + "'");
      }
      continue;
    }

    // Peel off "fn NAME:", "NAME:" and "N:" prefixes.
    std::optional<Word> explicit_label;
    for (;;) {
      std::size_t colon = t.find(':');
      if (colon == std::string::npos) break;
      std::string head = trim(t.substr(0, colon));
      bool fn = false;
      if (head.rfind("fn ", 0) == 0 || head.rfind("fn\t", 0) == 0) {
        fn = true;
        head = trim(head.substr(3));
      }
      if (!fn && !head.empty() && std::isdigit(static_cast<unsigned char>(head[0]))) {
        if (explicit_label) throw ParseError(lineno, col, "two numeric labels on one line");
        try {
          std::size_t used = 0;
          int base = (head.size() > 2 && (head[1] == 'x' || head[1] == 'X')) ? 16 : 10;
          Word v = std::stoull(head, &used, base);
          if (used != head.size()) throw std::invalid_argument("label");
          explicit_label = v & p.mask();
        } catch (const std::exception &) {
          throw ParseError(lineno, col, "malformed label '" + head + "'");
        }
      } else if (is_ident(head) && !keywords().count(head)) {
        if (!declared.insert(head).second) throw ParseError(lineno, col, "name '" + head + "' bound twice");
        pending.emplace_back(head, col);
      } else {
        break;  // not a label prefix
      }
      std::size_t consumed = t.size() - trim(t.substr(colon + 1)).size();
      col += static_cast<int>(consumed);
      t = trim(t.substr(colon + 1));
      if (t.empty()) break;
    }
    if (explicit_label) next_label = *explicit_label;
    if (t.empty()) {
      if (explicit_label) throw ParseError(lineno, col, "label without instruction");
      continue;
    }
    for (auto &[name, c] : pending) names[name] = next_label;
    pending.clear();
    lines.push_back({lineno, col, t, next_label});
    next_label = (next_label + 1) & p.mask();
  }
  for (auto &[name, c] : pending) names[name] = next_label;

  for (const auto &[name, label] : names) p.bind(name, label);
  for (const auto &[name, addr] : data) {
    p.define_symbol(name, addr);
    names[name] = addr;
  }

  for (const SourceLine &sl : lines) {
    const std::string &t = sl.text;
    std::size_t sp = 0;
    while (sp < t.size() && !std::isspace(static_cast<unsigned char>(t[sp]))) ++sp;
    std::string mnem = t.substr(0, sp);
    std::string rest = trim(t.substr(sp));
    int rest_col = sl.col + static_cast<int>(t.size() - rest.size());
    auto expr = [&](const std::string &s, int c) { return ExprParser(s, sl.lineno, c, p, names).parse_all(); };
    auto reg_operand = [&](const std::string &s, int c) {
      if (!is_ident(s) || keywords().count(s)) throw ParseError(sl.lineno, c, "expected register, got '" + s + "'");
      if (names.count(s)) throw ParseError(sl.lineno, c, "'" + s + "' is a label, not a register");
      return p.reg(s);
    };
    auto nops = [&](std::size_t n) {
      auto ops = split_operands(rest, rest_col);
      if (rest.empty()) ops.clear();
      if (ops.size() != n)
        throw ParseError(sl.lineno, sl.col, mnem + " expects " + std::to_string(n) + " operand(s)");
      return ops;
    };

    Instr in;
    std::size_t arrow = t.find("<-");
    if (arrow != std::string::npos && mnem != "cmov") {
      in.op = Op::Assign;
      std::string lhs = trim(t.substr(0, arrow));
      in.reg = reg_operand(lhs, sl.col);
      std::string rhs = t.substr(arrow + 2);
      in.e = expr(rhs, sl.col + static_cast<int>(arrow) + 2);
    } else if (mnem == "skip" || mnem == "spbarr" || mnem == "ret" || mnem == "endbr") {
      nops(0);
      in.op = mnem == "skip" ? Op::Skip : mnem == "spbarr" ? Op::SpBarr : mnem == "ret" ? Op::Ret : Op::EndBr;
    } else if (mnem == "load" || mnem == "store") {
      auto ops = nops(2);
      in.op = mnem == "load" ? Op::Load : Op::Store;
      in.reg = reg_operand(ops[0].first, ops[0].second);
      in.e = expr(ops[1].first, ops[1].second);
    } else if (mnem == "jmp") {
      auto ops = nops(1);
      in.op = Op::Jmp;
      in.e = expr(ops[0].first, ops[0].second);
    } else if (mnem == "beqz") {
      auto ops = nops(2);
      in.op = Op::Beqz;
      in.reg = reg_operand(ops[0].first, ops[0].second);
      ExprPtr tgt = expr(ops[1].first, ops[1].second);
      if (tgt->kind != Expr::Kind::Const) throw ParseError(sl.lineno, ops[1].second, "beqz target must be a label");
      in.target = tgt->value;
    } else if (mnem == "cmov") {
      auto ops = nops(3);
      in.op = Op::CMov;
      in.reg = reg_operand(ops[0].first, ops[0].second);
      in.e = expr(ops[1].first, ops[1].second);
      in.e2 = expr(ops[2].first, ops[2].second);
    } else if (mnem == "call") {
      auto ops = nops(1);
      in.op = Op::Call;
      if (!names.count(ops[0].first)) throw ParseError(sl.lineno, ops[0].second, "unknown function '" + ops[0].first + "'");
      in.fname = ops[0].first;
    } else {
      throw ParseError(sl.lineno, sl.col, "unknown instruction '" + mnem + "'");
    }
    p.add(sl.label, std::move(in));
  }

  auto v = check_well_formed(p);
  if (!v.empty()) {
    std::string msg = "program is not well-formed:";
    for (auto &s : v) msg += " " + s + ";";
    throw Error(msg);
  }
  return p;
}

std::string print_expr(const Program &p, const Expr &e) {
  switch (e.kind) {
    case Expr::Kind::Const: return to_string(e.value);
    case Expr::Kind::Reg: return p.reg_name(e.reg);
    case Expr::Kind::Unary: return std::string(op_text(e.uop)) + "(" + print_expr(p, *e.a) + ")";
    case Expr::Kind::Binary:
      return "(" + print_expr(p, *e.a) + " " + op_text(e.bop) + " " + print_expr(p, *e.b) + ")";
  }
  return "";
}

std::string print_instr(const Program &p, const Instr &in) {
  switch (in.op) {
    case Op::Skip: return "skip";
    case Op::Assign: return p.reg_name(in.reg) + " <- " + print_expr(p, *in.e);
    case Op::Load: return "load " + p.reg_name(in.reg) + ", " + print_expr(p, *in.e);
    case Op::Store: return "store " + p.reg_name(in.reg) + ", " + print_expr(p, *in.e);
    case Op::Jmp: return "jmp " + print_expr(p, *in.e);
    case Op::Beqz: return "beqz " + p.reg_name(in.reg) + ", " + to_string(in.target);
    case Op::CMov:
      return "cmov " + p.reg_name(in.reg) + ", " + print_expr(p, *in.e) + ", " + print_expr(p, *in.e2);
    case Op::SpBarr: return "spbarr";
    case Op::Call: return "call " + in.fname;
    case Op::Ret: return "ret";
    case Op::EndBr: return "endbr";
  }
  return "";
}

std::string print_program(const Program &p) {
  std::multimap<Word, std::string> by_label;
  for (const auto &[name, label] : p.functions()) by_label.emplace(label, name);
  std::ostringstream out;
  for (const auto &[name, addr] : p.symbols()) out << "data " << name << " = " << addr << "\n";
  std::set<Word> printed;
  for (const auto &li : p.body()) {
    if (printed.insert(li.label).second) {
      auto [b, e] = by_label.equal_range(li.label);
      for (auto it = b; it != e; ++it) out << "fn " << it->second << ":\n";
    }
    out << li.label << ": " << print_instr(p, li.instr) << "\n";
  }
  // Names bound past the last instruction.
  for (const auto &[label, name] : by_label)
    if (!printed.count(label)) out << "fn " << name << ":\n";
  return out.str();
}

namespace {

bool same_expr(const Program &pa, const Expr &a, const Program &pb, const Expr &b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Const: return a.value == b.value;
    case Expr::Kind::Reg: return pa.reg_name(a.reg) == pb.reg_name(b.reg);
    case Expr::Kind::Unary: return a.uop == b.uop && same_expr(pa, *a.a, pb, *b.a);
    case Expr::Kind::Binary:
      return a.bop == b.bop && same_expr(pa, *a.a, pb, *b.a) && same_expr(pa, *a.b, pb, *b.b);
  }
  return false;
}

bool same_opt_expr(const Program &pa, const ExprPtr &a, const Program &pb, const ExprPtr &b) {
  if (!a || !b) return !a && !b;
  return same_expr(pa, *a, pb, *b);
}

}  // namespace

bool same_program(const Program &a, const Program &b) {
  if (a.width() != b.width() || a.functions() != b.functions() || a.symbols() != b.symbols() || a.body().size() != b.body().size()) return false;
  for (std::size_t i = 0; i < a.body().size(); ++i) {
    const auto &x = a.body()[i];
    const auto &y = b.body()[i];
    if (x.label != y.label || x.instr.op != y.instr.op) return false;
    const Instr &u = x.instr, &v = y.instr;
    bool has_reg = u.op == Op::Assign || u.op == Op::Load || u.op == Op::Store || u.op == Op::Beqz || u.op == Op::CMov;
    if (has_reg && a.reg_name(u.reg) != b.reg_name(v.reg)) return false;
    if (!same_opt_expr(a, u.e, b, v.e) || !same_opt_expr(a, u.e2, b, v.e2)) return false;
    if (u.target != v.target || u.fname != v.fname) return false;
  }
  return a.labelset() == b.labelset();
}

}  // namespace speclab
