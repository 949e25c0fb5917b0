#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace speclab {

using Word = std::uint64_t;

inline Word width_mask(unsigned width) {
  return width >= 64 ? ~Word{0} : ((Word{1} << width) - 1);
}

// A machine word or the termination marker (bottom).
struct Value {
  Word w = 0;
  bool bot = false;

  static Value word(Word x) { return Value{x, false}; }
  static Value bottom() { return Value{0, true}; }

  bool operator==(const Value &o) const { return bot == o.bot && (bot || w == o.w); }
  bool operator!=(const Value &o) const { return !(*this == o); }
  bool operator<(const Value &o) const {
    if (bot != o.bot) return !bot;
    return !bot && w < o.w;
  }
};

std::string to_string(const Value &v);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string &msg);
  int line, col;
};

// Raised when expression evaluation or a step cannot proceed.
class EvalError : public Error {
 public:
  using Error::Error;
};

enum class UnOp { Neg, Not, LNot };
enum class BinOp { Add, Sub, Mul, Div, And, Or, Xor, Shl, Shr, Lt, Le, Eq, Ne, Ge, Gt };

const char *op_text(UnOp op);
const char *op_text(BinOp op);
bool is_comparison(BinOp op);

// Register indices are per-program; 0 is pc and 1 is sp.
using RegId = std::uint32_t;
constexpr RegId kPc = 0;
constexpr RegId kSp = 1;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Const, Reg, Unary, Binary };
  Kind kind;
  Value value;       // Const
  RegId reg = 0;     // Reg
  UnOp uop = UnOp::Neg;
  BinOp bop = BinOp::Add;
  ExprPtr a, b;

  static ExprPtr constant(Value v);
  static ExprPtr regref(RegId r);
  static ExprPtr unary(UnOp op, ExprPtr x);
  static ExprPtr binary(BinOp op, ExprPtr x, ExprPtr y);
};

bool reads_register(const Expr &e);

// Word arithmetic shared by the concrete and symbolic evaluators.
Word apply_unop(UnOp op, Word x, unsigned width);
// Throws EvalError on division by zero.
Word apply_binop(BinOp op, Word x, Word y, unsigned width);

enum class Op { Skip, Assign, Load, Store, Jmp, Beqz, CMov, SpBarr, Call, Ret, EndBr };
constexpr int kOpCount = 11;
const char *op_name(Op op);

struct Instr {
  Op op = Op::Skip;
  RegId reg = 0;        // Assign/Load/Store/Beqz/CMov
  ExprPtr e, e2;        // Assign/Load/Store/Jmp: e; CMov: e (value), e2 (condition)
  Value target;         // Beqz
  std::string fname;    // Call
};

struct LabeledInstr {
  Word label;
  Instr instr;
};

class Program {
 public:
  explicit Program(unsigned width = 64);

  unsigned width() const { return width_; }
  Word mask() const { return width_mask(width_); }

  // Returns the index of a register, interning it if new.
  RegId reg(const std::string &name);
  std::optional<RegId> find_reg(const std::string &name) const;
  const std::string &reg_name(RegId r) const { return regs_[r]; }
  std::size_t reg_count() const { return regs_.size(); }

  void add(Word label, Instr in);
  void bind(const std::string &name, Word label) { functions_[name] = label; }

  const Instr *at(Word label) const;
  const Instr *at(const Value &pc) const { return pc.bot ? nullptr : at(pc.w); }
  const std::vector<LabeledInstr> &body() const { return body_; }
  const std::map<std::string, Word> &functions() const { return functions_; }
  std::optional<Word> function(const std::string &name) const;
  const std::set<Word> &labelset() const { return labelset_; }
  std::set<Word> labels() const;

  // Named data addresses (from a front-end's memory layout).
  void define_symbol(const std::string &name, Word addr) { symbols_[name] = addr; }
  const std::map<std::string, Word> &symbols() const { return symbols_; }

 private:
  unsigned width_;
  std::vector<std::string> regs_;
  std::unordered_map<std::string, RegId> reg_index_;
  std::vector<LabeledInstr> body_;
  std::unordered_map<Word, std::size_t> index_;
  std::map<std::string, Word> functions_;
  std::set<Word> labelset_;
  std::map<std::string, Word> symbols_;
};

// Violations of the well-formedness rules; empty when the program is fine.
std::vector<std::string> check_well_formed(const Program &p);

// Parses μASM text. Throws ParseError (syntax) or Error (well-formedness).
Program parse_program(const std::string &text, unsigned width = 64);
std::string print_program(const Program &p);
std::string print_expr(const Program &p, const Expr &e);
std::string print_instr(const Program &p, const Instr &in);

// Structural equality with registers compared by name.
bool same_program(const Program &a, const Program &b);

// Registers are read through `regs(RegId) -> Value`. Throws EvalError on a
// bottom operand or division by zero.
template <class RegFn>
Value eval_expr_with(const Expr &e, RegFn &&regs, unsigned width) {
  switch (e.kind) {
    case Expr::Kind::Const:
      return e.value;
    case Expr::Kind::Reg:
      return regs(e.reg);
    case Expr::Kind::Unary: {
      Value x = eval_expr_with(*e.a, regs, width);
      if (x.bot) throw EvalError("bottom operand");
      return Value::word(apply_unop(e.uop, x.w, width));
    }
    case Expr::Kind::Binary: {
      Value x = eval_expr_with(*e.a, regs, width);
      Value y = eval_expr_with(*e.b, regs, width);
      if (x.bot || y.bot) throw EvalError("bottom operand");
      return Value::word(apply_binop(e.bop, x.w, y.w, width));
    }
  }
  return Value::bottom();
}

using RegReader = std::function<Value(RegId)>;
Value eval_expr(const Expr &e, const RegReader &regs, unsigned width);

}  // namespace speclab
