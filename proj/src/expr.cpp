#include "disconj/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include "disconj/errors.hpp"
#include "disconj/text.hpp"

namespace disconj {

namespace {

struct FunctionEntry {
  std::string_view name;
  Op op;
  int arity;
};

constexpr std::array<FunctionEntry, 13> kFunctions{{
    {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},
    {"tan", Op::Tan, 1},
    {"cot", Op::Cot, 1},
    {"exp", Op::Exp, 1},
    {"ln", Op::Ln, 1},
    {"sinh", Op::Sinh, 1},
    {"cosh", Op::Cosh, 1},
    {"tanh", Op::Tanh, 1},
    {"abs", Op::Abs, 1},
    {"sqrt", Op::Sqrt, 1},
    {"min", Op::Min, 2},
    {"max", Op::Max, 2},
}};

const FunctionEntry* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_param(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Param;
  n->name = std::move(name);
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// Folding constructors used by differentiation, substitution and the
// arithmetic operators. They never change the value of the expression.
NodePtr fold_add(NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make_node(Op::Add, std::move(a), std::move(b));
}

NodePtr fold_neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  if (a->op == Op::Neg) return a->lhs;
  return make_node(Op::Neg, std::move(a));
}

NodePtr fold_sub(NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return fold_neg(std::move(b));
  return make_node(Op::Sub, std::move(a), std::move(b));
}

NodePtr fold_mul(NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return fold_neg(std::move(b));
  if (is_const(b, -1.0)) return fold_neg(std::move(a));
  return make_node(Op::Mul, std::move(a), std::move(b));
}

NodePtr fold_div(NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const && b->value != 0.0) {
    return make_const(a->value / b->value);
  }
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  return make_node(Op::Div, std::move(a), std::move(b));
}

NodePtr fold_pow(NodePtr a, NodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return make_const(1.0);
  return make_node(Op::Pow, std::move(a), std::move(b));
}

NodePtr fold_func(Op op, NodePtr a, NodePtr b = nullptr) { return make_node(op, std::move(a), std::move(b)); }

bool node_depends_on_t(const Node& n) {
  if (n.op == Op::Var) return true;
  if (n.lhs && node_depends_on_t(*n.lhs)) return true;
  if (n.rhs && node_depends_on_t(*n.rhs)) return true;
  return false;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr n = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return n;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  bool at_number() {
    skip_ws();
    if (pos_ >= src_.size()) return false;
    char c = src_[pos_];
    return digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]));
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_node(Op::Div, lhs, parse_unary());
      } else {
        skip_ws();
        if (pos_ < src_.size() && (ident_start(src_[pos_]) || digit(src_[pos_]) || src_[pos_] == '(')) {
          throw ParseError("implicit multiplication is not allowed; use '*'", pos_);
        }
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('+')) return parse_unary();
    if (accept('-')) {
      // A negated literal becomes a negative constant unless it is the base
      // of a power (-3^2 is -(3^2)).
      if (at_number()) {
        std::size_t save = pos_;
        double v = parse_number();
        skip_ws();
        bool power_follows = pos_ < src_.size() && src_[pos_] == '^';
        if (!power_follows) return make_const(-v);
        pos_ = save;
      }
      return make_node(Op::Neg, parse_unary());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_node(Op::Pow, base, parse_unary());
    return base;
  }

  double parse_number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && (digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw ParseError("malformed number", start);
    return v;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (at_number()) return make_const(parse_number());
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      skip_ws();
      bool call = pos_ < src_.size() && src_[pos_] == '(';
      if (call) {
        const FunctionEntry* f = find_function(name);
        if (f == nullptr) throw ParseError("unknown identifier '" + name + "'", start);
        ++pos_;
        NodePtr a = parse_expr();
        NodePtr b;
        if (f->arity == 2) {
          expect(',');
          b = parse_expr();
        }
        expect(')');
        return make_node(f->op, a, b);
      }
      if (find_function(name) != nullptr) throw ParseError("function '" + name + "' needs an argument list", start);
      if (name == "t") return make_node(Op::Var);
      if (name == "pi") return make_const(std::numbers::pi);
      return make_param(std::move(name));
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- printer

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Const:
      if (n.value < 0 || (n.value == 0 && std::signbit(n.value))) {
        out += "(-";
        out += format_number(-n.value);
        out += ')';
      } else {
        out += format_number(n.value);
      }
      return;
    case Op::Var:
      out += 't';
      return;
    case Op::Param:
      out += n.name;
      return;
    case Op::Neg:
      out += "(-";
      if (n.lhs->op == Op::Const && !std::signbit(n.lhs->value)) {
        out += '(';
        print(*n.lhs, out);
        out += ')';
      } else {
        print(*n.lhs, out);
      }
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      out += '(';
      print(*n.lhs, out);
      out += op_name(n.op);
      print(*n.rhs, out);
      out += ')';
      return;
    default:
      out += op_name(n.op);
      out += '(';
      print(*n.lhs, out);
      if (n.rhs) {
        out += ',';
        print(*n.rhs, out);
      }
      out += ')';
      return;
  }
}

// ----------------------------------------------------------- derivative

NodePtr derive(const NodePtr& np) {
  const Node& n = *np;
  auto d = [](const NodePtr& c) { return derive(c); };
  switch (n.op) {
    case Op::Const:
    case Op::Param:
      return make_const(0.0);
    case Op::Var:
      return make_const(1.0);
    case Op::Add:
      return fold_add(d(n.lhs), d(n.rhs));
    case Op::Sub:
      return fold_sub(d(n.lhs), d(n.rhs));
    case Op::Neg:
      return fold_neg(d(n.lhs));
    case Op::Mul:
      return fold_add(fold_mul(d(n.lhs), n.rhs), fold_mul(n.lhs, d(n.rhs)));
    case Op::Div:
      return fold_div(fold_sub(fold_mul(d(n.lhs), n.rhs), fold_mul(n.lhs, d(n.rhs))),
                      fold_pow(n.rhs, make_const(2.0)));
    case Op::Pow: {
      bool base_t = node_depends_on_t(*n.lhs);
      bool exp_t = node_depends_on_t(*n.rhs);
      if (!base_t && !exp_t) return make_const(0.0);
      if (!exp_t) {
        // e * u^(e-1) * u'
        NodePtr e_minus_1 = fold_sub(n.rhs, make_const(1.0));
        return fold_mul(fold_mul(n.rhs, fold_pow(n.lhs, e_minus_1)), d(n.lhs));
      }
      if (!base_t) {
        return fold_mul(fold_mul(np, fold_func(Op::Ln, n.lhs)), d(n.rhs));
      }
      NodePtr inner = fold_add(fold_mul(d(n.rhs), fold_func(Op::Ln, n.lhs)),
                               fold_div(fold_mul(n.rhs, d(n.lhs)), n.lhs));
      return fold_mul(np, inner);
    }
    case Op::Sin:
      return fold_mul(fold_func(Op::Cos, n.lhs), d(n.lhs));
    case Op::Cos:
      return fold_neg(fold_mul(fold_func(Op::Sin, n.lhs), d(n.lhs)));
    case Op::Tan:
      return fold_div(d(n.lhs), fold_pow(fold_func(Op::Cos, n.lhs), make_const(2.0)));
    case Op::Cot:
      return fold_neg(fold_div(d(n.lhs), fold_pow(fold_func(Op::Sin, n.lhs), make_const(2.0))));
    case Op::Exp:
      return fold_mul(np, d(n.lhs));
    case Op::Ln:
      return fold_div(d(n.lhs), n.lhs);
    case Op::Sinh:
      return fold_mul(fold_func(Op::Cosh, n.lhs), d(n.lhs));
    case Op::Cosh:
      return fold_mul(fold_func(Op::Sinh, n.lhs), d(n.lhs));
    case Op::Tanh:
      return fold_div(d(n.lhs), fold_pow(fold_func(Op::Cosh, n.lhs), make_const(2.0)));
    case Op::Sqrt:
      return fold_div(d(n.lhs), fold_mul(make_const(2.0), np));
    case Op::Abs:
    case Op::Min:
    case Op::Max:
      if (!node_depends_on_t(n)) return make_const(0.0);
      throw NonDifferentiableError(std::string("cannot differentiate '") + std::string(op_name(n.op)) +
                                   "' of a t-dependent argument");
  }
  throw NonDifferentiableError("unknown node");
}

NodePtr rebuild(const NodePtr& np, const NodePtr* t_replacement, const ParamMap* params) {
  const Node& n = *np;
  switch (n.op) {
    case Op::Const:
      return np;
    case Op::Var:
      return t_replacement ? *t_replacement : np;
    case Op::Param:
      if (params) {
        auto it = params->find(n.name);
        if (it != params->end()) return make_const(it->second);
      }
      return np;
    default:
      break;
  }
  NodePtr a = rebuild(n.lhs, t_replacement, params);
  NodePtr b = n.rhs ? rebuild(n.rhs, t_replacement, params) : nullptr;
  switch (n.op) {
    case Op::Add:
      return fold_add(a, b);
    case Op::Sub:
      return fold_sub(a, b);
    case Op::Mul:
      return fold_mul(a, b);
    case Op::Div:
      return fold_div(a, b);
    case Op::Pow:
      return fold_pow(a, b);
    case Op::Neg:
      return fold_neg(a);
    default:
      return fold_func(n.op, a, b);
  }
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Const:
      return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
    case Op::Var:
      return true;
    case Op::Param:
      return a.name == b.name;
    default:
      break;
  }
  if (!equal_nodes(*a.lhs, *b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  return !a.rhs || equal_nodes(*a.rhs, *b.rhs);
}

void collect_params(const Node& n, std::set<std::string>& out) {
  if (n.op == Op::Param) out.insert(n.name);
  if (n.lhs) collect_params(*n.lhs, out);
  if (n.rhs) collect_params(*n.rhs, out);
}

[[noreturn]] void domain_fail(std::string_view what, double t) {
  throw DomainError(std::string(what) + " at t=" + format_number(t));
}

}  // namespace

bool is_binary(Op op) noexcept {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
    case Op::Min:
    case Op::Max:
      return true;
    default:
      return false;
  }
}

bool is_function(Op op) noexcept {
  for (const auto& f : kFunctions) {
    if (f.op == op) return true;
  }
  return false;
}

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::Const:
      return "const";
    case Op::Var:
      return "t";
    case Op::Param:
      return "param";
    case Op::Add:
      return "+";
    case Op::Sub:
      return "-";
    case Op::Mul:
      return "*";
    case Op::Div:
      return "/";
    case Op::Pow:
      return "^";
    case Op::Neg:
      return "neg";
    default:
      break;
  }
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

// ------------------------------------------------------------- CoeffExpr

CoeffExpr::CoeffExpr() : root_(make_const(0.0)) {}
CoeffExpr::CoeffExpr(NodePtr root) : root_(std::move(root)) {}

CoeffExpr CoeffExpr::parse(std::string_view src) { return CoeffExpr(Parser(src).parse()); }
CoeffExpr CoeffExpr::constant(double v) { return CoeffExpr(make_const(v)); }
CoeffExpr CoeffExpr::variable() { return CoeffExpr(make_node(Op::Var)); }
CoeffExpr CoeffExpr::parameter(std::string name) { return CoeffExpr(make_param(std::move(name))); }

double CoeffExpr::eval(double t, const ParamMap& params) const { return compile(params)(t); }

CoeffExpr CoeffExpr::differentiate() const { return CoeffExpr(derive(root_)); }

std::string CoeffExpr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool CoeffExpr::depends_on_t() const { return node_depends_on_t(*root_); }

std::set<std::string> CoeffExpr::parameters() const {
  std::set<std::string> out;
  collect_params(*root_, out);
  return out;
}

CoeffExpr CoeffExpr::substitute_t(const CoeffExpr& replacement) const {
  return CoeffExpr(rebuild(root_, &replacement.root_, nullptr));
}

CoeffExpr CoeffExpr::bind(const ParamMap& params) const { return CoeffExpr(rebuild(root_, nullptr, &params)); }

bool CoeffExpr::structurally_equal(const CoeffExpr& other) const { return equal_nodes(*root_, *other.root_); }

CoeffExpr operator+(const CoeffExpr& a, const CoeffExpr& b) { return CoeffExpr(fold_add(a.root_, b.root_)); }
CoeffExpr operator-(const CoeffExpr& a, const CoeffExpr& b) { return CoeffExpr(fold_sub(a.root_, b.root_)); }
CoeffExpr operator*(const CoeffExpr& a, const CoeffExpr& b) { return CoeffExpr(fold_mul(a.root_, b.root_)); }
CoeffExpr operator/(const CoeffExpr& a, const CoeffExpr& b) { return CoeffExpr(fold_div(a.root_, b.root_)); }
CoeffExpr operator-(const CoeffExpr& a) { return CoeffExpr(fold_neg(a.root_)); }

CoeffExpr pow(const CoeffExpr& base, const CoeffExpr& exponent) {
  return CoeffExpr(fold_pow(base.root_ptr(), exponent.root_ptr()));
}

CoeffExpr apply(Op function, const CoeffExpr& arg) {
  if (!is_function(function) || is_binary(function)) throw Error("apply() needs a unary function");
  return CoeffExpr(fold_func(function, arg.root_ptr()));
}

// ---------------------------------------------------------- compilation

namespace {

std::size_t emit(const Node& n, const ParamMap& params, std::vector<std::pair<Op, double>>& code, bool& constant) {
  switch (n.op) {
    case Op::Const:
      code.emplace_back(Op::Const, n.value);
      return 1;
    case Op::Var:
      constant = false;
      code.emplace_back(Op::Var, 0.0);
      return 1;
    case Op::Param: {
      auto it = params.find(n.name);
      if (it == params.end()) throw DomainError("unbound parameter '" + n.name + "'");
      code.emplace_back(Op::Const, it->second);
      return 1;
    }
    default:
      break;
  }
  std::size_t da = emit(*n.lhs, params, code, constant);
  std::size_t depth = da;
  if (n.rhs) {
    std::size_t db = emit(*n.rhs, params, code, constant);
    depth = std::max(da, db + 1);
  }
  code.emplace_back(n.op, 0.0);
  return depth;
}

}  // namespace

CompiledExpr CoeffExpr::compile(const ParamMap& params) const {
  std::vector<std::pair<Op, double>> raw;
  bool constant = true;
  std::size_t depth = emit(*root_, params, raw, constant);
  CompiledExpr out;
  out.code_.reserve(raw.size());
  for (const auto& [op, v] : raw) out.code_.push_back({op, v});
  out.max_depth_ = depth;
  out.constant_ = constant;
  return out;
}

double CompiledExpr::operator()(double t) const {
  if (code_.empty()) return 0.0;
  constexpr std::size_t kSmall = 32;
  std::array<double, kSmall> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > kSmall) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const:
        stack[sp++] = in.value;
        continue;
      case Op::Var:
        stack[sp++] = t;
        continue;
      default:
        break;
    }
    double r;
    if (is_binary(in.op)) {
      double b = stack[--sp];
      double a = stack[--sp];
      switch (in.op) {
        case Op::Add:
          r = a + b;
          break;
        case Op::Sub:
          r = a - b;
          break;
        case Op::Mul:
          r = a * b;
          break;
        case Op::Div:
          if (b == 0.0) domain_fail("division by zero", t);
          r = a / b;
          break;
        case Op::Pow:
          if (a == 0.0 && b < 0.0) domain_fail("division by zero in power", t);
          if (a < 0.0 && b != std::trunc(b)) domain_fail("negative base with non-integer exponent", t);
          r = std::pow(a, b);
          break;
        case Op::Min:
          r = std::min(a, b);
          break;
        default:
          r = std::max(a, b);
          break;
      }
    } else {
      double a = stack[--sp];
      switch (in.op) {
        case Op::Neg:
          r = -a;
          break;
        case Op::Sin:
          r = std::sin(a);
          break;
        case Op::Cos:
          r = std::cos(a);
          break;
        case Op::Tan:
          r = std::tan(a);
          break;
        case Op::Cot: {
          double s = std::sin(a);
          if (s == 0.0) domain_fail("cot pole", t);
          r = std::cos(a) / s;
          break;
        }
        case Op::Exp:
          r = std::exp(a);
          break;
        case Op::Ln:
          if (!(a > 0.0)) domain_fail("ln of nonpositive argument", t);
          r = std::log(a);
          break;
        case Op::Sinh:
          r = std::sinh(a);
          break;
        case Op::Cosh:
          r = std::cosh(a);
          break;
        case Op::Tanh:
          r = std::tanh(a);
          break;
        case Op::Abs:
          r = std::abs(a);
          break;
        default:  // Sqrt
          if (a < 0.0) domain_fail("sqrt of negative argument", t);
          r = std::sqrt(a);
          break;
      }
    }
    if (!std::isfinite(r)) domain_fail("non-finite intermediate value", t);
    stack[sp++] = r;
  }
  return stack[0];
}

}  // namespace disconj
