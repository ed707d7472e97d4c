#pragma once

// Coefficient expressions in one real variable `t`.
//
// Text grammar (conventional infix):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          -- right associative
//   primary := number | 't' | 'pi' | name | func '(' args ')' | '(' expr ')'
// Implicit multiplication is rejected. Any other bare identifier is a named
// parameter, bound at evaluation time through a ParamMap.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace disconj {

using ParamMap = std::map<std::string, double, std::less<>>;

enum class Op {
  Const,
  Var,
  Param,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Tan,
  Cot,
  Exp,
  Ln,
  Sinh,
  Cosh,
  Tanh,
  Abs,
  Sqrt,
  Min,
  Max,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // Const
  std::string name;    // Param
  NodePtr lhs;         // unary argument or left operand
  NodePtr rhs;         // right operand of binary nodes
};

[[nodiscard]] bool is_binary(Op op) noexcept;
[[nodiscard]] bool is_function(Op op) noexcept;
[[nodiscard]] std::string_view op_name(Op op) noexcept;

class CompiledExpr;

/// Immutable expression tree; copies share structure.
class CoeffExpr {
 public:
  CoeffExpr();  // constant 0
  explicit CoeffExpr(NodePtr root);

  static CoeffExpr parse(std::string_view src);
  static CoeffExpr constant(double v);
  static CoeffExpr variable();
  static CoeffExpr parameter(std::string name);

  [[nodiscard]] const Node& root() const noexcept { return *root_; }
  [[nodiscard]] const NodePtr& root_ptr() const noexcept { return root_; }

  /// Evaluates at `t`; throws DomainError on a singularity or an unbound
  /// parameter. For repeated evaluation prefer `compile`.
  [[nodiscard]] double eval(double t, const ParamMap& params = {}) const;

  /// Exact symbolic d/dt. Throws NonDifferentiableError if an abs/min/max node
  /// depends on t.
  [[nodiscard]] CoeffExpr differentiate() const;

  /// Canonical, fully parenthesized text; parse(to_string()) reproduces the tree.
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] bool depends_on_t() const;
  [[nodiscard]] std::set<std::string> parameters() const;

  /// Replaces every occurrence of t by `replacement`.
  [[nodiscard]] CoeffExpr substitute_t(const CoeffExpr& replacement) const;
  /// Replaces bound parameters by constants (unbound ones are kept).
  [[nodiscard]] CoeffExpr bind(const ParamMap& params) const;

  [[nodiscard]] bool structurally_equal(const CoeffExpr& other) const;

  /// Lowers the tree to a flat stack program with parameters resolved.
  [[nodiscard]] CompiledExpr compile(const ParamMap& params = {}) const;

  friend CoeffExpr operator+(const CoeffExpr& a, const CoeffExpr& b);
  friend CoeffExpr operator-(const CoeffExpr& a, const CoeffExpr& b);
  friend CoeffExpr operator*(const CoeffExpr& a, const CoeffExpr& b);
  friend CoeffExpr operator/(const CoeffExpr& a, const CoeffExpr& b);
  friend CoeffExpr operator-(const CoeffExpr& a);

 private:
  NodePtr root_;
};

[[nodiscard]] CoeffExpr pow(const CoeffExpr& base, const CoeffExpr& exponent);
[[nodiscard]] CoeffExpr apply(Op function, const CoeffExpr& arg);

/// Stack-machine form of an expression with parameters already bound.
/// Evaluation is reentrant.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  [[nodiscard]] double operator()(double t) const;
  /// True when the program does not read t.
  [[nodiscard]] bool is_constant() const noexcept { return constant_; }

 private:
  friend class CoeffExpr;

  struct Instr {
    Op op;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  bool constant_ = true;
};

}  // namespace disconj
