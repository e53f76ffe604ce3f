#pragma once

// Coefficient expression language: parser, canonical printer, evaluator.
//
// Grammar (see docs/expression_grammar.md):
//   expr    := sum
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?           (right associative)
//   primary := number | 'pi' | 'x'<k> | call | '(' expr ')'
//   call    := name '(' args ')'
//   cond    := sum ('<' | '<=' | '>' | '>=' | '==' | '!=') sum   (indicator only)

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlfk {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind {
  constant,
  coordinate,
  norm,
  negate,
  add,
  subtract,
  multiply,
  divide,
  power,
  call,
  compare,
};

enum class Function { abs, sqrt, exp, log, sin, cos, min, max, indicator };

enum class Comparison { less, less_equal, greater, greater_equal, equal, not_equal };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// One node of the expression tree. Nodes are immutable once built.
struct ExprNode {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;  // constant
  int index = 0;       // coordinate (0-based), Function or Comparison enumerator
  std::vector<ExprPtr> children;
};

bool operator==(const ExprNode& lhs, const ExprNode& rhs);

/// A parsed, compiled scalar field over R^d.
class Expr {
 public:
  Expr();  // the constant 0 in dimension 1
  Expr(ExprPtr root, int dim);

  int dim() const noexcept { return dim_; }
  const ExprNode& root() const noexcept { return *root_; }
  const ExprPtr& root_ptr() const noexcept { return root_; }

  /// True when the field does not depend on x (after folding).
  bool is_constant() const noexcept { return constant_; }
  double constant_value() const noexcept { return constant_value_; }

  /// Throws EvalError on division by zero, log/sqrt outside the domain, or a
  /// non-finite intermediate.
  double operator()(std::span<const double> x) const;

  /// Canonical fully parenthesized form; parse(to_string()) reproduces the tree.
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.dim_ == b.dim_ && *a.root_ == *b.root_;
  }

 private:
  struct Instr {
    NodeKind kind;
    int index;
    double value;
  };

  void compile(const ExprNode& node);

  ExprPtr root_;
  int dim_ = 1;
  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
  bool constant_ = false;
  double constant_value_ = 0.0;
};

Expr parse_expression(std::string_view text, int dim);

inline double eval_field(const Expr& field, std::span<const double> x) { return field(x); }

Expr constant_field(double value, int dim);

std::string to_string(const ExprNode& node);

}  // namespace nlfk
