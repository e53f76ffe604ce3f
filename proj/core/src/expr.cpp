#include "nlfk/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

namespace nlfk {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function fn;
  int arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"abs", Function::abs, 1},
    {"sqrt", Function::sqrt, 1},
    {"exp", Function::exp, 1},
    {"log", Function::log, 1},
    {"sin", Function::sin, 1},
    {"cos", Function::cos, 1},
    {"min", Function::min, 2},
    {"max", Function::max, 2},
    {"indicator", Function::indicator, 1},
}};

constexpr std::array<std::string_view, 6> kComparisonText{"<", "<=", ">", ">=", "==", "!="};

std::string_view function_name(int index) { return kFunctions[static_cast<std::size_t>(index)].name; }

ExprPtr make_node(NodeKind kind, std::vector<ExprPtr> children = {}, double value = 0.0,
                  int index = 0) {
  auto node = std::make_shared<ExprNode>();
  node->kind = kind;
  node->value = value;
  node->index = index;
  node->children = std::move(children);
  return node;
}

// ---------------------------------------------------------------------------
// Lexer / recursive-descent parser

enum class Tok { number, ident, op, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t offset;
  double number = 0.0;
};

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) { advance(); }

  ExprPtr parse() {
    if (tok_.kind == Tok::end) throw ParseError(0, "empty expression");
    auto root = parse_sum();
    if (tok_.kind != Tok::end) throw ParseError(tok_.offset, "unexpected '" + std::string(tok_.text) + "'");
    return root;
  }

 private:
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void advance() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) {
      tok_ = {Tok::end, {}, start};
      return;
    }
    const char c = text_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
      while (pos_ < text_.size() && (is_digit(text_[pos_]) || text_[pos_] == '.')) ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
        if (p < text_.size() && is_digit(text_[p])) {
          pos_ = p;
          while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
      }
      double value = 0.0;
      const char* first = text_.data() + start;
      const char* last = text_.data() + pos_;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError(start, "malformed number '" + std::string(text_.substr(start, pos_ - start)) + "'");
      tok_ = {Tok::number, text_.substr(start, pos_ - start), start, value};
      return;
    }
    if (is_ident_start(c)) {
      while (pos_ < text_.size() && (is_ident_start(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
      tok_ = {Tok::ident, text_.substr(start, pos_ - start), start};
      return;
    }
    ++pos_;
    switch (c) {
      case '(': tok_ = {Tok::lparen, text_.substr(start, 1), start}; return;
      case ')': tok_ = {Tok::rparen, text_.substr(start, 1), start}; return;
      case ',': tok_ = {Tok::comma, text_.substr(start, 1), start}; return;
      case '+': case '-': case '*': case '/': case '^':
        tok_ = {Tok::op, text_.substr(start, 1), start};
        return;
      case '<': case '>': case '=': case '!':
        if (pos_ < text_.size() && text_[pos_] == '=') ++pos_;
        tok_ = {Tok::op, text_.substr(start, pos_ - start), start};
        if (tok_.text == "=" || tok_.text == "!") throw ParseError(start, "unknown operator '" + std::string(tok_.text) + "'");
        return;
      default:
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
  }

  bool at_op(std::string_view op) const { return tok_.kind == Tok::op && tok_.text == op; }

  void expect(Tok kind, std::string_view what) {
    if (tok_.kind != kind) {
      const std::string found = tok_.kind == Tok::end ? "end of input" : "'" + std::string(tok_.text) + "'";
      throw ParseError(tok_.offset, "expected " + std::string(what) + ", found " + found);
    }
    advance();
  }

  ExprPtr parse_sum() {
    auto lhs = parse_product();
    while (at_op("+") || at_op("-")) {
      const NodeKind kind = tok_.text == "+" ? NodeKind::add : NodeKind::subtract;
      advance();
      lhs = make_node(kind, {lhs, parse_product()});
    }
    return lhs;
  }

  ExprPtr parse_product() {
    auto lhs = parse_unary();
    while (at_op("*") || at_op("/")) {
      const NodeKind kind = tok_.text == "*" ? NodeKind::multiply : NodeKind::divide;
      advance();
      lhs = make_node(kind, {lhs, parse_unary()});
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_op("-")) {
      advance();
      return make_node(NodeKind::negate, {parse_unary()});
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_primary();
    if (at_op("^")) {
      advance();
      return make_node(NodeKind::power, {base, parse_unary()});
    }
    return base;
  }

  ExprPtr parse_condition() {
    auto lhs = parse_sum();
    if (tok_.kind != Tok::op) throw ParseError(tok_.offset, "indicator expects a comparison");
    int cmp = -1;
    for (std::size_t i = 0; i < kComparisonText.size(); ++i)
      if (tok_.text == kComparisonText[i]) cmp = static_cast<int>(i);
    if (cmp < 0) throw ParseError(tok_.offset, "indicator expects a comparison");
    advance();
    auto rhs = parse_sum();
    return make_node(NodeKind::compare, {lhs, rhs}, 0.0, cmp);
  }

  ExprPtr parse_primary() {
    const Token tok = tok_;
    switch (tok.kind) {
      case Tok::number:
        advance();
        return make_node(NodeKind::constant, {}, tok.number);
      case Tok::lparen: {
        advance();
        auto inner = parse_sum();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident:
        return parse_identifier();
      case Tok::end:
        throw ParseError(tok.offset, "unexpected end of input");
      default:
        throw ParseError(tok.offset, "unexpected '" + std::string(tok.text) + "'");
    }
  }

  ExprPtr parse_identifier() {
    const Token tok = tok_;
    advance();
    const std::string_view name = tok.text;
    if (tok_.kind != Tok::lparen) {
      if (name == "pi") return make_node(NodeKind::constant, {}, std::numbers::pi);
      if (name.size() >= 2 && name[0] == 'x') {
        int k = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
        if (ec == std::errc() && ptr == name.data() + name.size() && name[1] != '0') {
          if (k < 1 || k > dim_)
            throw ParseError(tok.offset, "coordinate '" + std::string(name) + "' exceeds dimension " +
                                             std::to_string(dim_));
          return make_node(NodeKind::coordinate, {}, 0.0, k - 1);
        }
      }
      throw ParseError(tok.offset, "unknown identifier '" + std::string(name) + "'");
    }

    // Function call.
    advance();
    if (name == "norm") {
      if (tok_.kind != Tok::ident || tok_.text != "x")
        throw ParseError(tok_.offset, "norm takes the point 'x' as its only argument");
      advance();
      expect(Tok::rparen, "')'");
      return make_node(NodeKind::norm);
    }
    const FunctionInfo* info = nullptr;
    for (const auto& f : kFunctions)
      if (f.name == name) info = &f;
    if (info == nullptr) throw ParseError(tok.offset, "unknown function '" + std::string(name) + "'");

    std::vector<ExprPtr> args;
    if (info->fn == Function::indicator) {
      args.push_back(parse_condition());
    } else if (tok_.kind != Tok::rparen) {
      args.push_back(parse_sum());
      while (tok_.kind == Tok::comma) {
        advance();
        args.push_back(parse_sum());
      }
    }
    if (tok_.kind != Tok::rparen && info->fn == Function::indicator)
      throw ParseError(tok_.offset, "arity mismatch: indicator takes 1 argument");
    expect(Tok::rparen, "')'");
    if (static_cast<int>(args.size()) != info->arity)
      throw ParseError(tok.offset, "arity mismatch: " + std::string(name) + " takes " +
                                       std::to_string(info->arity) + " argument(s), got " +
                                       std::to_string(args.size()));
    return make_node(NodeKind::call, std::move(args), 0.0, static_cast<int>(info->fn));
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
  Token tok_{Tok::end, {}, 0};
};

// ---------------------------------------------------------------------------
// Evaluation kernels shared by the folder and the stack machine

double checked(double v, const char* op) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + op);
  return v;
}

double apply_binary(NodeKind kind, double a, double b) {
  switch (kind) {
    case NodeKind::add: return checked(a + b, "+");
    case NodeKind::subtract: return checked(a - b, "-");
    case NodeKind::multiply: return checked(a * b, "*");
    case NodeKind::divide:
      if (b == 0.0) throw EvalError("division by zero");
      return checked(a / b, "/");
    case NodeKind::power: return checked(std::pow(a, b), "^");
    default: throw EvalError("internal: not a binary operator");
  }
}

double apply_call(Function fn, double a, double b) {
  switch (fn) {
    case Function::abs: return std::fabs(a);
    case Function::sqrt:
      if (a < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(a);
    case Function::exp: return checked(std::exp(a), "exp");
    case Function::log:
      if (a <= 0.0) throw EvalError("log of non-positive value");
      return std::log(a);
    case Function::sin: return std::sin(a);
    case Function::cos: return std::cos(a);
    case Function::min: return std::min(a, b);
    case Function::max: return std::max(a, b);
    case Function::indicator: return a;
  }
  return a;
}

double apply_compare(Comparison cmp, double a, double b) {
  bool r = false;
  switch (cmp) {
    case Comparison::less: r = a < b; break;
    case Comparison::less_equal: r = a <= b; break;
    case Comparison::greater: r = a > b; break;
    case Comparison::greater_equal: r = a >= b; break;
    case Comparison::equal: r = a == b; break;
    case Comparison::not_equal: r = a != b; break;
  }
  return r ? 1.0 : 0.0;
}

bool depends_on_x(const ExprNode& node) {
  if (node.kind == NodeKind::coordinate || node.kind == NodeKind::norm) return true;
  for (const auto& c : node.children)
    if (depends_on_x(*c)) return true;
  return false;
}

double eval_tree(const ExprNode& node) {
  switch (node.kind) {
    case NodeKind::constant: return node.value;
    case NodeKind::negate: return -eval_tree(*node.children[0]);
    case NodeKind::call: {
      const double a = eval_tree(*node.children[0]);
      const double b = node.children.size() > 1 ? eval_tree(*node.children[1]) : 0.0;
      return apply_call(static_cast<Function>(node.index), a, b);
    }
    case NodeKind::compare:
      return apply_compare(static_cast<Comparison>(node.index), eval_tree(*node.children[0]),
                           eval_tree(*node.children[1]));
    case NodeKind::coordinate:
    case NodeKind::norm: throw EvalError("internal: folding a coordinate");
    default: return apply_binary(node.kind, eval_tree(*node.children[0]), eval_tree(*node.children[1]));
  }
}

void format_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void print_node(std::string& out, const ExprNode& node) {
  switch (node.kind) {
    case NodeKind::constant:
      if (node.value < 0.0 || std::signbit(node.value)) {
        out += "(-";
        format_double(out, -node.value);
        out += ")";
      } else {
        format_double(out, node.value);
      }
      return;
    case NodeKind::coordinate:
      out += "x" + std::to_string(node.index + 1);
      return;
    case NodeKind::norm: out += "norm(x)"; return;
    case NodeKind::negate:
      out += "(-";
      print_node(out, *node.children[0]);
      out += ")";
      return;
    case NodeKind::call:
      out += function_name(node.index);
      out += "(";
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ", ";
        print_node(out, *node.children[i]);
      }
      out += ")";
      return;
    case NodeKind::compare:
      print_node(out, *node.children[0]);
      out += " ";
      out += kComparisonText[static_cast<std::size_t>(node.index)];
      out += " ";
      print_node(out, *node.children[1]);
      return;
    default: {
      const char* op = node.kind == NodeKind::add        ? " + "
                       : node.kind == NodeKind::subtract ? " - "
                       : node.kind == NodeKind::multiply ? " * "
                       : node.kind == NodeKind::divide   ? " / "
                                                         : " ^ ";
      out += "(";
      print_node(out, *node.children[0]);
      out += op;
      print_node(out, *node.children[1]);
      out += ")";
    }
  }
}

}  // namespace

bool operator==(const ExprNode& lhs, const ExprNode& rhs) {
  if (lhs.kind != rhs.kind || lhs.index != rhs.index || lhs.children.size() != rhs.children.size())
    return false;
  if (lhs.kind == NodeKind::constant && lhs.value != rhs.value) return false;
  for (std::size_t i = 0; i < lhs.children.size(); ++i)
    if (!(*lhs.children[i] == *rhs.children[i])) return false;
  return true;
}

Expr::Expr() : Expr(make_node(NodeKind::constant), 1) {}

Expr::Expr(ExprPtr root, int dim) : root_(std::move(root)), dim_(dim) {
  if (!root_) throw std::invalid_argument("null expression");
  if (dim_ < 1) throw std::invalid_argument("expression dimension must be >= 1");
  compile(*root_);
  std::size_t depth = 0;
  for (const auto& in : program_) {
    switch (in.kind) {
      case NodeKind::constant:
      case NodeKind::coordinate:
      case NodeKind::norm: ++depth; break;
      case NodeKind::negate: break;
      case NodeKind::call:
        if (kFunctions[static_cast<std::size_t>(in.index)].arity == 2) --depth;
        break;
      default: --depth;
    }
    max_stack_ = std::max(max_stack_, depth);
  }
  if (program_.size() == 1 && program_[0].kind == NodeKind::constant) {
    constant_ = true;
    constant_value_ = program_[0].value;
  }
}

void Expr::compile(const ExprNode& node) {
  if (!depends_on_x(node) && node.kind != NodeKind::constant) {
    try {
      program_.push_back({NodeKind::constant, 0, eval_tree(node)});
      return;
    } catch (const EvalError&) {
      // leave unfolded; the error surfaces at evaluation time
    }
  }
  for (const auto& c : node.children) compile(*c);
  program_.push_back({node.kind, node.index, node.value});
}

double Expr::operator()(std::span<const double> x) const {
  if (constant_) return constant_value_;
  std::array<double, 16> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_stack_ > small.size()) {
    large.resize(max_stack_);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const auto& in : program_) {
    switch (in.kind) {
      case NodeKind::constant: stack[top++] = in.value; break;
      case NodeKind::coordinate:
        if (static_cast<std::size_t>(in.index) >= x.size()) throw EvalError("point has too few coordinates");
        stack[top++] = x[static_cast<std::size_t>(in.index)];
        break;
      case NodeKind::norm: {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        stack[top++] = std::sqrt(s);
        break;
      }
      case NodeKind::negate: stack[top - 1] = -stack[top - 1]; break;
      case NodeKind::call: {
        const auto fn = static_cast<Function>(in.index);
        if (kFunctions[static_cast<std::size_t>(in.index)].arity == 2) {
          --top;
          stack[top - 1] = apply_call(fn, stack[top - 1], stack[top]);
        } else {
          stack[top - 1] = apply_call(fn, stack[top - 1], 0.0);
        }
        break;
      }
      case NodeKind::compare:
        --top;
        stack[top - 1] = apply_compare(static_cast<Comparison>(in.index), stack[top - 1], stack[top]);
        break;
      default:
        --top;
        stack[top - 1] = apply_binary(in.kind, stack[top - 1], stack[top]);
    }
  }
  return stack[0];
}

std::string Expr::to_string() const { return nlfk::to_string(*root_); }

std::string to_string(const ExprNode& node) {
  std::string out;
  print_node(out, node);
  return out;
}

Expr parse_expression(std::string_view text, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Parser parser(text, dim);
  return Expr(parser.parse(), dim);
}

Expr constant_field(double value, int dim) {
  if (!std::isfinite(value)) throw std::invalid_argument("constant field must be finite");
  if (value < 0.0) return Expr(make_node(NodeKind::negate, {make_node(NodeKind::constant, {}, -value)}), dim);
  return Expr(make_node(NodeKind::constant, {}, value), dim);
}

}  // namespace nlfk
