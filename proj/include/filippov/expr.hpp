#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "filippov/errors.hpp"
#include "filippov/geometry.hpp"

namespace filippov {

enum class NodeKind : std::uint8_t {
  Literal,   // value
  Variable,  // x1..xm, payload index is 0-based
  Time,      // t
  Binary,    // +, -, *, /
  Pow,       // integer exponent, payload exponent
  Negate,
  Call1,  // sin cos exp log abs sqrt tanh
  Call2,  // min max
};

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div };
enum class Func1 : std::uint8_t { Sin, Cos, Exp, Log, Abs, Sqrt, Tanh };
enum class Func2 : std::uint8_t { Min, Max };

struct ExprNode {
  NodeKind kind;
  union {
    double value;    // Literal
    int var_index;   // Variable
    int exponent;    // Pow
    BinaryOp op;     // Binary
    Func1 f1;        // Call1
    Func2 f2;        // Call2
  };
  std::int32_t lhs = -1;
  std::int32_t rhs = -1;
};

/// Evaluation argument: spatial point plus time.
struct EvalPoint {
  Vec x;
  double t = 0.0;
};

/// Immutable expression tree over x1..xm and t.  Nodes live in an arena in
/// topological order (children precede parents), root is the last node.
///
/// Grammar, tightest first: function application, ^ (integer exponent,
/// non-associative), unary minus, * /, + -.  No implicit multiplication.
class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& text, int dim);

  static Expr constant(double value, int dim);
  static Expr variable(int index, int dim);  // 0-based
  static Expr time(int dim);

  double evaluate(const EvalPoint& p) const;

  /// Structural forward-mode derivative w.r.t. x, length dim().
  /// Throws NondifferentiableError on a kink of abs/min/max (tol 1e-12).
  Vec gradient(const EvalPoint& p) const;

  std::string to_string() const;

  int dim() const { return dim_; }
  bool empty() const { return nodes_.empty(); }
  bool depends_on_time() const;
  bool depends_on_x() const;
  bool has_kink_funcs() const;  // contains abs/min/max anywhere

  /// True when no variable or time node occurs; *value receives the folded
  /// constant when non-null.
  bool is_constant(double* value = nullptr) const;

  const std::vector<ExprNode>& nodes() const { return nodes_; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr squared() const;

  /// Replace t by a literal.
  Expr with_time(double t) const;

  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  friend class ExprParser;
  static Expr make_binary(const Expr& a, const Expr& b, BinaryOp op);
  std::int32_t push(ExprNode n);
  std::int32_t append_offset(const Expr& other);  // arena merge

  std::vector<ExprNode> nodes_;
  int dim_ = 0;
};

bool structurally_equal(const Expr& a, const Expr& b);

/// Sum of squared componentwise differences ‖g(x) - y‖².
Expr squared_distance(const std::vector<Expr>& g, const Vec& y);

}  // namespace filippov
