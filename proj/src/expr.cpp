#include "filippov/expr.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace filippov {

namespace {

constexpr double kKinkTol = 1e-12;

const char* func1_name(Func1 f) {
  switch (f) {
    case Func1::Sin: return "sin";
    case Func1::Cos: return "cos";
    case Func1::Exp: return "exp";
    case Func1::Log: return "log";
    case Func1::Abs: return "abs";
    case Func1::Sqrt: return "sqrt";
    case Func1::Tanh: return "tanh";
  }
  return "?";
}

const char* func2_name(Func2 f) { return f == Func2::Min ? "min" : "max"; }

double int_pow(double base, int e) {
  if (e == 0) return 1.0;
  bool inv = e < 0;
  unsigned n = inv ? static_cast<unsigned>(-(long long)e) : static_cast<unsigned>(e);
  double r = 1.0, b = base;
  while (n) {
    if (n & 1u) r *= b;
    b *= b;
    n >>= 1;
  }
  return inv ? 1.0 / r : r;
}

}  // namespace

std::int32_t Expr::push(ExprNode n) {
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size()) - 1;
}

std::int32_t Expr::append_offset(const Expr& other) {
  const auto off = static_cast<std::int32_t>(nodes_.size());
  for (ExprNode n : other.nodes_) {
    if (n.lhs >= 0) n.lhs += off;
    if (n.rhs >= 0) n.rhs += off;
    nodes_.push_back(n);
  }
  return off + static_cast<std::int32_t>(other.nodes_.size()) - 1;
}

Expr Expr::constant(double value, int dim) {
  Expr e;
  e.dim_ = dim;
  ExprNode n{};
  n.kind = NodeKind::Literal;
  n.value = value;
  e.push(n);
  return e;
}

Expr Expr::variable(int index, int dim) {
  assert(index >= 0 && index < dim);
  Expr e;
  e.dim_ = dim;
  ExprNode n{};
  n.kind = NodeKind::Variable;
  n.var_index = index;
  e.push(n);
  return e;
}

Expr Expr::time(int dim) {
  Expr e;
  e.dim_ = dim;
  ExprNode n{};
  n.kind = NodeKind::Time;
  e.push(n);
  return e;
}

Expr Expr::make_binary(const Expr& a, const Expr& b, BinaryOp op) {
  assert(a.dim() == b.dim());
  Expr e = a;
  std::int32_t ra = static_cast<std::int32_t>(a.nodes().size()) - 1;
  std::int32_t rb = e.append_offset(b);
  ExprNode n{};
  n.kind = NodeKind::Binary;
  n.op = op;
  n.lhs = ra;
  n.rhs = rb;
  e.push(n);
  return e;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make_binary(a, b, BinaryOp::Add); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make_binary(a, b, BinaryOp::Sub); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make_binary(a, b, BinaryOp::Mul); }

Expr operator-(const Expr& a) {
  Expr e = a;
  ExprNode n{};
  n.kind = NodeKind::Negate;
  n.lhs = static_cast<std::int32_t>(e.nodes_.size()) - 1;
  e.push(n);
  return e;
}

Expr Expr::squared() const {
  Expr e = *this;
  ExprNode n{};
  n.kind = NodeKind::Pow;
  n.exponent = 2;
  n.lhs = static_cast<std::int32_t>(e.nodes_.size()) - 1;
  e.push(n);
  return e;
}

Expr Expr::with_time(double t) const {
  Expr e = *this;
  for (ExprNode& n : e.nodes_) {
    if (n.kind == NodeKind::Time) {
      n.kind = NodeKind::Literal;
      n.value = t;
    }
  }
  return e;
}

Expr squared_distance(const std::vector<Expr>& g, const Vec& y) {
  assert(!g.empty() && g.size() == y.size());
  const int dim = g[0].dim();
  Expr total = (g[0] - Expr::constant(y[0], dim)).squared();
  for (std::size_t j = 1; j < g.size(); ++j)
    total = total + (g[j] - Expr::constant(y[j], dim)).squared();
  return total;
}

// ---------------------------------------------------------------------------
// Parsing

class ExprParser {
 public:
  ExprParser(const std::string& text, int dim) : text_(text), dim_(dim) {
    out_.dim_ = dim;
  }

  Expr run() {
    if (text_.find_first_not_of(" \t\r\n") == std::string::npos)
      throw ParseError("empty expression", 0);
    std::int32_t root = parse_expression();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected input at position " + std::to_string(pos_) +
                           ", expected end of expression or operator",
                       pos_);
    (void)root;
    return std::move(out_);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c))
      throw ParseError(std::string("syntax error at position ") + std::to_string(pos_) +
                           ": expected " + what,
                       pos_);
  }

  std::int32_t push_binary(std::int32_t l, std::int32_t r, BinaryOp op) {
    ExprNode n{};
    n.kind = NodeKind::Binary;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return out_.push(n);
  }

  std::int32_t parse_expression() {
    std::int32_t lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = push_binary(lhs, parse_term(), BinaryOp::Add);
      else if (accept('-'))
        lhs = push_binary(lhs, parse_term(), BinaryOp::Sub);
      else
        return lhs;
    }
  }

  std::int32_t parse_term() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = push_binary(lhs, parse_unary(), BinaryOp::Mul);
      else if (accept('/'))
        lhs = push_binary(lhs, parse_unary(), BinaryOp::Div);
      else
        return lhs;
    }
  }

  std::int32_t parse_unary() {
    if (accept('-')) {
      std::int32_t child = parse_unary();
      // Fold a negated literal so printing and reparsing round-trips.
      if (out_.nodes_[child].kind == NodeKind::Literal &&
          child == static_cast<std::int32_t>(out_.nodes_.size()) - 1) {
        out_.nodes_[child].value = -out_.nodes_[child].value;
        return child;
      }
      ExprNode n{};
      n.kind = NodeKind::Negate;
      n.lhs = child;
      return out_.push(n);
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t base = parse_atom();
    if (accept('^')) {
      skip_ws();
      int exponent = parse_int_exponent();
      ExprNode n{};
      n.kind = NodeKind::Pow;
      n.exponent = exponent;
      n.lhs = base;
      std::int32_t r = out_.push(n);
      if (peek('^'))
        throw ParseError("syntax error at position " + std::to_string(pos_) +
                             ": ^ is non-associative, parenthesize the base",
                         pos_);
      return r;
    }
    return base;
  }

  int parse_int_exponent() {
    std::size_t start = pos_;
    bool neg = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (digits == pos_)
      throw ParseError("syntax error at position " + std::to_string(start) +
                           ": expected integer exponent after ^",
                       start);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("syntax error at position " + std::to_string(pos_) +
                           ": exponent must be an integer",
                       pos_);
    int value = 0;
    auto res = std::from_chars(text_.data() + digits, text_.data() + pos_, value);
    if (res.ec != std::errc{})
      throw ParseError("integer exponent out of range at position " + std::to_string(start), start);
    return neg ? -value : value;
  }

  std::int32_t parse_atom() {
    skip_ws();
    if (pos_ >= text_.size())
      throw ParseError("syntax error at position " + std::to_string(pos_) +
                           ": expected number, variable, function or (",
                       pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      std::int32_t inner = parse_expression();
      expect(')', ")");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    throw ParseError("syntax error at position " + std::to_string(pos_) +
                         ": expected number, variable, function or (",
                     pos_);
  }

  std::int32_t parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = mark;  // "2e" is "2" followed by identifier start; reject below
      } else {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      throw ParseError("malformed number at position " + std::to_string(start), start);
    ExprNode n{};
    n.kind = NodeKind::Literal;
    n.value = value;
    return out_.push(n);
  }

  std::int32_t parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);

    if (name == "t") {
      ExprNode n{};
      n.kind = NodeKind::Time;
      return out_.push(n);
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int idx = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec != std::errc{})
        throw ParseError("malformed variable '" + name + "' at position " + std::to_string(start),
                         start);
      if (idx < 1 || idx > dim_)
        throw ParseError("variable " + name + " out of range at position " +
                             std::to_string(start) + " (dimension is " + std::to_string(dim_) + ")",
                         start);
      ExprNode n{};
      n.kind = NodeKind::Variable;
      n.var_index = idx - 1;
      return out_.push(n);
    }

    static const struct { const char* name; Func1 f; } kFuncs1[] = {
        {"sin", Func1::Sin}, {"cos", Func1::Cos},   {"exp", Func1::Exp}, {"log", Func1::Log},
        {"abs", Func1::Abs}, {"sqrt", Func1::Sqrt}, {"tanh", Func1::Tanh}};
    for (const auto& f : kFuncs1) {
      if (name == f.name) {
        expect('(', "( after function name");
        std::int32_t arg = parse_expression();
        expect(')', ")");
        ExprNode n{};
        n.kind = NodeKind::Call1;
        n.f1 = f.f;
        n.lhs = arg;
        return out_.push(n);
      }
    }
    if (name == "min" || name == "max") {
      expect('(', "( after function name");
      std::int32_t a = parse_expression();
      expect(',', ", between function arguments");
      std::int32_t b = parse_expression();
      expect(')', ")");
      ExprNode n{};
      n.kind = NodeKind::Call2;
      n.f2 = name == "min" ? Func2::Min : Func2::Max;
      n.lhs = a;
      n.rhs = b;
      return out_.push(n);
    }
    throw ParseError("unknown identifier '" + name + "' at position " + std::to_string(start),
                     start);
  }

  const std::string& text_;
  int dim_;
  std::size_t pos_ = 0;
  Expr out_;
};

Expr Expr::parse(const std::string& text, int dim) {
  if (dim < 0) throw ParseError("negative dimension", 0);
  return ExprParser(text, dim).run();
}

// ---------------------------------------------------------------------------
// Evaluation

double Expr::evaluate(const EvalPoint& p) const {
  if (static_cast<int>(p.x.size()) != dim_)
    throw DomainError("evaluation point has dimension " + std::to_string(p.x.size()) +
                      ", expression expects " + std::to_string(dim_));
  for (double v : p.x)
    if (!std::isfinite(v)) throw DomainError("non-finite coordinate in evaluation point");
  if (!std::isfinite(p.t)) throw DomainError("non-finite time in evaluation point");

  thread_local std::vector<double> vals;
  vals.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::Literal: vals[i] = n.value; break;
      case NodeKind::Variable: vals[i] = p.x[n.var_index]; break;
      case NodeKind::Time: vals[i] = p.t; break;
      case NodeKind::Negate: vals[i] = -vals[n.lhs]; break;
      case NodeKind::Pow: {
        double b = vals[n.lhs];
        if (b == 0.0 && n.exponent < 0) throw DomainError("zero raised to a negative power");
        vals[i] = int_pow(b, n.exponent);
        break;
      }
      case NodeKind::Binary: {
        double a = vals[n.lhs], b = vals[n.rhs];
        switch (n.op) {
          case BinaryOp::Add: vals[i] = a + b; break;
          case BinaryOp::Sub: vals[i] = a - b; break;
          case BinaryOp::Mul: vals[i] = a * b; break;
          case BinaryOp::Div:
            if (b == 0.0) throw DomainError("division by zero");
            vals[i] = a / b;
            break;
        }
        break;
      }
      case NodeKind::Call1: {
        double a = vals[n.lhs];
        switch (n.f1) {
          case Func1::Sin: vals[i] = std::sin(a); break;
          case Func1::Cos: vals[i] = std::cos(a); break;
          case Func1::Exp: vals[i] = std::exp(a); break;
          case Func1::Log:
            if (a <= 0.0) throw DomainError("log of nonpositive value");
            vals[i] = std::log(a);
            break;
          case Func1::Abs: vals[i] = std::fabs(a); break;
          case Func1::Sqrt:
            if (a < 0.0) throw DomainError("sqrt of negative value");
            vals[i] = std::sqrt(a);
            break;
          case Func1::Tanh: vals[i] = std::tanh(a); break;
        }
        break;
      }
      case NodeKind::Call2: {
        double a = vals[n.lhs], b = vals[n.rhs];
        vals[i] = n.f2 == Func2::Min ? std::min(a, b) : std::max(a, b);
        break;
      }
    }
  }
  double r = vals.back();
  if (!std::isfinite(r)) throw DomainError("expression evaluated to a non-finite value");
  return r;
}

Vec Expr::gradient(const EvalPoint& p) const {
  if (static_cast<int>(p.x.size()) != dim_)
    throw DomainError("evaluation point has dimension " + std::to_string(p.x.size()) +
                      ", expression expects " + std::to_string(dim_));
  const std::size_t m = static_cast<std::size_t>(dim_);

  thread_local std::vector<double> vals;
  thread_local std::vector<double> ders;  // nodes * m, row-major
  vals.resize(nodes_.size());
  ders.assign(nodes_.size() * m, 0.0);

  auto d = [&](std::size_t node, std::size_t k) -> double& { return ders[node * m + k]; };

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::Literal: vals[i] = n.value; break;
      case NodeKind::Time: vals[i] = p.t; break;
      case NodeKind::Variable:
        vals[i] = p.x[n.var_index];
        d(i, n.var_index) = 1.0;
        break;
      case NodeKind::Negate:
        vals[i] = -vals[n.lhs];
        for (std::size_t k = 0; k < m; ++k) d(i, k) = -d(n.lhs, k);
        break;
      case NodeKind::Pow: {
        double b = vals[n.lhs];
        if (b == 0.0 && n.exponent < 0) throw DomainError("zero raised to a negative power");
        vals[i] = int_pow(b, n.exponent);
        double factor = n.exponent == 0 ? 0.0 : n.exponent * int_pow(b, n.exponent - 1);
        for (std::size_t k = 0; k < m; ++k) d(i, k) = factor * d(n.lhs, k);
        break;
      }
      case NodeKind::Binary: {
        double a = vals[n.lhs], b = vals[n.rhs];
        switch (n.op) {
          case BinaryOp::Add:
            vals[i] = a + b;
            for (std::size_t k = 0; k < m; ++k) d(i, k) = d(n.lhs, k) + d(n.rhs, k);
            break;
          case BinaryOp::Sub:
            vals[i] = a - b;
            for (std::size_t k = 0; k < m; ++k) d(i, k) = d(n.lhs, k) - d(n.rhs, k);
            break;
          case BinaryOp::Mul:
            vals[i] = a * b;
            for (std::size_t k = 0; k < m; ++k) d(i, k) = d(n.lhs, k) * b + a * d(n.rhs, k);
            break;
          case BinaryOp::Div:
            if (b == 0.0) throw DomainError("division by zero");
            vals[i] = a / b;
            for (std::size_t k = 0; k < m; ++k)
              d(i, k) = (d(n.lhs, k) * b - a * d(n.rhs, k)) / (b * b);
            break;
        }
        break;
      }
      case NodeKind::Call1: {
        double a = vals[n.lhs];
        double val = 0.0, slope = 0.0;
        switch (n.f1) {
          case Func1::Sin: val = std::sin(a), slope = std::cos(a); break;
          case Func1::Cos: val = std::cos(a), slope = -std::sin(a); break;
          case Func1::Exp: val = std::exp(a), slope = val; break;
          case Func1::Log:
            if (a <= 0.0) throw DomainError("log of nonpositive value");
            val = std::log(a), slope = 1.0 / a;
            break;
          case Func1::Abs:
            if (std::fabs(a) <= kKinkTol)
              throw NondifferentiableError("abs evaluated at a kink (|arg| <= 1e-12)");
            val = std::fabs(a), slope = a > 0 ? 1.0 : -1.0;
            break;
          case Func1::Sqrt:
            if (a < 0.0) throw DomainError("sqrt of negative value");
            if (a <= kKinkTol) throw NondifferentiableError("sqrt derivative at zero");
            val = std::sqrt(a), slope = 0.5 / val;
            break;
          case Func1::Tanh: {
            val = std::tanh(a);
            slope = 1.0 - val * val;
            break;
          }
        }
        vals[i] = val;
        for (std::size_t k = 0; k < m; ++k) d(i, k) = slope * d(n.lhs, k);
        break;
      }
      case NodeKind::Call2: {
        double a = vals[n.lhs], b = vals[n.rhs];
        if (std::fabs(a - b) <= kKinkTol)
          throw NondifferentiableError(std::string(func2_name(n.f2)) +
                                       " evaluated at a kink (|a-b| <= 1e-12)");
        bool take_lhs = (n.f2 == Func2::Min) == (a < b);
        vals[i] = take_lhs ? a : b;
        std::int32_t src = take_lhs ? n.lhs : n.rhs;
        for (std::size_t k = 0; k < m; ++k) d(i, k) = d(src, k);
        break;
      }
    }
  }

  Vec g(m);
  const std::size_t root = nodes_.size() - 1;
  for (std::size_t k = 0; k < m; ++k) {
    g[k] = d(root, k);
    if (!std::isfinite(g[k])) throw DomainError("gradient evaluated to a non-finite value");
  }
  return g;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Higher binds tighter.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Binary: return (n.op == BinaryOp::Add || n.op == BinaryOp::Sub) ? 1 : 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

void print_node(const std::vector<ExprNode>& nodes, std::int32_t idx, std::string& out) {
  const ExprNode& n = nodes[idx];
  auto child = [&](std::int32_t c, bool needs_paren) {
    if (needs_paren) out += '(';
    print_node(nodes, c, out);
    if (needs_paren) out += ')';
  };
  switch (n.kind) {
    case NodeKind::Literal: {
      if (n.value < 0 || (n.value == 0 && std::signbit(n.value))) {
        out += format_double(n.value);  // reparse folds the sign back in
      } else {
        out += format_double(n.value);
      }
      break;
    }
    case NodeKind::Variable: out += "x" + std::to_string(n.var_index + 1); break;
    case NodeKind::Time: out += 't'; break;
    case NodeKind::Negate:
      out += '-';
      child(n.lhs, precedence(nodes[n.lhs]) < precedence(n));
      break;
    case NodeKind::Pow:
      child(n.lhs, precedence(nodes[n.lhs]) <= precedence(n));
      out += '^';
      out += std::to_string(n.exponent);
      break;
    case NodeKind::Binary: {
      const int prec = precedence(n);
      child(n.lhs, precedence(nodes[n.lhs]) < prec);
      switch (n.op) {
        case BinaryOp::Add: out += " + "; break;
        case BinaryOp::Sub: out += " - "; break;
        case BinaryOp::Mul: out += "*"; break;
        case BinaryOp::Div: out += "/"; break;
      }
      // Right child needs parens at equal precedence: -, / are left-associative.
      child(n.rhs, precedence(nodes[n.rhs]) <= prec);
      break;
    }
    case NodeKind::Call1:
      out += func1_name(n.f1);
      out += '(';
      print_node(nodes, n.lhs, out);
      out += ')';
      break;
    case NodeKind::Call2:
      out += func2_name(n.f2);
      out += '(';
      print_node(nodes, n.lhs, out);
      out += ", ";
      print_node(nodes, n.rhs, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string Expr::to_string() const {
  if (nodes_.empty()) return "";
  std::string out;
  print_node(nodes_, static_cast<std::int32_t>(nodes_.size()) - 1, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structure queries

bool Expr::depends_on_time() const {
  for (const ExprNode& n : nodes_)
    if (n.kind == NodeKind::Time) return true;
  return false;
}

bool Expr::depends_on_x() const {
  for (const ExprNode& n : nodes_)
    if (n.kind == NodeKind::Variable) return true;
  return false;
}

bool Expr::has_kink_funcs() const {
  for (const ExprNode& n : nodes_) {
    if (n.kind == NodeKind::Call1 && n.f1 == Func1::Abs) return true;
    if (n.kind == NodeKind::Call2) return true;
  }
  return false;
}

bool Expr::is_constant(double* value) const {
  if (nodes_.empty()) return false;
  if (depends_on_x() || depends_on_time()) return false;
  if (value) *value = evaluate({Vec(static_cast<std::size_t>(dim_), 0.0), 0.0});
  return true;
}

namespace {

bool nodes_equal(const std::vector<ExprNode>& an, std::int32_t ai,
                 const std::vector<ExprNode>& bn, std::int32_t bi) {
  const ExprNode& a = an[ai];
  const ExprNode& b = bn[bi];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Literal: return a.value == b.value;
    case NodeKind::Variable: return a.var_index == b.var_index;
    case NodeKind::Time: return true;
    case NodeKind::Negate: return nodes_equal(an, a.lhs, bn, b.lhs);
    case NodeKind::Pow:
      return a.exponent == b.exponent && nodes_equal(an, a.lhs, bn, b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && nodes_equal(an, a.lhs, bn, b.lhs) && nodes_equal(an, a.rhs, bn, b.rhs);
    case NodeKind::Call1: return a.f1 == b.f1 && nodes_equal(an, a.lhs, bn, b.lhs);
    case NodeKind::Call2:
      return a.f2 == b.f2 && nodes_equal(an, a.lhs, bn, b.lhs) && nodes_equal(an, a.rhs, bn, b.rhs);
  }
  return false;
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.nodes_.empty() || b.nodes_.empty()) return a.nodes_.empty() == b.nodes_.empty();
  return nodes_equal(a.nodes_, static_cast<std::int32_t>(a.nodes_.size()) - 1, b.nodes_,
                     static_cast<std::int32_t>(b.nodes_.size()) - 1);
}

}  // namespace filippov
