#include "filippov/interval.hpp"

#include <limits>

namespace filippov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Interval add(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval sub(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

Interval mul(const Interval& a, const Interval& b) {
  double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  double lo = c[0], hi = c[0];
  for (double v : c) {
    if (std::isnan(v)) continue;  // 0 * inf at a bound; the other corners dominate
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (std::isnan(lo) || std::isnan(hi)) return Interval::whole();
  return {lo, hi};
}

Interval recip(const Interval& a) {
  if (a.lo <= 0.0 && a.hi >= 0.0) return Interval::whole();
  return {1.0 / a.hi, 1.0 / a.lo};
}

Interval pow_int(const Interval& a, int e) {
  if (e == 0) return Interval::point(1.0);
  if (e < 0) {
    Interval base = pow_int(a, -e);
    return recip(base);
  }
  if (e % 2 == 1) {
    return {std::pow(a.lo, e), std::pow(a.hi, e)};
  }
  double plo = std::pow(std::fabs(a.lo), e), phi = std::pow(std::fabs(a.hi), e);
  double hi = std::max(plo, phi);
  double lo = a.contains(0.0) ? 0.0 : std::min(plo, phi);
  return {lo, hi};
}

Interval sin_iv(const Interval& a) {
  if (a.width() >= 2.0 * M_PI) return {-1.0, 1.0};
  // Scan critical points pi/2 + k*pi inside [lo, hi].
  double lo = std::sin(a.lo), hi = std::sin(a.hi);
  if (lo > hi) std::swap(lo, hi);
  double k = std::ceil((a.lo - M_PI_2) / M_PI);
  for (double c = M_PI_2 + k * M_PI; c <= a.hi; c += M_PI) {
    double v = std::sin(c);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Outward rounding for the endpoint evaluations.
  return {std::max(-1.0, lo - 1e-15), std::min(1.0, hi + 1e-15)};
}

Interval cos_iv(const Interval& a) { return sin_iv({a.lo + M_PI_2, a.hi + M_PI_2}); }

Interval abs_iv(const Interval& a) {
  if (a.lo >= 0.0) return a;
  if (a.hi <= 0.0) return {-a.hi, -a.lo};
  return {0.0, std::max(-a.lo, a.hi)};
}

}  // namespace

Interval Interval::whole() { return {-kInf, kInf}; }

Interval eval_on_box(const Expr& e, const std::vector<Interval>& x, const Interval& t) {
  const auto& nodes = e.nodes();
  std::vector<Interval> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ExprNode& n = nodes[i];
    switch (n.kind) {
      case NodeKind::Literal: vals[i] = Interval::point(n.value); break;
      case NodeKind::Variable: vals[i] = x[static_cast<std::size_t>(n.var_index)]; break;
      case NodeKind::Time: vals[i] = t; break;
      case NodeKind::Negate: vals[i] = {-vals[n.lhs].hi, -vals[n.lhs].lo}; break;
      case NodeKind::Pow: vals[i] = pow_int(vals[n.lhs], n.exponent); break;
      case NodeKind::Binary: {
        const Interval &a = vals[n.lhs], &b = vals[n.rhs];
        switch (n.op) {
          case BinaryOp::Add: vals[i] = add(a, b); break;
          case BinaryOp::Sub: vals[i] = sub(a, b); break;
          case BinaryOp::Mul: vals[i] = mul(a, b); break;
          case BinaryOp::Div: vals[i] = mul(a, recip(b)); break;
        }
        break;
      }
      case NodeKind::Call1: {
        const Interval& a = vals[n.lhs];
        switch (n.f1) {
          case Func1::Sin: vals[i] = sin_iv(a); break;
          case Func1::Cos: vals[i] = cos_iv(a); break;
          case Func1::Exp: vals[i] = {std::exp(a.lo), std::exp(a.hi)}; break;
          case Func1::Log:
            // Values below the domain widen to -inf; sound for certificates.
            vals[i] = {a.lo <= 0.0 ? -kInf : std::log(a.lo), a.hi <= 0.0 ? -kInf : std::log(a.hi)};
            break;
          case Func1::Abs: vals[i] = abs_iv(a); break;
          case Func1::Sqrt:
            vals[i] = {a.lo <= 0.0 ? 0.0 : std::sqrt(a.lo), a.hi <= 0.0 ? 0.0 : std::sqrt(a.hi)};
            break;
          case Func1::Tanh: vals[i] = {std::tanh(a.lo), std::tanh(a.hi)}; break;
        }
        break;
      }
      case NodeKind::Call2: {
        const Interval &a = vals[n.lhs], &b = vals[n.rhs];
        if (n.f2 == Func2::Min)
          vals[i] = {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
        else
          vals[i] = {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
        break;
      }
    }
  }
  return vals.back();
}

}  // namespace filippov
