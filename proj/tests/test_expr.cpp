#include "filippov/expr.hpp"

#include <cmath>

#include "doctest.h"
#include "filippov/interval.hpp"
#include "filippov/rng.hpp"

using namespace filippov;

TEST_CASE("parse and evaluate basic arithmetic") {
  Expr e = Expr::parse("x1*x2 - 1", 2);
  CHECK(e.evaluate({{2.0, 3.0}}) == doctest::Approx(5.0));

  CHECK(Expr::parse("sin(x1)", 1).evaluate({{0.0}}) == 0.0);
  CHECK(Expr::parse("x1^2 + 3*x2", 2).evaluate({{1.0, 1.0}}) == doctest::Approx(4.0));
}

TEST_CASE("parse errors carry a position") {
  CHECK_THROWS_AS(Expr::parse("x1 +", 1), ParseError);
  try {
    Expr::parse("x1 +", 1);
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }

  CHECK_THROWS_AS(Expr::parse("x3", 2), ParseError);          // out of range
  CHECK_THROWS_AS(Expr::parse("foo(x1)", 1), ParseError);     // unknown identifier
  CHECK_THROWS_AS(Expr::parse("", 1), ParseError);            // empty
  CHECK_THROWS_AS(Expr::parse("x1^x2", 2), ParseError);       // non-integer exponent
  CHECK_THROWS_AS(Expr::parse("x1^2^3", 1), ParseError);      // non-associative ^
  CHECK_THROWS_AS(Expr::parse("min(x1)", 1), ParseError);     // arity
  CHECK_THROWS_AS(Expr::parse("(x1", 1), ParseError);         // unbalanced
}

TEST_CASE("precedence: ^ over unary minus over * / over + -") {
  CHECK(Expr::parse("-x1^2", 1).evaluate({{3.0}}) == doctest::Approx(-9.0));
  CHECK(Expr::parse("2 - 3 - 4", 1).evaluate({{0.0}}) == doctest::Approx(-5.0));
  CHECK(Expr::parse("2*x1 + 1", 1).evaluate({{2.0}}) == doctest::Approx(5.0));
  CHECK(Expr::parse("2^-2", 1).evaluate({{0.0}}) == doctest::Approx(0.25));
  CHECK(Expr::parse("8/2/2", 1).evaluate({{0.0}}) == doctest::Approx(2.0));
  CHECK(Expr::parse("min(x1, max(x1 - 1, t))", 1).evaluate({{0.5}, 2.0}) ==
        doctest::Approx(0.5));
}

TEST_CASE("edge syntax: zero exponent, whitespace, trailing identifier") {
  CHECK(Expr::parse("x1^0", 1).evaluate({{7.0}}) == 1.0);
  CHECK(Expr::parse("  ( x1 + 1 ) * 2 ", 1).evaluate({{2.0}}) == doctest::Approx(6.0));
  // "2e" is the number 2 followed by an unknown identifier.
  CHECK_THROWS_AS(Expr::parse("2e", 1), ParseError);
  CHECK(Expr::parse("2e2", 1).evaluate({{0.0}}) == doctest::Approx(200.0));
  CHECK(Expr::parse(".5 + x1", 1).evaluate({{0.25}}) == doctest::Approx(0.75));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(Expr::parse("1/x1", 1).evaluate({{0.0}}), DomainError);
  CHECK_THROWS_AS(Expr::parse("log(x1)", 1).evaluate({{-1.0}}), DomainError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)", 1).evaluate({{-1.0}}), DomainError);
  CHECK_THROWS_AS(Expr::parse("exp(x1)", 1).evaluate({{1e9}}), DomainError);  // overflow
  CHECK_THROWS_AS(Expr::parse("x1^-1", 1).evaluate({{0.0}}), DomainError);
}

TEST_CASE("gradient: polynomial and product rule") {
  Vec g = Expr::parse("x1^2 + 3*x2", 2).gradient({{1.0, 1.0}});
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(3.0));

  g = Expr::parse("x1*x2", 2).gradient({{2.0, 3.0}});
  CHECK(g[0] == doctest::Approx(3.0));
  CHECK(g[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(Expr::parse("abs(x1)", 1).gradient({{0.0}}), NondifferentiableError);
  CHECK_THROWS_AS(Expr::parse("min(x1, x2)", 2).gradient({{1.0, 1.0}}), NondifferentiableError);
}

TEST_CASE("gradient agrees with central finite differences on a corpus") {
  const char* corpus[] = {
      "x1^2 + 3*x2",
      "sin(x1)*cos(x2)",
      "exp(x1 - x2^2)",
      "x1/(1 + x2^2)",
      "tanh(2*x1) + sqrt(x2 + 3)",
      "log(x1 + 4) * x2",
      "x1^3 - 2*x1*x2 + x2^2",
      "abs(x1 - 10)",
      "min(x1, x2 + 5)",
      "max(2*x1, x2 - 7) + sin(t)",
      "(x1 + x2)^4 / (2 + cos(x1))",
  };
  CounterRng rng(7, 1);
  const double step = 1e-6;
  for (const char* text : corpus) {
    Expr e = Expr::parse(text, 2);
    int checked = 0;
    for (int trial = 0; checked < 100 && trial < 500; ++trial) {
      Vec x = {rng.next_in(-1.5, 1.5), rng.next_in(-1.5, 1.5)};
      double t = rng.next_in(0.0, 1.0);
      Vec g;
      try {
        g = e.gradient({x, t});
      } catch (const std::runtime_error&) {
        continue;  // kink or domain edge; pick another point
      }
      for (std::size_t k = 0; k < 2; ++k) {
        Vec xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        double fd;
        try {
          fd = (e.evaluate({xp, t}) - e.evaluate({xm, t})) / (2 * step);
        } catch (const std::runtime_error&) {
          goto next_point;  // stepped over a kink
        }
        {
          double scale = std::max({1.0, std::fabs(g[k]), std::fabs(fd)});
          CHECK(std::fabs(g[k] - fd) / scale < 1e-5);
        }
      }
      ++checked;
    next_point:;
    }
    CHECK(checked == 100);
  }
}

TEST_CASE("parse-print-parse is structurally idempotent") {
  const char* corpus[] = {
      "x1*x2 - 1", "-x1^2", "2^-2", "min(x1, max(x2, t))", "-(x1 + x2)",
      "1/(x1 - 0.5)", "abs(x1)*sqrt(x2 + 2)", "-3.5e-2 + x1", "x1 - (x2 - 1)",
      "8/2/2", "x1^0", "tanh(x1)^3",
  };
  for (const char* text : corpus) {
    Expr a = Expr::parse(text, 2);
    Expr b = Expr::parse(a.to_string(), 2);
    CAPTURE(text);
    CAPTURE(a.to_string());
    CHECK(structurally_equal(a, b));
    CHECK(b.to_string() == a.to_string());
  }
}

TEST_CASE("evaluate is deterministic bit-for-bit") {
  Expr e = Expr::parse("sin(x1)*exp(x2) - tanh(t)/(x1 + 2)", 2);
  EvalPoint p{{0.3456789, -1.2345}, 0.777};
  double a = e.evaluate(p);
  for (int i = 0; i < 10; ++i) CHECK(e.evaluate(p) == a);
}

TEST_CASE("expression builders compose") {
  Expr x = Expr::variable(0, 2);
  Expr c = Expr::constant(2.5, 2);
  Expr e = (x - c).squared() + Expr::variable(1, 2);
  CHECK(e.evaluate({{3.5, 4.0}}) == doctest::Approx(5.0));

  std::vector<Expr> g = {Expr::parse("x1 + 1", 2), Expr::parse("x2 - 1", 2)};
  Expr d2 = squared_distance(g, {1.0, 2.0});
  // (x1+1-1)^2 + (x2-1-2)^2 at (2, 4) -> 4 + 1
  CHECK(d2.evaluate({{2.0, 4.0}}) == doctest::Approx(5.0));

  Expr timed = Expr::parse("t*x1", 1).with_time(3.0);
  CHECK_FALSE(timed.depends_on_time());
  CHECK(timed.evaluate({{2.0}, 99.0}) == doctest::Approx(6.0));
}

TEST_CASE("constant detection") {
  double v = 0.0;
  CHECK(Expr::parse("2 + 3*4", 1).is_constant(&v));
  CHECK(v == doctest::Approx(14.0));
  CHECK_FALSE(Expr::parse("x1", 1).is_constant());
  CHECK_FALSE(Expr::parse("t", 1).is_constant());
}

TEST_CASE("interval evaluation bounds the true image") {
  Expr e = Expr::parse("x1^2", 1);
  Interval iv = eval_on_box(e, {{-1.0, 1.0}}, 0.0);
  CHECK(iv.lo == doctest::Approx(0.0));
  CHECK(iv.hi == doctest::Approx(1.0));

  // Random expressions: interval must contain sampled values.
  const char* corpus[] = {"sin(x1) + x1^2", "x1/(x2 + 3)", "abs(x1)*x2",
                          "max(x1, x2) - min(x1, x2)", "exp(x1/4)"};
  CounterRng rng(11, 2);
  for (const char* text : corpus) {
    Expr f = Expr::parse(text, 2);
    std::vector<Interval> box = {{-2.0, 0.5}, {-1.0, 2.0}};
    Interval bound = eval_on_box(f, box, 0.0);
    for (int i = 0; i < 200; ++i) {
      Vec x = {rng.next_in(-2.0, 0.5), rng.next_in(-1.0, 2.0)};
      double v = f.evaluate({x});
      CHECK(v >= bound.lo - 1e-12);
      CHECK(v <= bound.hi + 1e-12);
    }
  }

  // Division through zero widens to the whole line.
  Interval whole = eval_on_box(Expr::parse("1/x1", 1), {{-1.0, 1.0}}, 0.0);
  CHECK(!whole.is_finite());
}
