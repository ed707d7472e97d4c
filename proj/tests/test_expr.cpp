#include <cmath>
#include <random>

#include "disconj/errors.hpp"
#include "disconj/expr.hpp"
#include "disconj/interval.hpp"
#include "doctest.h"

using namespace disconj;

TEST_CASE("parse zero gives a constant tree") {
  auto e = CoeffExpr::parse("0");
  CHECK(e.root().op == Op::Const);
  CHECK(e.root().value == 0.0);
  CHECK_FALSE(e.depends_on_t());
}

TEST_CASE("parse periodic coefficient with a sign change") {
  auto e = CoeffExpr::parse("sin(t)/(2+sin(t))");
  CHECK(e.root().op == Op::Div);
  CHECK(e.root().lhs->op == Op::Sin);
  CHECK(e.eval(M_PI / 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("power and divide") {
  auto e = CoeffExpr::parse("t^2/16");
  CHECK(e.root().op == Op::Div);
  CHECK(e.root().lhs->op == Op::Pow);
  CHECK(e.eval(4.0) == 1.0);
}

TEST_CASE("eval examples") {
  CHECK(CoeffExpr::parse("2+sin(t)").eval(0.0) == 2.0);
  CHECK(CoeffExpr::parse("(p-1)^2/(4*t^2)").eval(1.0, {{"p", 3.0}}) == 1.0);
  CHECK_THROWS_AS((void)CoeffExpr::parse("1/t").eval(0.0), DomainError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("ln(t)").eval(-1.0), DomainError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("sqrt(t)").eval(-1.0), DomainError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("a*t").eval(1.0), DomainError);
}

TEST_CASE("grammar details") {
  CHECK(CoeffExpr::parse("2^3^2").eval(0.0) == 512.0);
  CHECK(CoeffExpr::parse("-2^2").eval(0.0) == -4.0);
  CHECK(CoeffExpr::parse("2*-t").eval(3.0) == -6.0);
  CHECK(CoeffExpr::parse("pi").eval(0.0) == M_PI);
  CHECK(CoeffExpr::parse("min(t,1)+max(t,2)").eval(3.0) == 4.0);
  CHECK(CoeffExpr::parse("1.5e-1*t").eval(2.0) == doctest::Approx(0.3));
  CHECK(CoeffExpr::parse("cot(t)").eval(1.0) == doctest::Approx(1.0 / std::tan(1.0)));
  CHECK_THROWS_AS((void)CoeffExpr::parse("2t"), ParseError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("2 t"), ParseError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("(t"), ParseError);
  CHECK_THROWS_AS((void)CoeffExpr::parse(""), ParseError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("foo(t)"), ParseError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("sin"), ParseError);
  try {
    (void)CoeffExpr::parse("1+*t");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("named parameters") {
  auto e = CoeffExpr::parse("A*cosh(t)-b");
  CHECK(e.parameters() == std::set<std::string>{"A", "b"});
  CHECK(e.eval(0.0, {{"A", 2.0}, {"b", 1.0}}) == 1.0);
  auto bound = e.bind({{"A", 2.0}});
  CHECK(bound.parameters() == std::set<std::string>{"b"});
  CHECK(CoeffExpr::parse("γ*t").eval(2.0, {{"γ", 1.5}}) == 3.0);
}

TEST_CASE("derivative examples") {
  CHECK(CoeffExpr::parse("t^2/4").differentiate().eval(2.0) == doctest::Approx(1.0));
  auto dt = CoeffExpr::parse("t").differentiate();
  CHECK(dt.root().op == Op::Const);
  CHECK(dt.root().value == 1.0);

  auto e = CoeffExpr::parse("R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2))");
  ParamMap pm{{"R", 1.0}, {"c", 1.0}};
  const double sym = e.differentiate().eval(0.0, pm);
  const double h = 1e-5;
  const double fd = (e.eval(h, pm) - e.eval(-h, pm)) / (2 * h);
  CHECK(sym == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(std::abs(sym - fd) < 1e-8);
}

TEST_CASE("non-differentiable nodes are rejected only when they depend on t") {
  CHECK_THROWS_AS((void)CoeffExpr::parse("abs(t)").differentiate(), NonDifferentiableError);
  CHECK_THROWS_AS((void)CoeffExpr::parse("min(t,1)").differentiate(), NonDifferentiableError);
  CHECK(CoeffExpr::parse("abs(a)*t").differentiate().eval(0.0, {{"a", -3.0}}) == 3.0);
}

namespace {

const char* kSmooth[] = {
    "sin(t)/(2+sin(t))",
    "t^2/16",
    "-(2*(2*t-1))/(t^2+(t-1)^2)",
    "4/(t^2+(t-1)^2)",
    "(2*exp(t)-1)/(2*cosh(t)-1)",
    "t^2/4+0.5",
    "exp(-t^2/4)*cos(3*t)",
    "tan(t/3)+cot(t/3+2)",
    "sqrt(1+t^2)*ln(2+t^2)",
    "sinh(t/4)*tanh(t)-t^3",
    "(1+t^2)^(1/3)",
    "2^t",
    "t^t",
};

}  // namespace

TEST_CASE("symbolic derivative matches central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(0.3, 2.5);
  for (const char* src : kSmooth) {
    auto e = CoeffExpr::parse(src);
    auto f = e.compile();
    auto df = e.differentiate().compile();
    for (int i = 0; i < 100; ++i) {
      const double t = pick(rng);
      const double h = 1e-4 * (1 + std::abs(t));
      // fourth-order stencil keeps the truncation error far below the bound
      const double fd = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
      const double s = df(t);
      INFO(src << " at t=" << t);
      CHECK(std::abs(s - fd) <= 1e-6 * (1 + std::abs(s)));
    }
  }
}

TEST_CASE("round trip through canonical text") {
  for (const char* src : kSmooth) {
    auto e = CoeffExpr::parse(src);
    auto back = CoeffExpr::parse(e.to_string());
    INFO(src << " -> " << e.to_string());
    CHECK(back.structurally_equal(e));
    CHECK(CoeffExpr::parse(back.to_string()).structurally_equal(back));
  }
  for (const char* src : {"-2^2", "-(3)", "a-(-1)", "2^-1", "min(t,-t)", "-t^2", "1e300*t", "0.1+t"}) {
    auto e = CoeffExpr::parse(src);
    INFO(src << " -> " << e.to_string());
    CHECK(CoeffExpr::parse(e.to_string()).structurally_equal(e));
  }
}

TEST_CASE("substitution of the variable") {
  auto e = CoeffExpr::parse("1/(1+t)");
  auto s = e.substitute_t(CoeffExpr::parse("t^2"));
  CHECK(s.eval(2.0) == doctest::Approx(0.2));
}

TEST_CASE("interval parsing and invariants") {
  auto iv = Interval::parse("[0, pi)");
  CHECK(iv.lo() == 0.0);
  CHECK(iv.hi() == doctest::Approx(M_PI));
  CHECK(iv.lo_closed());
  CHECK_FALSE(iv.hi_closed());
  auto r = Interval::parse("(-inf, inf]");
  CHECK_FALSE(r.hi_closed());
  CHECK_FALSE(r.finite());
  CHECK_THROWS_AS(Interval::closed(1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(Interval::parse("[1,0]"), PreconditionError);
  CHECK_THROWS_AS(Interval::parse("[1;2]"), ParseError);
  CHECK(Interval::parse("[min(0,1),2]").lo() == 0.0);
  CHECK(Interval::closed(0, 1).contains(Interval::open(0, 1)));
  CHECK_FALSE(Interval::open(0, 1).contains(Interval::closed(0, 1)));
  CHECK(Interval::parse(Interval::closed_open(-1.5, 0.25).to_string()) == Interval::closed_open(-1.5, 0.25));
}
