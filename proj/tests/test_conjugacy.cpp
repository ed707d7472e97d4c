#include <cmath>

#include "disconj/conjugacy.hpp"
#include "disconj/errors.hpp"
#include "doctest.h"

using namespace disconj;

namespace {

Equation eq3a(double A) {
  return Equation::parse("-(A*sinh(t))/(A*cosh(t)-1)", "1/(A*cosh(t)-1)", Interval::real_line(), {{"A", A}});
}

Equation eq3b(double b) {
  return Equation::parse("-(2*(2*t-b))/(t^2+(t-b)^2)", "4/(t^2+(t-b)^2)", Interval::real_line(), {{"b", b}});
}

double rho3a(double A, double t) { return std::log((A - std::exp(t)) / (1 - A * std::exp(t))); }

}  // namespace

TEST_CASE("rho_plus examples") {
  auto h = rho_plus(Equation::parse("0", "1"), 0.0, 10.0);
  REQUIRE(h.finite());
  CHECK(std::abs(h.value - M_PI) < 1e-8);

  auto r = rho_plus(eq3a(2.0), -2.0, 50.0);
  REQUIRE(r.finite());
  CHECK(r.value == doctest::Approx(rho3a(2.0, -2.0)).epsilon(1e-8));

  auto s = rho_plus(eq3b(1.0), 0.6, 200.6);
  CHECK_FALSE(s.finite());
  CHECK(s.window_limited);
  CHECK(s.value == kInf);
  CHECK(s.to_string() == "inf");
}

TEST_CASE("rho_minus examples") {
  auto h = rho_minus(Equation::parse("0", "1"), M_PI, -1.0);
  REQUIRE(h.finite());
  CHECK(std::abs(h.value) < 1e-8);

  auto r = rho_minus(eq3a(2.0), 1.0, -50.0);
  REQUIRE(r.finite());
  CHECK(r.value == doctest::Approx(rho3a(2.0, 1.0)).epsilon(1e-8));

  auto s = rho_minus(eq3b(1.0), 0.4, -200.0);
  CHECK_FALSE(s.finite());
  CHECK(s.value == -kInf);
  CHECK(s.to_string() == "-inf");
}

TEST_CASE("harmonic calibration of the shooting decision") {
  auto eq = Equation::parse("0", "1");
  auto ok = is_disconjugate(eq, Interval::closed(0.0, M_PI - 1e-3));
  CHECK(ok.kind == VerdictKind::GuaranteedDisconjugate);
  CHECK_FALSE(ok.witness);
  auto bad = is_disconjugate(eq, Interval::closed(0.0, M_PI + 1e-3));
  REQUIRE(bad.kind == VerdictKind::NotDisconjugate);
  REQUIRE(bad.witness);
  CHECK(std::abs(bad.witness->z1) < 1e-6);
  CHECK(std::abs(bad.witness->z2 - M_PI) < 1e-6);
  CHECK(bad.witness->residual < 1e-8);
}

TEST_CASE("oscillating equation with growing solution") {
  auto v = is_disconjugate(Equation::parse("-t/2", "t^2/16"), Interval::closed(0.0, 2 * M_PI + 0.1));
  REQUIRE(v.not_disconjugate());
  CHECK(std::abs(v.witness->z1) < 1e-9);
  CHECK(v.witness->z2 == doctest::Approx(2 * M_PI).epsilon(1e-7));
}

TEST_CASE("periodic equation is disconjugate on a long window") {
  auto v = is_disconjugate(Equation::parse("0", "sin(t)/(2+sin(t))"), Interval::closed(-20.0, 20.0));
  CHECK(v.disconjugate());
  CHECK_FALSE(v.window_limited);
}

TEST_CASE("interval types follow the closed/open rule") {
  auto eq = Equation::parse("0", "pi^2");
  // the conjugate point of 0 is exactly 1
  CHECK(is_disconjugate(eq, Interval::closed(0.0, 1.0)).not_disconjugate());
  CHECK(is_disconjugate(eq, Interval::closed_open(0.0, 1.0)).disconjugate());
  CHECK(is_disconjugate(eq, Interval::open(0.0, 1.0)).disconjugate());
  CHECK(is_disconjugate(eq, Interval::open_closed(0.0, 1.0)).disconjugate());
  auto v = is_disconjugate(eq, Interval::open(0.0, 1.2));
  REQUIRE(v.not_disconjugate());
  CHECK(v.witness->z1 > 0.0);
  CHECK(v.witness->z2 < 1.2);
  CHECK(v.witness->z2 - v.witness->z1 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("unbounded intervals are truncated and labeled") {
  auto v = is_disconjugate(Equation::parse("0", "-1"), Interval::real_line());
  CHECK(v.disconjugate());
  CHECK(v.window_limited);
  REQUIRE(v.examined);
  CHECK(v.examined->lo() == -50.0);
  auto w = is_disconjugate(eq3b(1.0), Interval::closed_open(0.5, kInf));
  CHECK(w.disconjugate());
  CHECK(w.window_limited);
  auto n = is_disconjugate(Equation::parse("0", "1"), Interval::real_line());
  CHECK(n.not_disconjugate());
}

TEST_CASE("singular endpoint margin") {
  Equation euler = Equation::parse("0", "-1/t", Interval::open(0.0, kInf));
  auto v = is_disconjugate(euler, Interval::open(0.0, 10.0));
  CHECK(v.disconjugate());
  REQUIRE(v.examined);
  CHECK(v.examined->lo() == doctest::Approx(1e-5));
  CHECK_THROWS_AS((void)is_disconjugate(euler, Interval::closed(0.0, 1.0)), PreconditionError);
  // q = 1/t^2 exceeds the Euler bound 1/(4 t^2): oscillatory
  Equation osc = Equation::parse("0", "1/t^2", Interval::open(0.0, kInf));
  CHECK(is_disconjugate(osc, Interval::open(0.0, 1.0)).not_disconjugate());
}

TEST_CASE("brute-force cross-check") {
  auto h = Equation::parse("0", "1");
  auto r1 = crosscheck_bruteforce(h, Interval::closed(0.0, 3.0), 32);
  CHECK(r1.max_zero_count == 1);
  CHECK(r1.oracle_disconjugate);
  CHECK(r1.agrees);
  auto r2 = crosscheck_bruteforce(h, Interval::closed(0.0, 7.0), 32);
  CHECK(r2.max_zero_count >= 2);
  CHECK_FALSE(r2.oracle_disconjugate);
  CHECK(r2.agrees);
  auto r3 = crosscheck_bruteforce(eq3b(1.0), Interval::closed(-1.0, 0.9), 32);
  CHECK(r3.agrees);
  CHECK_THROWS_AS((void)crosscheck_bruteforce(h, Interval::closed(0.0, 1.0), 4), PreconditionError);
}

TEST_CASE("positive solutions") {
  auto y = find_positive_solution(Equation::parse("0", "0"), Interval::closed(0.0, 1.0));
  for (double t = 0; t <= 1; t += 0.125) CHECK(y.x(t) == doctest::Approx(1.0).epsilon(1e-12));

  auto s = find_positive_solution(Equation::parse("0", "1"), Interval::closed(0.0, M_PI / 2));
  for (double t = 0; t <= M_PI / 2; t += 0.1) CHECK(s.x(t) == doctest::Approx(std::sin(t) + std::cos(t)).epsilon(1e-9));

  auto half = find_positive_solution(Equation::parse("0", "1"), Interval::closed_open(0.0, M_PI));
  CHECK(half.x(0.0) == 0.0);
  CHECK(half.x(3.0) == doctest::Approx(std::sin(3.0)).epsilon(1e-9));

  CHECK_THROWS_AS((void)find_positive_solution(Equation::parse("0", "1"), Interval::closed(0.0, 4.0)),
                  PreconditionError);
}
