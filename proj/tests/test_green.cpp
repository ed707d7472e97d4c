#include <cmath>
#include <random>
#include <sstream>

#include "disconj/errors.hpp"
#include "disconj/green.hpp"
#include "doctest.h"

using namespace disconj;

TEST_CASE("double integrator kernel") {
  auto g = green_function(Equation::parse("0", "0"), 0.0, 1.0);
  CHECK(g(0.75, 0.25) == doctest::Approx(-0.0625).epsilon(1e-12));
  CHECK(g(0.25, 0.75) == doctest::Approx(-0.0625).epsilon(1e-12));
  for (double t = 0.05; t < 1; t += 0.1) {
    for (double s = 0.05; s < 1; s += 0.1) {
      const double exact = s < t ? -(1 - t) * s : -t * (1 - s);
      CHECK(g(t, s) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
  auto c = verify_green(g);
  CHECK(c.identity_gap < 1e-8);
  CHECK(c.jump_error < 1e-10);
  CHECK(c.boundary < 1e-12);
}

TEST_CASE("harmonic kernel on a quarter period") {
  auto g = green_function(Equation::parse("0", "1"), 0.0, M_PI / 2);
  for (double s = 0.1; s < 1.5; s += 0.2) {
    CHECK(std::abs(g(M_PI / 2, s)) < 1e-12);
    for (double t = 0.05; t < 1.5; t += 0.3) {
      const double exact = s < t ? -std::cos(t) * std::sin(s) : -std::cos(s) * std::sin(t);
      CHECK(g(t, s) == doctest::Approx(exact).epsilon(1e-9));
    }
  }
  auto c = verify_green(g);
  CHECK(c.operator_residual < 1e-5);
  CHECK(c.identity_gap < 1e-8);
}

TEST_CASE("kernel is negative and satisfies the defining conditions") {
  std::mt19937_64 rng(3);
  for (auto [p, q, a, b] : {std::tuple{"t", "1", -1.0, 1.5}, std::tuple{"-t/2", "t^2/16", 0.0, 6.0},
                            std::tuple{"0", "sin(t)/(2+sin(t))", -5.0, 5.0}, std::tuple{"1", "0.2", 0.0, 3.0}}) {
    auto eq = Equation::parse(p, q);
    auto g = green_function(eq, a, b);
    std::uniform_real_distribution<double> u(a, b);
    for (int k = 0; k < 100; ++k) {
      double t = u(rng), s = u(rng);
      if (t == a || s == a) continue;
      CHECK(g(t, s) < 0.0);
    }
    auto c = verify_green(g, 12, false);
    INFO(p << " " << q);
    CHECK(c.boundary <= 1e-8);
    CHECK(c.jump_error <= 1e-6);
    CHECK(c.max_interior < 0.0);
    CHECK(c.operator_residual < 1e-5);
  }
}

TEST_CASE("identity with the Cauchy function needs p = 0") {
  auto g = green_function(Equation::parse("1", "0"), 0.0, 1.0);
  auto c = verify_green(g, 8);
  // the displayed form weights by W(t) instead of W(s)
  CHECK(c.identity_gap > 1e-3);
  CHECK(c.jump_error < 1e-8);
}

TEST_CASE("boundary value problems") {
  auto s1 = solve_bvp(Equation::parse("0", "0"), CoeffExpr::parse("-1"), 0.0, 1.0);
  CHECK(s1.x(0.5) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(s1.trajectory().x(0.3) == doctest::Approx(0.3 * 0.7 / 2).epsilon(1e-10));
  CHECK(std::abs(s1.residual(0.4)) < 1e-6);

  auto s2 = solve_bvp(Equation::parse("0", "1"), CoeffExpr::parse("-1"), 0.0, M_PI / 2);
  CHECK(s2.x(M_PI / 4) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-10));
  for (double t = 0; t <= M_PI / 2; t += 0.1) {
    CHECK(s2.x(t) == doctest::Approx(std::cos(t) + std::sin(t) - 1).epsilon(1e-10));
    CHECK(std::abs(s2.residual(t)) < 1e-6);
  }
  CHECK(std::abs(s2.x(0.0)) < 1e-14);
  CHECK(std::abs(s2.x(M_PI / 2)) < 1e-12);

  auto s3 = solve_bvp(Equation::parse("0", "1"), CoeffExpr::parse("0"), 0.0, 1.0);
  for (double t = 0; t <= 1; t += 0.1) CHECK(s3.x(t) == 0.0);
}

TEST_CASE("quadrature solution agrees with shooting") {
  auto eq = Equation::parse("t", "1+t^2/4");
  auto f = [](double t) { return std::cos(3 * t) + t; };
  auto s = solve_bvp(eq, f, -1.0, 1.0);
  auto ref = shoot_bvp(eq, f, -1.0, 1.0);
  for (double t = -1; t <= 1; t += 0.05) {
    CHECK(std::abs(s.x(t) - ref.x(t)) < 1e-6);
    CHECK(std::abs(s.residual(t)) < 1e-6);
  }
}

TEST_CASE("errors and export") {
  CHECK_THROWS_AS((void)green_function(Equation::parse("0", "1"), 0.0, 4.0), PreconditionError);
  CHECK_THROWS_AS((void)green_function(Equation::parse("0", "1"), 0.0, M_PI), PreconditionError);
  std::ostringstream os;
  green_function(Equation::parse("0", "0"), 0.0, 1.0).write_csv(os, 3);
  CHECK(os.str().find("t,s,G\n0,0,0\n") != std::string::npos);
  const auto row = os.str().find("0.5,0.5,");
  REQUIRE(row != std::string::npos);
  CHECK(std::stod(os.str().substr(row + 8)) == doctest::Approx(-0.25).epsilon(1e-12));
}
