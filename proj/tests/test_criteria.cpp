#include <cmath>

#include "disconj/criteria.hpp"
#include "disconj/errors.hpp"
#include "doctest.h"

using namespace disconj;

namespace {

Equation eq(const char* p, const char* q) { return Equation::parse(p, q); }

// five-point second difference
template <class F>
double d2(F f, double t, double h) {
  return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h);
}

template <class F>
double d1(F f, double t, double h) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("constant coefficients") {
  CHECK(check_constant(eq("2", "1")).fired());
  auto osc = check_constant(eq("0", "1"));
  REQUIRE(osc.verdict.not_disconjugate());
  REQUIRE(osc.verdict.witness);
  CHECK(osc.verdict.witness->z2 - osc.verdict.witness->z1 == doctest::Approx(M_PI).epsilon(1e-8));
  CHECK(osc.certificate["zero_spacing"].get<double>() == doctest::Approx(M_PI));
  auto nc = check_constant(eq("t", "0"));
  CHECK(nc.verdict.kind == VerdictKind::Inconclusive);
}

TEST_CASE("Euler type coefficients") {
  const Interval half = Interval::open(0.0, kInf);
  CHECK(check_euler(Equation::parse("0", "-1/t", half), half).fired());
  auto eq3 = Equation::parse("3/t", "1/t^2", half);
  CHECK(check_euler(eq3, half).fired());
  CHECK(check_euler(eq3, Interval::closed(0.5, 4.0)).fired());
  auto eq1 = Equation::parse("1/t", "0.1/t^2", half);
  CHECK(check_euler(eq1, half).verdict.kind == VerdictKind::Inconclusive);
  // the oracle agrees on a piece of the half-line
  CHECK(is_disconjugate(eq3, Interval::closed(0.01, 50.0)).disconjugate());
  CHECK(check_euler(eq("t", "0"), Interval::closed(1.0, 2.0)).verdict.kind == VerdictKind::Inconclusive);
}

TEST_CASE("Lyapunov integral test") {
  auto r4 = check_lyapunov(eq("0", "4"), 0, 1);
  CHECK(r4.fired());
  CHECK(r4.certificate["integral_q_plus"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(is_disconjugate(eq("0", "4"), Interval::closed(0, 1)).disconjugate());

  auto pi2 = eq("0", "pi^2");
  CHECK(check_lyapunov(pi2, 0, 1).verdict.kind == VerdictKind::Inconclusive);
  // the conjugate point of 0 is exactly 1
  CHECK(is_disconjugate(pi2, Interval::closed_open(0, 1)).disconjugate());
  CHECK(is_disconjugate(pi2, Interval::closed(0, 1)).not_disconjugate());
  CHECK(is_disconjugate(pi2, Interval::closed(0, 1.01)).not_disconjugate());

  auto neg = check_lyapunov(eq("0", "-5"), 0, 1);
  CHECK(neg.fired());
  CHECK(neg.certificate["integral_q_plus"].get<double>() == 0.0);
  CHECK(check_lyapunov(eq("1", "0"), 0, 1).verdict.kind == VerdictKind::Inconclusive);
  // sign-changing q: only the positive part counts
  auto s = check_lyapunov(eq("0", "4*sin(2*pi*t)"), 0, 1);
  CHECK(s.certificate["integral_q_plus"].get<double>() == doctest::Approx(4 / M_PI).epsilon(1e-9));
}

TEST_CASE("Lyapunov constant is sharp") {
  auto f = lyapunov_sharpness_family(0.05);
  CHECK(std::abs(f.integral / f.bound - 1) < 0.02);
  auto g = lyapunov_sharpness_family(0.25);
  CHECK(std::abs(g.integral - 8.0) / 8.0 < 0.05);
  // the integral stays below the bound and above 4
  for (double delta : {0.02, 0.1, 0.2, 0.3}) {
    auto h = lyapunov_sharpness_family(delta);
    CHECK(h.integral < h.bound);
    CHECK(h.integral > 4.0);
    // v solves the equation, so the Cauchy function from 0 is v and vanishes at 1
    for (double t : {0.1, 0.5 - delta / 2, 0.5, 0.5 + delta, 0.9}) {
      CHECK(cauchy(h.eq, 0.0, 1.0).x(t) == doctest::Approx(h.v.eval(t)).epsilon(1e-8));
    }
    auto v = is_disconjugate(h.eq, Interval::closed(0, 1));
    REQUIRE(v.not_disconjugate());
    CHECK(std::abs(v.witness->z1) < 1e-9);
    CHECK(std::abs(v.witness->z2 - 1) < 1e-7);
  }
  // the quintic cap keeps a visible gap to the bound
  auto quintic = lyapunov_sharpness_family(0.05, 0);
  CHECK(quintic.integral / quintic.bound < 0.97);
  CHECK_THROWS_AS((void)lyapunov_sharpness_family(0.5), PreconditionError);
}

TEST_CASE("test functions") {
  auto e11 = eq("0", "sin(t)/(2+sin(t))");
  auto r = check_vallee_poussin(e11, Interval::closed(-10, 10), CoeffExpr::parse("2+sin(t)"));
  CHECK(r.fired());
  CHECK(std::abs(r.certificate["max_Lv"].get<double>()) < 1e-12);
  CHECK(*r.verdict.examined == Interval::closed(-10, 10));

  auto h = eq("0", "1");
  // (pi/3.2)^2 < 1, so Lv = v (1 - (pi/3.2)^2) > 0 and this v proves nothing
  auto wide = check_vallee_poussin(h, Interval::closed(0, 3), CoeffExpr::parse("sin((t+0.05)*pi/3.2)"));
  CHECK(wide.verdict.kind == VerdictKind::Inconclusive);
  CHECK(wide.certificate["max_Lv"].get<double>() > 0.0);
  auto narrow = check_vallee_poussin(h, Interval::closed(0, 3), CoeffExpr::parse("sin((t+0.05)*pi/3.1)"));
  CHECK(narrow.fired());
  CHECK(is_disconjugate(h, Interval::closed(0, 3)).disconjugate());

  CHECK(check_vallee_poussin(h, Interval::closed(0, 1), CoeffExpr::parse("-1")).verdict.kind ==
        VerdictKind::Inconclusive);
  // v vanishing at b only gives the half-open interval
  auto half = check_vallee_poussin(h, Interval::closed(0, M_PI), CoeffExpr::parse("sin(t)"));
  CHECK(half.fired());
  CHECK(*half.verdict.examined == Interval::closed_open(0, M_PI));
}

TEST_CASE("criterion A") {
  CHECK(check_A(eq("t", "0"), Interval::closed(0, 5)).fired());
  CHECK(check_A(eq("0", "-t^2"), Interval::closed(-3, 3)).fired());
  auto s = check_A(eq("0", "sin(t)"), Interval::closed(0, 3));
  CHECK(s.verdict.kind == VerdictKind::Inconclusive);
  auto open = check_A(eq("0", "-1"), Interval::open(0, 1));
  CHECK(*open.verdict.examined == Interval::open(0, 1));
}

TEST_CASE("criterion B") {
  auto eq_b = check_B(eq("0", "pi^2"), 0, 1);
  CHECK(eq_b.fired());
  CHECK(*eq_b.verdict.examined == Interval::closed_open(0, 1));
  CHECK(check_B(eq("0", "1.01*pi^2"), 0, 1).verdict.kind == VerdictKind::Inconclusive);
  auto pt = check_B(eq("t*(1-t)", "0"), 0, 1);
  // pi cot(pi t) t (1-t) stays below pi cot-limit 1 < pi^2
  CHECK(pt.fired());
  CHECK(pt.certificate["grid"]["lhs"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  auto bad = check_B(eq("1", "0"), 0, 1);
  CHECK(bad.verdict.kind == VerdictKind::Inconclusive);
  CHECK(bad.certificate["endpoint_ratio"].get<double>() > 1e3);
}

TEST_CASE("criterion C") {
  auto q8 = check_C(eq("0", "8"), 0, 1);
  CHECK(q8.fired());
  CHECK(q8.certificate["C2"].get<double>() == doctest::Approx(1.0));
  CHECK(q8.certificate["fired"] == "C2");
  auto p2 = check_C(eq("2", "0"), 0, 1);
  CHECK(p2.fired());
  CHECK(p2.certificate["fired"] == "C2");
  auto q9 = check_C(eq("0", "9"), 0, 1);
  CHECK(q9.verdict.kind == VerdictKind::Inconclusive);
  CHECK(q9.certificate["C1_grid"]["at"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(q9.certificate["C1_max"].get<double>() == doctest::Approx(9.0 / 8));
  // C1 without C2: large p only near the middle
  auto c1 = check_C(eq("3*(1-4*(t-1/2)^2)^8", "0"), 0, 1);
  CHECK(c1.fired());
  CHECK(c1.certificate["fired"] == "C1");
}

TEST_CASE("criterion D") {
  auto a = check_D(eq("1", "0"), Interval::closed(-20, 20));
  CHECK(a.fired());
  CHECK(a.certificate["nu"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(a.certificate["max_P"].get<double>() == doctest::Approx(-0.25).epsilon(1e-9));
  auto b = check_D(eq("sin(t)", "-2"), Interval::closed(-20, 20));
  CHECK(b.fired());
  CHECK(std::abs(b.certificate["nu"].get<double>()) < 1e-6);
  auto c = check_D(eq("0", "1"), Interval::closed(-20, 20));
  CHECK(c.verdict.kind == VerdictKind::Inconclusive);
  CHECK(c.certificate["max_P"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  auto line = check_D(eq("1", "0"), Interval::real_line());
  CHECK(line.verdict.window_limited);
}

TEST_CASE("constant-coefficient kernels solve the auxiliary problem") {
  for (auto [P, Q] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {-1.5, 0.3}, {2.0, 1.0}, {0.5, 3.0}, {-2.0, -4.0}}) {
    ConstantKernel k(0.0, 1.0, P, Q);
    REQUIRE(k.admissible());
    INFO(P << " " << Q);
    for (double t : {0.2, 0.45, 0.7}) {
      auto v = [&](double x) { return k.v(x); };
      CHECK(d2(v, t, 1e-3) + P * k.dv(t) + Q * k.v(t) == doctest::Approx(-1.0).epsilon(1e-6));
      CHECK(d1(v, t, 1e-3) == doctest::Approx(k.dv(t)).epsilon(1e-7));
      CHECK(k.v(t) > 0.0);
    }
    CHECK(std::abs(k.v(0.0)) < 1e-14);
    CHECK(std::abs(k.v(1.0)) < 1e-14);
  }
  ConstantKernel flat(0.0, 2.0, 0.0, 0.0);
  for (double t : {0.3, 1.0, 1.7}) CHECK(flat.v(t) == doctest::Approx(t * (2 - t) / 2).epsilon(1e-12));
  // the literal kernel misses the weight e^{P(s-t)} when P != 0
  ConstantKernel k1(0.0, 1.0, 1.0, 0.0);
  CHECK(std::abs(k1.v(0.5, true) - k1.v(0.5)) > 1e-3);
  CHECK_FALSE(ConstantKernel(0.0, 4.0, 0.0, 1.0).admissible());
}

TEST_CASE("criterion XA1") {
  auto par = check_XA1(eq("0", "8"), 0, 1, 0, 0);
  CHECK(par.fired());
  CHECK(par.certificate["max_lhs"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  auto same = check_XA1(eq("1", "0.2"), 0, 2, 1, 0.2);
  CHECK(same.fired());
  CHECK(std::abs(same.certificate["max_lhs"].get<double>()) < 1e-12);
  auto e = eq("1", "0.5");
  auto r = check_XA1(e, 0, 1, 1, 0);
  CHECK(r.certificate.contains("literal_kernel_max_lhs"));
  CHECK(r.fired() == (r.certificate["max_lhs"].get<double>() <= 1.0));
  if (r.fired()) CHECK(is_disconjugate(e, Interval::closed_open(0, 1)).disconjugate());
  // complex auxiliary roots are admissible on a short interval
  auto cx = check_XA1(eq("0", "1.2"), 0, 2, 0, 1);
  CHECK(cx.fired());
  CHECK(check_XA1(eq("0", "1"), 0, 4, 0, 1).verdict.kind == VerdictKind::Inconclusive);
}

TEST_CASE("criterion XA2") {
  CHECK(check_XA2(eq("3", "0"), 0, 1, 3).fired());
  auto f = xa2_factors(0, 1, 1e-4);
  CHECK(std::abs(f.displayed_dv - 0.5) < 1e-3);
  CHECK(std::abs(f.displayed_v - 0.125) < 1e-3);
  CHECK(std::abs(f.sup_v - 0.125) < 1e-3);
  auto r = check_XA2(eq("2", "0.5"), 0, 1, 2);
  const auto f2 = xa2_factors(0, 1, 2);
  CHECK(r.certificate["max_lhs"].get<double>() == doctest::Approx(0.5 * std::max(f2.displayed_v, f2.sup_v)));
  CHECK(r.fired());
  // the displayed bounds hold for P > 0 but not for P < 0
  for (double P : {0.5, 1.0, 4.0}) {
    auto g = xa2_factors(0, 1, P);
    CHECK(g.displayed_v >= g.sup_v - 1e-12);
    CHECK(g.displayed_dv >= g.sup_dv - 1e-12);
  }
  auto neg = xa2_factors(0, 1, -3.0);
  CHECK(neg.displayed_v < neg.sup_v);
  // the exact v for Q = 0 is the kernel integral
  ConstantKernel k(0.0, 1.0, 2.0, 0.0);
  double best = 0;
  for (int i = 1; i < 200; ++i) best = std::max(best, k.v(i / 200.0));
  CHECK(best == doctest::Approx(f2.sup_v).epsilon(1e-4));
}

TEST_CASE("criterion XA3") {
  auto par = check_XA3(eq("0", "8"), 0, 1);
  CHECK(par.fired());
  CHECK(par.certificate["max_lhs"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(check_XA3(eq("t", "-1-t^2"), -1, 2).fired());
  auto e = eq("1", "1");
  auto r = check_XA3(e, 0, 1);
  // p constant: the same v as the constant kernel with Q = 0
  ConstantKernel k(0.0, 1.0, 1.0, 0.0);
  double best = 0;
  for (int i = 1; i < 400; ++i) best = std::max(best, k.v(i / 400.0));
  CHECK(r.certificate["max_lhs"].get<double>() == doctest::Approx(best).epsilon(1e-5));
  CHECK(r.fired());
  CHECK(is_disconjugate(e, Interval::closed_open(0, 1)).disconjugate());
}

TEST_CASE("six conditions on the line") {
  const Interval w = Interval::closed(-10, 10);
  auto c5 = check_main(eq("t", "t^2/4+1/2"), w);
  CHECK(c5.fired());
  CHECK(c5.verdict.criterion == "main:condition5");
  auto fam = check_main(eq("t+sin(t)/2", "(t+sin(t)/2)^2/4+(1+cos(t)/2)/2"), w);
  CHECK(fam.verdict.criterion == "main:condition5");
  auto c1 = check_main(eq("0", "-1"), w);
  CHECK(c1.verdict.criterion == "main:condition1");

  // r = -R^2 with p = R(1 - c^2 e^{Rt/2}) / (1 + c^2 e^{Rt/2}), R = c = 1
  auto e6 = Equation::parse("(1-exp(t/2))/(1+exp(t/2))", "((1-exp(t/2))/(1+exp(t/2)))^2/4-1");
  MainOptions mo;
  mo.r = CoeffExpr::parse("-1");
  auto c6 = check_condition(e6, w, 6, mo);
  CHECK(c6.fired());
  // p' = -sech^2(t/4)/4 >= 2r as well, so the first branch fires first
  CHECK(c6.certificate["branch"] == "dop21");
  const auto& cand = c6.certificate["candidates"][0];
  CHECK(cand["dop22_literal"].get<bool>());
  CHECK(cand["dop22_corrected"].get<bool>());
  CHECK(std::abs(cand["dop22_max"].get<double>()) < 1e-12);
  CHECK(check_main(e6, w).fired());

  // a line segment: q = -1 + p/2 with gamma = 1, |k| = 1/2
  auto c2 = check_condition(eq("sin(t)", "-1+sin(t)/2"), w, 2);
  CHECK(c2.fired());
  CHECK(c2.certificate["slope"].get<double>() == doctest::Approx(0.5));

  auto c3 = check_condition(eq("2+sin(t)", "-1+(2+sin(t))-0.1"), w, 3);
  CHECK(c3.fired());
  CHECK(c3.certificate["region"] == "Mplus");

  auto c4 = check_condition(eq("t", "t^2/4-cos(t)^2"), w, 4);
  CHECK(c4.fired());
}

TEST_CASE("mirror branches are recorded, never used") {
  // p = -t, q = t^2/4 + 1/2 turns into y'' + y = 0 after removing the first derivative
  auto e = eq("-t", "t^2/4+1/2");
  const Interval w = Interval::closed(-10, 10);
  auto c5 = check_condition(e, w, 5);
  CHECK_FALSE(c5.fired());
  CHECK(c5.certificate["mirror_branch_literal"].get<bool>());
  CHECK(is_disconjugate(e, w).not_disconjugate());
  auto e4 = eq("-t", "t^2/4");
  auto c4 = check_condition(e4, w, 4);
  CHECK_FALSE(c4.fired());
  CHECK(c4.certificate["mirror_branch_literal"].get<bool>());
  CHECK(is_disconjugate(e4, w).not_disconjugate());
  CHECK_FALSE(check_main(e, w).fired());
}

TEST_CASE("non-differentiable p") {
  CHECK_THROWS_AS((void)check_main(eq("abs(t)", "1"), Interval::closed(-5, 5)), NonDifferentiableError);
  CHECK(check_main(eq("abs(t)", "-1"), Interval::closed(-5, 5)).fired());
}

TEST_CASE("regions of the (p,q)-plane") {
  const Interval w = Interval::closed(-10, 10);
  CHECK(RegionQuery::N().contains(2, 1));
  CHECK_FALSE(RegionQuery::O().contains(2, 1));
  CHECK(RegionQuery::Mplus(1).contains(2, 1));
  CHECK(RegionQuery::Mminus(1).contains(-2, 1));
  CHECK(RegionQuery::Mplus(1).to_string() == "Mplus(1)");
  CHECK_THROWS_AS((void)RegionQuery::Mplus(-1), PreconditionError);

  // inside N, yet oscillatory
  auto a = eq("-t/2", "t^2/16");
  CHECK(curve_in_region(a, w, RegionQuery::N()).inside);
  CHECK(is_disconjugate(a, Interval::closed(0, 2 * M_PI + 0.1)).not_disconjugate());
  // inside O, yet disconjugate
  auto b = eq("t", "t^2/4+1/2");
  CHECK(curve_in_region(b, w, RegionQuery::O()).inside);
  CHECK(is_disconjugate(b, w).disconjugate());
  // meets both
  auto c = eq("0", "sin(t)/(2+sin(t))");
  CHECK_FALSE(curve_in_region(c, w, RegionQuery::N()).inside);
  CHECK_FALSE(curve_in_region(c, w, RegionQuery::O()).inside);
}

TEST_CASE("gamma search lands inside N; D and condition 3 agree") {
  const Interval w = Interval::closed(-8, 8);
  for (auto [p, q] : {std::pair{"1", "0"}, {"sin(t)", "-2"}, {"2+cos(t)", "-0.5"}, {"t/4", "-1-t^2/64"},
                      {"-3", "2+0.1*sin(t)"}}) {
    auto e = eq(p, q);
    auto c3 = check_condition(e, w, 3);
    auto d = check_D(e, w);
    INFO(p << " " << q);
    CHECK(c3.fired() == d.fired());
    if (c3.fired()) {
      CHECK(curve_in_region(e, w, RegionQuery::N()).worst_excess <= 1e-9);
      CHECK(std::abs(c3.certificate["gamma"].get<double>()) ==
            doctest::Approx(std::abs(d.certificate["nu"].get<double>())).epsilon(1e-3));
    }
  }
}

TEST_CASE("half-line substitution") {
  auto z = substitute_half_line(eq("0", "0"), 0.0);
  CHECK(z.composed.p(1.3) == 0.0);
  CHECK(z.composed.q(1.3) == 0.0);

  const Interval half = Interval::open(0.0, kInf);
  auto eu = substitute_half_line(Equation::parse("3/t", "0", half), 0.0);
  for (double t : {0.5, 1.0, 2.0}) CHECK(eu.composed.p(t) == doctest::Approx(3 / (t * t)));
  CHECK(eu.composed.domain() == half);

  auto e = Equation::parse("0", "1/(1+t)", half);
  auto s = substitute_half_line(e, 0.0);
  for (double t : {0.0, 0.5, 2.0}) CHECK(s.composed.q(t) == doctest::Approx(1 / (1 + t * t)));
  // chain rule: y(tau) = x(tau^2) solves the transformed equation
  auto x = integrate_ivp(e, 1.0, 0.3, -0.7, 9.0, {1e-12, 1e-14});
  auto y = integrate_ivp(s.chain_rule, 1.0, 0.3, 2 * -0.7, 3.0, {1e-12, 1e-14});
  for (double tau : {1.2, 2.0, 2.9}) CHECK(y.x(tau) == doctest::Approx(x.x(tau * tau)).epsilon(1e-8));

  auto cmp = compare_half_line(e, 0.0);
  CHECK(cmp.chain_rule_agrees);
  CHECK(cmp.original.not_disconjugate());
}

TEST_CASE("run_all is sound and deterministic") {
  for (auto [p, q, iv] : {std::tuple{"0", "4", "[0,1]"}, {"t", "t^2/4+1/2", "[-3,3]"}, {"1", "0.2", "[0,2)"},
                          {"0", "9", "[0,2]"}, {"-t/2", "t^2/16", "[0,7]"}}) {
    auto e = eq(p, q);
    auto rep = run_all(e, Interval::parse(iv));
    INFO(p << " " << q << " " << iv);
    CHECK(rep.sound());
    RunOptions serial;
    serial.parallel = false;
    auto rep2 = run_all(e, Interval::parse(iv), serial);
    REQUIRE(rep.entries.size() == rep2.entries.size());
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      CHECK(rep.entries[i].name == rep2.entries[i].name);
      CHECK(rep.entries[i].verdict.kind == rep2.entries[i].verdict.kind);
    }
    auto j = rep.to_json();
    CHECK(j.is_array());
    CHECK(j[0].contains("criterion"));
    CHECK(j[0].contains("elapsed_ms"));
  }
  auto rep = run_all(eq("0", "4"), Interval::closed(0, 1));
  CHECK(rep.any_fired());
  auto none = run_all(eq("0", "9"), Interval::closed(0, 2));
  CHECK_FALSE(none.any_fired());
}
