#include "disconj/catalog.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <tuple>

#include "disconj/criteria.hpp"
#include "disconj/errors.hpp"
#include "disconj/periodic.hpp"
#include "disconj/text.hpp"

namespace disconj {

namespace {

using Check = std::function<FactResult()>;

double param(const ParamMap& over, const std::string& name, double fallback) {
  auto it = over.find(name);
  return it == over.end() ? fallback : it->second;
}

std::string num(double v) { return format_number(v); }

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

FactResult outcome(bool pass, std::string detail) { return {pass, std::move(detail)}; }

// rho+ (or rho-) against a closed form at several base points
Check rho_matches(const Equation& eq, std::vector<double> points, std::function<double(double)> closed, bool plus,
                  double window, double tol) {
  return [=] {
    double worst = 0.0, at = 0.0;
    for (double a : points) {
      const ExtendedPoint r = plus ? rho_plus(eq, a, a + window) : rho_minus(eq, a, a - window);
      if (!r.finite()) return outcome(false, "no conjugate point found from " + num(a));
      const double e = rel_err(r.value, closed(a));
      if (e > worst) {
        worst = e;
        at = a;
      }
    }
    return outcome(worst <= tol, "max relative error " + num(worst) + " at " + num(at));
  };
}

Check rho_sentinel(const Equation& eq, std::vector<double> points, bool plus, double window) {
  return [=] {
    for (double a : points) {
      const ExtendedPoint r = plus ? rho_plus(eq, a, a + window) : rho_minus(eq, a, a - window);
      if (r.finite()) return outcome(false, "finite conjugate point " + num(r.value) + " from " + num(a));
    }
    return outcome(true, "sentinel at all " + std::to_string(points.size()) + " points");
  };
}

Check oracle_is(const Equation& eq, Interval iv, VerdictKind want) {
  return [=] {
    const Verdict v = is_disconjugate(eq, iv);
    std::string d = to_string(v.kind) + " on " + iv.to_string();
    if (v.witness) d += ", zeros " + num(v.witness->z1) + ", " + num(v.witness->z2);
    return outcome(v.kind == want, d);
  };
}

Check witness_zeros(const Equation& eq, Interval iv, double z1, double z2, double tol) {
  return [=] {
    const Verdict v = is_disconjugate(eq, iv);
    if (!v.witness) return outcome(false, to_string(v.kind) + " without a witness");
    const double e = std::max(std::abs(v.witness->z1 - z1), std::abs(v.witness->z2 - z2));
    return outcome(v.not_disconjugate() && e <= tol,
                   "zeros " + num(v.witness->z1) + ", " + num(v.witness->z2) + " (error " + num(e) + ")");
  };
}

// Lu = 0 for an explicit solution u, on a grid
Check solves(const Equation& eq, std::string u, double lo, double hi, double tol) {
  return [=] {
    const Residual L(eq, CoeffExpr::parse(u));
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = lo + (hi - lo) * i / 400;
      const double scale = std::abs(L.ddu(t)) + std::abs(eq.p(t) * L.du(t)) + std::abs(eq.q(t) * L.u(t));
      worst = std::max(worst, std::abs(L(t)) / std::max(scale, 1e-300));
    }
    return outcome(worst <= tol, "max relative residual of " + u + ": " + num(worst));
  };
}

Check fires(std::function<CriterionResult()> run, std::string expect_tag = {}) {
  return [=] {
    const CriterionResult r = run();
    std::string d = r.name + ": " + to_string(r.verdict.kind);
    if (r.certificate.contains("condition")) d += " (condition " + r.certificate["condition"].dump() + ")";
    bool ok = r.fired();
    if (ok && !expect_tag.empty()) ok = r.verdict.criterion == expect_tag;
    return outcome(ok, d);
  };
}

Check region_is(const Equation& eq, Interval window, RegionQuery region, bool inside) {
  return [=] {
    const RegionCheck c = curve_in_region(eq, window, region);
    return outcome(c.inside == inside, std::string(c.inside ? "inside " : "outside ") + region.to_string() +
                                           ", worst excess " + num(c.worst_excess) + " at " + num(c.worst_t));
  };
}

KnownFact fact(std::string id, std::string statement, std::string source, Check check) {
  return {std::move(id), std::move(statement), std::move(source), std::move(check)};
}

CoeffExpr half_derivative_q(const CoeffExpr& p) {
  // q = p^2/4 + p'/2
  return pow(p, CoeffExpr::constant(2)) / CoeffExpr::constant(4) + p.differentiate() / CoeffExpr::constant(2);
}

}  // namespace

std::vector<CatalogEntry> catalog_list(const ParamMap& over) {
  std::vector<CatalogEntry> out;
  const Interval line = Interval::real_line();

  {
    const double A = param(over, "A", 2.0);
    auto eq = Equation::parse("-(A*sinh(t))/(A*cosh(t)-1)", "1/(A*cosh(t)-1)", line, {{"A", A}});
    auto closed = [A](double t) { return std::log((A - std::exp(t)) / (1 - A * std::exp(t))); };
    const double edge = -std::log(A);
    std::vector<double> left, right;
    for (int i = 0; i < 10; ++i) left.push_back(edge - 0.05 - 0.3 * i);
    for (int i = 0; i < 5; ++i) right.push_back(-edge + 0.05 + 0.3 * i);
    out.push_back({"cosh_family",
                   "p = -A sinh t / (A cosh t - 1), q = 1 / (A cosh t - 1)",
                   eq,
                   Interval::closed(-1, 1),
                   {fact("rho_plus_closed_form", "rho+(t) = ln((A - e^t)/(1 - A e^t)) for t < -ln A",
                         "closed-form conjugate point", rho_matches(eq, left, closed, true, 100, 1e-6)),
                    fact("rho_minus_closed_form", "rho-(t) = ln((A - e^t)/(1 - A e^t)) for t > ln A",
                         "closed-form conjugate point", rho_matches(eq, right, closed, false, 100, 1e-6)),
                    fact("rho_plus_sentinel", "rho+(t) = +inf for t >= -ln A", "closed-form conjugate point",
                         rho_sentinel(eq, {edge + 0.01, 0.0, 1.0}, true, 100))}});
  }
  {
    const double b = param(over, "b", 1.0);
    auto eq = Equation::parse("-(2*(2*t-b))/(t^2+(t-b)^2)", "4/(t^2+(t-b)^2)", line, {{"b", b}});
    auto closed = [b](double t) { return b * (t - b) / (2 * t - b); };
    std::vector<double> left;
    for (int i = 0; i < 20; ++i) left.push_back(-2 * b + (2.45 * b) * i / 19);
    out.push_back({"rational_family",
                   "p = -2(2t - b)/(t^2 + (t-b)^2), q = 4/(t^2 + (t-b)^2)",
                   eq,
                   Interval::closed(-b, 0.3 * b),
                   {fact("rho_plus_closed_form", "rho+(t) = b(t - b)/(2t - b) for t < b/2",
                         "closed-form conjugate point", rho_matches(eq, left, closed, true, 200, 1e-6)),
                    fact("rho_plus_sentinel", "rho+(t) = +inf for t >= b/2", "closed-form conjugate point",
                         rho_sentinel(eq, {0.5 * b, 0.6 * b, b, 2 * b}, true, 200)),
                    fact("rho_minus_sentinel", "rho-(t) = -inf for t <= b/2", "closed-form conjugate point",
                         rho_sentinel(eq, {0.4 * b, 0.0}, false, 200))}});
  }
  {
    auto eq = Equation::parse("0", "1");
    out.push_back({"harmonic",
                   "x'' + x = 0",
                   eq,
                   Interval::closed(0, 1.5),
                   {fact("rho_plus_pi", "rho+(0) = pi", "explicit solution sin t",
                         [eq] {
                           const auto r = rho_plus(eq, 0.0, 10.0);
                           return outcome(r.finite() && std::abs(r.value - M_PI) <= 1e-8, "rho+(0) = " + r.to_string());
                         }),
                    fact("disconjugate_below_pi", "disconjugate on [0, pi - 1e-3]", "explicit solution sin t",
                         oracle_is(eq, Interval::closed(0, M_PI - 1e-3), VerdictKind::GuaranteedDisconjugate)),
                    fact("witness_above_pi", "not disconjugate on [0, pi + 1e-3], zeros {0, pi}",
                         "explicit solution sin t", witness_zeros(eq, Interval::closed(0, M_PI + 1e-3), 0, M_PI, 1e-6)),
                    fact("constant_criterion", "complex characteristic roots: oscillatory", "constant coefficients",
                         [eq] {
                           auto r = check_constant(eq);
                           return outcome(r.verdict.not_disconjugate(), to_string(r.verdict.kind));
                         })}});
  }
  {
    const double k = param(over, "k", 3.0);
    const Interval half = Interval::open(0, kInf);
    auto eq = Equation::parse("k/t", "(k-1)^2/(4*t^2)", half, {{"k", k}});
    const std::string sol = "t^((1-" + num(k) + ")/2)";
    out.push_back({"euler",
                   "p = k/t, q = (k-1)^2/(4 t^2) on (0, inf)",
                   eq,
                   Interval::closed(0.5, 4),
                   {fact("euler_criterion", "q <= (k-1)^2/(4t^2) holds with equality", "boundary case of the bound",
                         fires([eq, half] { return check_euler(eq, half); })),
                    fact("double_root_solution", "t^((1-k)/2) solves the equation", "indicial double root",
                         solves(eq, sol, 0.1, 10, 1e-12)),
                    fact("oracle_disconjugate", "disconjugate on [0.01, 50]", "consequence of the criterion",
                         oracle_is(eq, Interval::closed(0.01, 50), VerdictKind::GuaranteedDisconjugate))}});
  }
  {
    const double delta = param(over, "delta", 0.05);
    auto fam = lyapunov_sharpness_family(delta);
    auto eq = fam.eq;
    out.push_back({"lyapunov_sharpness",
                   "q = -v''/v for a tent v with a smoothed top of half-width delta",
                   eq,
                   Interval::closed(0, 0.9),
                   {fact("integral_near_bound", "int q within 2% of 4/(1 - 2 delta)", "limit of the construction",
                         [fam] {
                           const double e = std::abs(fam.integral / fam.bound - 1);
                           return outcome(e <= 0.02, "int q = " + num(fam.integral) + ", bound " + num(fam.bound));
                         }),
                    fact("two_zeros", "not disconjugate on [0, 1]; zeros near 0 and 1", "v vanishes at 0 and 1",
                         witness_zeros(eq, Interval::closed(0, 1), 0, 1, 1e-6)),
                    fact("lyapunov_silent", "int q > 4, so the integral test says nothing", "the bound exceeds 4",
                         [eq] {
                           auto r = check_lyapunov(eq, 0, 1);
                           return outcome(r.verdict.kind == VerdictKind::Inconclusive, to_string(r.verdict.kind));
                         })}});
  }
  {
    auto eq = Equation::parse("0", "sin(t)/(2+sin(t))");
    out.push_back({"sin_ratio",
                   "x'' + sin t/(2 + sin t) x = 0",
                   eq,
                   Interval::closed(0, 2 * M_PI),
                   {fact("periodic_solution", "2 + sin t is a solution", "explicit solution",
                         solves(eq, "2+sin(t)", -10, 10, 1e-13)),
                    fact("test_function", "v = 2 + sin t certifies [-10, 10]", "explicit positive solution",
                         fires([eq] {
                           return check_vallee_poussin(eq, Interval::closed(-10, 10), CoeffExpr::parse("2+sin(t)"));
                         })),
                    fact("oracle_disconjugate", "disconjugate on [-20, 20]", "positive solution on the line",
                         oracle_is(eq, Interval::closed(-20, 20), VerdictKind::GuaranteedDisconjugate)),
                    fact("unit_eigenvalue", "period map over [0, 2 pi] has eigenvalue 1, det 1",
                         "periodic solution, p = 0",
                         [eq] {
                           auto m = monodromy(eq, 0, 2 * M_PI);
                           return outcome(m.unit_eigen_distance <= 1e-6 && std::abs(m.det - 1) <= 1e-7,
                                          "min |lambda - 1| = " + num(m.unit_eigen_distance) + ", det " + num(m.det));
                         }),
                    fact("has_periodic", "sign-changing q; a 2 pi-periodic solution exists", "periodic solution",
                         [eq] {
                           auto v = check_theorem_periodic(eq, 2 * M_PI, Interval::closed(-20, 20));
                           return outcome(v.kind == PeriodicKind::HasPeriodic && !v.theorem_applied,
                                          to_string(v.kind));
                         })}});
  }
  for (const auto& [tag, p_src, v_src] : {std::tuple{"t", "t", "exp(-t^2/4)"},
                                          std::tuple{"tanh", "tanh(t)", "1/sqrt(cosh(t))"},
                                          std::tuple{"cubic", "t+t^3/10", "exp(-t^2/4-t^4/80)"}}) {
    const CoeffExpr p = CoeffExpr::parse(p_src);
    auto eq = Equation(p, half_derivative_q(p));
    const std::string v = v_src;
    out.push_back({std::string("condition5_identity_") + tag,
                   "p = " + std::string(p_src) + ", q = p^2/4 + p'/2",
                   eq,
                   Interval::closed(-2, 2),
                   {fact("condition5", "condition 5 holds as an identity", "q = p^2/4 + p'/2 with p' >= 0",
                         fires([eq] { return check_main(eq, Interval::closed(-10, 10)); }, "main:condition5")),
                    fact("solution", v + " solves the equation", "v = exp(-int p/2)", solves(eq, v, -5, 5, 1e-10)),
                    fact("oracle_disconjugate", "disconjugate on [-10, 10]", "positive solution",
                         oracle_is(eq, Interval::closed(-10, 10), VerdictKind::GuaranteedDisconjugate))}});
  }
  {
    auto eq = Equation::parse("t", "t^2/4+1/2");
    const Interval w = Interval::closed(-20, 20);
    out.push_back({"gauss_bell",
                   "x'' + t x' + (t^2/4 + 1/2) x = 0",
                   eq,
                   Interval::closed(-3, 3),
                   {fact("bell_solution", "x(0) = 1, x'(0) = 0 gives exp(-t^2/4); x(3) = e^{-9/4}",
                         "explicit solution",
                         [eq] {
                           const double x3 = integrate_ivp(eq, 0, 1, 0, 3).final_state().x;
                           const double e = rel_err(x3, std::exp(-2.25));
                           return outcome(e <= 1e-8, "x(3) = " + num(x3) + ", relative error " + num(e));
                         }),
                    fact("condition5", "condition 5 certifies the line", "q = p^2/4 + p'/2, p' = 1",
                         fires([eq, w] { return check_main(eq, w); }, "main:condition5")),
                    fact("curve_in_O", "the curve (p, q) lies in O", "p^2 - 4q = -2 < 0", region_is(eq, w, RegionQuery::O(), true)),
                    fact("oracle_disconjugate", "disconjugate on [-20, 20]", "positive solution",
                         oracle_is(eq, w, VerdictKind::GuaranteedDisconjugate))}});
  }
  {
    auto eq = Equation::parse("-t/2", "t^2/16");
    out.push_back({"osc_counterexample",
                   "x'' - (t/2) x' + (t^2/16) x = 0",
                   eq,
                   Interval::closed(0, 6),
                   {fact("solution", "exp(t^2/8) sin(t/2) solves the equation", "explicit solution",
                         solves(eq, "exp(t^2/8)*sin(t/2)", 0.1, 6, 1e-10)),
                    fact("two_zeros", "not disconjugate on [0, 2 pi + 0.1]; zeros 0 and 2 pi", "explicit solution",
                         witness_zeros(eq, Interval::closed(0, 2 * M_PI + 0.1), 0, 2 * M_PI, 1e-6)),
                    fact("curve_in_N", "the curve (p, q) lies in N", "p^2 - 4q = 0",
                         region_is(eq, Interval::closed(0, 2 * M_PI + 0.1), RegionQuery::N(), true))}});
  }
  {
    const double R = param(over, "R", 1.0), c = param(over, "c", 1.0);
    const std::string p_src = "R*(1-c^2*exp(R*t/2))/(1+c^2*exp(R*t/2))";
    auto eq = Equation::parse(p_src, "(" + p_src + ")^2/4-R^2", line, {{"R", R}, {"c", c}});
    MainOptions mo;
    mo.r = CoeffExpr::constant(-R * R);
    const Interval w = Interval::closed(-20, 20);
    out.push_back({"condition6_identity",
                   "p = R(1 - c^2 e^{Rt/2})/(1 + c^2 e^{Rt/2}), q = p^2/4 - R^2",
                   eq,
                   Interval::closed(-3, 3),
                   {fact("second_branch_identity", "p^2 - 4p' + r = 0 with r = -R^2", "Riccati equation for p",
                         [eq, mo, w] {
                           auto r = check_condition(eq, w, 6, mo);
                           const auto& cand = r.certificate["candidates"][0];
                           const double m = cand["dop22_max"].get<double>();
                           const bool ok = cand["dop22_literal"].get<bool>() && std::abs(m) <= 1e-9;
                           return outcome(ok, "max of p^2 - 4p' + r: " + num(m));
                         }),
                    fact("condition6", "condition 6 certifies the line with r = -R^2", "q = p^2/4 + r",
                         fires([eq, mo, w] { return check_condition(eq, w, 6, mo); })),
                    fact("oracle_disconjugate", "disconjugate on [-20, 20]", "consequence of condition 6",
                         oracle_is(eq, w, VerdictKind::GuaranteedDisconjugate))}});
  }
  {
    auto eq = Equation::parse("1", "0.2");
    out.push_back({"constant_damped",
                   "x'' + x' + 0.2 x = 0",
                   eq,
                   Interval::closed(0, 5),
                   {fact("constant_criterion", "real characteristic roots", "discriminant 0.2 > 0",
                         fires([eq] { return check_constant(eq); })),
                    fact("no_periodic", "no nontrivial 2 pi-periodic solution; spectrum 0.1 away from 1",
                         "closed-form eigenvalues exp(2 pi lambda)",
                         [eq] {
                           auto v = check_theorem_periodic(eq, 2 * M_PI, Interval::closed(-20, 20));
                           const bool ok = v.theorem_applied && v.kind == PeriodicKind::NoNontrivialPeriodic &&
                                           v.monodromy.unit_eigen_distance >= 0.1;
                           return outcome(ok, to_string(v.kind) + ", min |lambda - 1| = " +
                                                  num(v.monodromy.unit_eigen_distance));
                         })}});
  }
  return out;
}

std::vector<FactRun> run_catalog(const std::vector<CatalogEntry>& entries, const std::vector<std::string>& ids,
                                 bool parallel) {
  std::vector<const CatalogEntry*> chosen;
  if (ids.empty() || (ids.size() == 1 && ids[0] == "all")) {
    for (const auto& e : entries) chosen.push_back(&e);
  } else {
    for (const auto& id : ids) {
      auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.id == id; });
      if (it == entries.end()) throw PreconditionError("unknown catalog entry '" + id + "'");
      chosen.push_back(&*it);
    }
  }
  auto run_one = [](const CatalogEntry* e, const KnownFact* f) {
    FactRun r{e->id, f->id, f->statement, f->source, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.result = f->check();
    } catch (const Error& ex) {
      r.result = {false, std::string("error: ") + ex.what()};
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  std::vector<std::future<FactRun>> jobs;
  std::vector<FactRun> out;
  for (const auto* e : chosen) {
    for (const auto& f : e->facts) {
      if (parallel) jobs.push_back(std::async(std::launch::async, run_one, e, &f));
      else out.push_back(run_one(e, &f));
    }
  }
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

Json to_json(const CatalogEntry& e) {
  Json facts = Json::array();
  for (const auto& f : e.facts) facts.push_back({{"id", f.id}, {"statement", f.statement}, {"source", f.source}});
  Json params = Json::object();
  for (const auto& [k, v] : e.equation.params()) params[k] = v;
  return {{"id", e.id},
          {"description", e.description},
          {"p", e.equation.p_expr().to_string()},
          {"q", e.equation.q_expr().to_string()},
          {"params", params},
          {"domain", to_json(e.equation.domain())},
          {"disconjugate_on", to_json(e.disconjugate_on)},
          {"known_facts", facts}};
}

Json to_json(const FactRun& r, bool with_timing) {
  Json j{{"entry", r.entry},       {"fact", r.fact},           {"statement", r.statement},
         {"source", r.source},     {"pass", r.result.pass},    {"detail", r.result.detail}};
  if (with_timing) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

}  // namespace disconj
