#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "disconj/catalog.hpp"
#include "disconj/criteria.hpp"
#include "disconj/errors.hpp"
#include "disconj/factorization.hpp"
#include "disconj/green.hpp"
#include "disconj/periodic.hpp"
#include "disconj/text.hpp"

namespace disconj::suites {
namespace {

class Tally {
 public:
  void instance() { ++r_.instances; }
  void fail(const std::string& what) {
    ++r_.failures;
    if (r_.failed.size() < 10) r_.failed.push_back(what);
  }
  SuiteResult done(const std::string& detail, int min_instances = 0) {
    r_.pass = r_.failures == 0 && r_.instances >= min_instances;
    r_.detail = detail;
    if (r_.instances < min_instances) {
      r_.detail += " (only " + std::to_string(r_.instances) + " instances, need " + std::to_string(min_instances) + ")";
    }
    return r_;
  }

 private:
  SuiteResult r_;
};

std::string n(double v) { return "(" + format_number(v) + ")"; }
std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}
double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double u(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
  int pick(int k) { return std::uniform_int_distribution<int>(0, k - 1)(g_); }

 private:
  std::mt19937_64 g_;
};

// p small, q positive and large enough to oscillate
Equation oscillatory(Rng& rng, std::string* text = nullptr) {
  const std::string p = n(rng.u(-0.8, 0.8)) + "*sin(t)+" + n(rng.u(-0.5, 0.5));
  const std::string q = n(rng.u(3, 7)) + "+" + n(rng.u(-1, 1)) + "*cos(t)+" + n(rng.u(-0.3, 0.3)) + "*t/10";
  if (text) *text = "p=" + p + " q=" + q;
  return Equation::parse(p, q);
}

std::vector<double> zeros_of(const Trajectory& y, double lo, double hi) {
  std::vector<double> out;
  for (const auto& z : find_zeros(y, Interval::closed(lo, hi))) out.push_back(z.t);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// property suites

SuiteResult sturm_separation(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  const double L = 10.0;
  int pairs = 0;
  for (int i = 0; i < count; ++i) {
    std::string txt;
    const Equation eq = oscillatory(rng, &txt);
    const double th = rng.u(-M_PI / 2 + 0.2, M_PI / 2 - 0.2);
    const Trajectory y1 = integrate_ivp(eq, 0, 0, 1, L);
    const Trajectory y2 = integrate_ivp(eq, 0, std::cos(th), std::sin(th), L);
    auto z1 = zeros_of(y1, 0, L);
    const auto z2 = zeros_of(y2, 0, L);
    if (z1.empty() || z1.front() > 1e-9) z1.insert(z1.begin(), 0.0);
    if (z1.size() < 3) continue;
    t.instance();
    for (std::size_t k = 0; k + 1 < z1.size(); ++k) {
      const auto between =
          std::count_if(z2.begin(), z2.end(), [&](double z) { return z > z1[k] && z < z1[k + 1]; });
      ++pairs;
      if (between != 1) {
        t.fail(txt + ": " + std::to_string(between) + " zeros between " + num(z1[k]) + " and " + num(z1[k + 1]));
      }
    }
  }
  return t.done("one zero of y2 between consecutive zeros of y1 on " + std::to_string(pairs) + " gaps", 50);
}

SuiteResult sturm_comparison(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  int finite = 0;
  for (int i = 0; i < count; ++i) {
    const std::string p = n(rng.u(-1, 1)) + "*sin(t)+" + n(rng.u(-0.5, 0.5)) + "*t/5";
    const std::string q2 = n(rng.u(0.3, 4)) + "+" + n(rng.u(-0.5, 0.5)) + "*cos(2*t)";
    const std::string gap = n(rng.u(0, 1)) + "+" + n(rng.u(0, 1)) + "*sin(t)^2";
    const Equation big = Equation::parse(p, q2);
    const Equation small = Equation::parse(p, q2 + "-(" + gap + ")");
    const std::string txt = "p=" + p + " q2=" + q2 + " q2-q1=" + gap;
    t.instance();
    const auto r2 = rho_plus(big, 0, 40);
    const auto r1 = rho_plus(small, 0, 40);
    if (r2.finite()) {
      ++finite;
      if (r1.finite() && r1.value < r2.value * (1 - 1e-9) - 1e-9) {
        t.fail(txt + ": rho+ " + num(r1.value) + " below " + num(r2.value));
      }
    } else if (r1.finite()) {
      t.fail(txt + ": smaller q has a conjugate point, larger q none");
    }
    const Interval iv = Interval::closed(0, rng.u(0.5, 6));
    if (is_disconjugate(big, iv).disconjugate() && is_disconjugate(small, iv).not_disconjugate()) {
      t.fail(txt + ": disconjugacy lost on " + iv.to_string() + " after lowering q");
    }
  }
  return t.done("q1 <= q2 keeps disconjugacy; rho+ of q1 never earlier (" + std::to_string(finite) +
                    " with finite rho+)",
                50);
}

SuiteResult rho_monotone_inverse(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  double worst_inv = 0.0;
  for (int i = 0; i < count; ++i) {
    std::string txt;
    const Equation eq = oscillatory(rng, &txt);
    const double a1 = rng.u(-2, 2);
    const double a2 = a1 + rng.u(0.05, 1.0);
    const auto r1 = rho_plus(eq, a1, a1 + 60);
    const auto r2 = rho_plus(eq, a2, a2 + 60);
    if (!r1.finite() || !r2.finite()) continue;
    t.instance();
    if (!(r1.value < r2.value)) t.fail(txt + ": rho+ not increasing at " + num(a1) + ", " + num(a2));
    const auto back = rho_minus(eq, r1.value, r1.value - 60);
    const auto m1 = rho_minus(eq, a1, a1 - 60);
    const auto m2 = rho_minus(eq, a2, a2 - 60);
    if (!back.finite()) {
      t.fail(txt + ": rho-(rho+(a)) missing");
      continue;
    }
    const double e = std::abs(back.value - a1) / (1 + std::abs(a1));
    worst_inv = std::max(worst_inv, e);
    if (e > 1e-7) t.fail(txt + ": rho-(rho+(a)) - a = " + num(back.value - a1));
    if (m1.finite() && m2.finite() && !(m1.value < m2.value)) t.fail(txt + ": rho- not increasing");
  }
  return t.done("rho+ and rho- strictly increasing, rho-(rho+(a)) = a within " + num(worst_inv), 50);
}

SuiteResult abel_identity(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const std::string p =
        n(rng.u(-2, 2)) + "+" + n(rng.u(-1, 1)) + "*sin(t)+" + n(rng.u(-0.5, 0.5)) + "*t^2/10";
    const std::string q = n(rng.u(-3, 6)) + "+" + n(rng.u(-2, 2)) + "*cos(3*t)";
    const Equation eq = Equation::parse(p, q);
    const double a = rng.u(-2, 2);
    const double b = a + rng.u(0.5, 5);
    const auto w = wronskian(eq, a, b);
    t.instance();
    worst = std::max(worst, w.rel_diff);
    if (w.rel_diff > 1e-6) t.fail("p=" + p + " q=" + q + ": Abel gap " + num(w.rel_diff));
  }
  return t.done("W(t)/W(a) = exp(-int p), worst relative gap " + num(worst), 50);
}

SuiteResult soundness_sweep(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  int fired = 0, witnessed = 0;
  for (int i = 0; i < count; ++i) {
    std::string p, q;
    switch (rng.pick(4)) {
      case 0: p = n(rng.u(-2, 2)) + "+" + n(rng.u(-1, 1)) + "*t"; break;
      case 1: p = n(rng.u(-2, 2)) + "+" + n(rng.u(-1.5, 1.5)) + "*sin(" + n(rng.u(0.5, 3)) + "*t)"; break;
      case 2: p = n(rng.u(-1, 1)) + "*t^2+" + n(rng.u(-1, 1)); break;
      default: p = "0"; break;
    }
    switch (rng.pick(4)) {
      case 0: q = n(rng.u(-3, 6)) + "+" + n(rng.u(-1, 1)) + "*t"; break;
      case 1: q = n(rng.u(-2, 8)) + "+" + n(rng.u(-2, 2)) + "*cos(" + n(rng.u(0.5, 3)) + "*t)"; break;
      case 2: q = n(rng.u(-1, 4)) + "-" + n(rng.u(0, 1)) + "*t^2"; break;
      default: q = n(rng.u(-1, 10)); break;
    }
    const double lo = rng.u(-2, 2);
    const double len = rng.u(0.2, 5);
    const Interval iv = rng.pick(5) == 0 ? Interval::closed_open(lo, lo + len) : Interval::closed(lo, lo + len);
    const Equation eq = Equation::parse(p, q);
    const std::string txt = "p=" + p + " q=" + q + " on " + iv.to_string();
    t.instance();
    RunOptions ro;
    const CriteriaReport rep = run_all(eq, iv, ro);
    for (const auto& v : rep.violations) t.fail(txt + ": " + v.criterion + " contradicts the oracle");
    const Verdict oracle = is_disconjugate(eq, iv);
    if (oracle.not_disconjugate()) ++witnessed;
    bool any = false;
    for (const auto& e : rep.entries) {
      if (!e.fired()) continue;
      any = true;
      // the claim covers the queried interval or the one the criterion names
      const Interval claim = e.verdict.examined ? *e.verdict.examined : rep.examined;
      const Verdict check = is_disconjugate(eq, claim.finite() ? claim : rep.examined);
      if (check.not_disconjugate()) t.fail(txt + ": " + e.name + " certifies " + claim.to_string());
      if (oracle.not_disconjugate() && claim.contains(iv)) t.fail(txt + ": " + e.name + " against a witness");
    }
    if (any) ++fired;
  }
  return t.done(std::to_string(fired) + " instances certified by some criterion, " +
                    std::to_string(witnessed) + " with an oracle witness, 0 contradictions allowed",
                200);
}

SuiteResult rolle_pairs(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  int tight = 0;
  for (int i = 0; i < count; ++i) {
    Equation eq = Equation::parse("0", "0");
    Interval iv = Interval::closed(0, 1);
    std::string txt;
    for (int attempt = 0; attempt < 50; ++attempt) {
      const std::string p = n(rng.u(-1, 1)) + "*sin(t)+" + n(rng.u(-1, 1));
      const std::string q = n(rng.u(-1, 2)) + "+" + n(rng.u(-0.5, 0.5)) + "*cos(t)";
      eq = Equation::parse(p, q);
      iv = Interval::closed(0, rng.u(1, 2.5));
      txt = "p=" + p + " q=" + q + " on " + iv.to_string();
      if (is_disconjugate(eq, iv).disconjugate()) break;
    }
    const double L = iv.hi();
    std::string u;
    switch (rng.pick(3)) {
      case 0: u = "sin(" + n(rng.u(2, 12)) + "*t+" + n(rng.u(0, 3)) + ")*(" + n(rng.u(1, 2)) + "+t)"; break;
      case 1: {
        std::vector<double> r{rng.u(0.05, 0.95) * L, rng.u(0.05, 0.95) * L, rng.u(0.05, 0.95) * L};
        u = "(t-" + n(r[0]) + ")*(t-" + n(r[1]) + ")*(t-" + n(r[2]) + ")";
        break;
      }
      default: u = "cos(" + n(rng.u(3, 15)) + "*t)+" + n(rng.u(-0.9, 0.9)); break;
    }
    const RolleCount rc = generalized_rolle_check(eq, iv, CoeffExpr::parse(u));
    t.instance();
    if (rc.k == rc.m - 2) ++tight;
    if (!rc.holds()) {
      t.fail(txt + " u=" + u + ": m=" + std::to_string(rc.m) + " k=" + std::to_string(rc.k));
    }
  }
  // tightness: a cubic under x'' = 0 has three zeros, its second derivative one
  const RolleCount cubic =
      generalized_rolle_check(Equation::parse("0", "0"), Interval::closed(0, 4), CoeffExpr::parse("(t-1)*(t-2)*(t-3)"));
  if (!(cubic.m == 3 && cubic.k == 1)) t.fail("cubic: m=" + std::to_string(cubic.m) + " k=" + std::to_string(cubic.k));
  return t.done("k >= m - 2 on every pair; " + std::to_string(tight) + " random pairs tight, cubic m=3 k=1", 50);
}

SuiteResult periodic_consistency(int count, std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  int applied = 0;
  for (int i = 0; i < count; ++i) {
    const double T = rng.u(1, 8);
    const std::string w = n(2 * M_PI / T);
    std::string p, q;
    if (i % 2 == 0) {
      // q < 0: the curve sits in a half-plane below the p-axis
      const double d = rng.u(0.2, 2);
      p = n(rng.u(-2, 2)) + "+" + n(rng.u(-1, 1)) + "*sin(" + w + "*t)";
      q = "-" + n(d) + "-" + n(rng.u(0, 0.9) * d) + "*cos(" + w + "*t)";
    } else {
      // constant p, 0 < q <= p^2/4
      const double c = rng.u(1, 3);
      const double top = c * c / 4;
      const double d = rng.u(0.3, 0.7) * top;
      const double f = rng.u(0, 0.9) * std::min(d, top - d);
      p = n(c);
      q = n(d) + "+" + n(f) + "*cos(" + w + "*t)";
    }
    const Equation eq = Equation::parse(p, q);
    const std::string txt = "p=" + p + " q=" + q + " T=" + num(T);
    const PeriodicVerdict v = check_theorem_periodic(eq, T, Interval::closed(-20, 20));
    t.instance();
    if (!v.hypotheses.all_hold()) {
      t.fail(txt + ": hypotheses not recognized (" + v.hypotheses.disconjugacy_source + ")");
      continue;
    }
    if (!v.theorem_applied) continue;
    ++applied;
    if (v.kind == PeriodicKind::HasPeriodic) t.fail(txt + ": periodic solution despite the theorem");
    if (v.cross_validated && !*v.cross_validated) t.fail(txt + ": monodromy disagrees");
    if (!v.base_point_agrees) t.fail(txt + ": base point changes the verdict");
  }
  if (applied < count / 2) t.fail("theorem applied on only " + std::to_string(applied) + " instances");
  return t.done("theorem applied on " + std::to_string(applied) + " sign-definite periodic instances, monodromy agrees",
                20);
}

// ---------------------------------------------------------------------------
// acceptance items

SuiteResult conjugate_point_goldens() {
  Tally t;
  const Equation rational =
      Equation::parse("-(2*(2*t-b))/(t^2+(t-b)^2)", "4/(t^2+(t-b)^2)", Interval::real_line(), {{"b", 1.0}});
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = -2 + 2.45 * i / 19;
    t.instance();
    const auto r = rho_plus(rational, a, a + 200);
    const double expect = (a - 1) / (2 * a - 1);
    if (!r.finite()) {
      t.fail("rational family: no rho+ from " + num(a));
      continue;
    }
    worst = std::max(worst, rel(r.value, expect));
    if (rel(r.value, expect) > 1e-6) t.fail("rational family at " + num(a) + ": " + num(r.value));
  }
  for (double a : {0.5, 0.6, 1.0, 2.0, 10.0}) {
    t.instance();
    if (rho_plus(rational, a, a + 200).finite()) t.fail("rational family: finite rho+ from " + num(a));
  }
  const double A = 2.0;
  const Equation cosh_fam =
      Equation::parse("-(A*sinh(t))/(A*cosh(t)-1)", "1/(A*cosh(t)-1)", Interval::real_line(), {{"A", A}});
  double worst3a = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double a = -3 + (std::log(0.5) - 0.05 + 3) * i / 9;
    t.instance();
    const auto r = rho_plus(cosh_fam, a, a + 200);
    const double expect = std::log((A - std::exp(a)) / (1 - A * std::exp(a)));
    if (!r.finite()) {
      t.fail("cosh family: no rho+ from " + num(a));
      continue;
    }
    worst3a = std::max(worst3a, rel(r.value, expect));
    if (rel(r.value, expect) > 1e-6) t.fail("cosh family at " + num(a) + ": " + num(r.value));
  }
  return t.done("rational family max rel error " + num(worst) + ", sentinel for t >= 0.5; cosh family max rel error " +
                num(worst3a));
}

SuiteResult harmonic_calibration() {
  Tally t;
  const Equation h = Equation::parse("0", "1");
  const auto r = rho_plus(h, 0, 200);
  t.instance();
  const double err = r.finite() ? std::abs(r.value - M_PI) : kInf;
  if (err > 1e-8) t.fail("rho+(0) - pi = " + num(err));
  t.instance();
  if (!is_disconjugate(h, Interval::closed(0, M_PI - 1e-3)).disconjugate()) t.fail("[0, pi - 1e-3] not disconjugate");
  t.instance();
  const Verdict v = is_disconjugate(h, Interval::closed(0, M_PI + 1e-3));
  double zerr = kInf;
  if (v.not_disconjugate() && v.witness) {
    zerr = std::max(std::abs(v.witness->z1), std::abs(v.witness->z2 - M_PI));
  }
  if (zerr > 1e-6) t.fail("witness on [0, pi + 1e-3] off by " + num(zerr));
  return t.done("|rho+(0) - pi| = " + num(err) + ", witness zeros within " + num(zerr));
}

SuiteResult lyapunov_boundary_and_sharpness() {
  Tally t;
  const Equation four = Equation::parse("0", "4");
  t.instance();
  const auto ly = check_lyapunov(four, 0, 1);
  if (!ly.fired()) t.fail("q = 4 on [0, 1]: " + to_string(ly.verdict.kind));
  t.instance();
  if (!is_disconjugate(four, Interval::closed(0, 1)).disconjugate()) t.fail("oracle: q = 4 on [0, 1]");
  const SharpnessFamily fam = lyapunov_sharpness_family(0.05);
  t.instance();
  const double gap = std::abs(fam.integral / fam.bound - 1);
  if (gap > 0.02) t.fail("integral " + num(fam.integral) + " vs bound " + num(fam.bound));
  t.instance();
  if (!is_disconjugate(fam.eq, Interval::closed(0, 1)).not_disconjugate()) t.fail("family not conjugate on [0, 1]");
  return t.done("equality case certified; family integral within " + num(100 * gap) + "% of 4/(1 - 2 delta)");
}

SuiteResult dichotomy_pair() {
  Tally t;
  const Equation osc = Equation::parse("-t/2", "t^2/16");
  const Interval w1 = Interval::closed(0, 2 * M_PI + 0.1);
  t.instance();
  const Verdict v = is_disconjugate(osc, w1);
  double zerr = kInf;
  if (v.not_disconjugate() && v.witness) {
    zerr = std::max(std::abs(v.witness->z1), std::abs(v.witness->z2 - 2 * M_PI));
  }
  if (zerr > 1e-6) t.fail("p = -t/2: witness zeros off by " + num(zerr));
  t.instance();
  if (!curve_in_region(osc, w1, RegionQuery::N()).inside) t.fail("p = -t/2: curve leaves N");

  const Equation bell = Equation::parse("t", "t^2/4+1/2");
  const Interval w2 = Interval::closed(-20, 20);
  t.instance();
  const auto m = check_main(bell, w2);
  if (!(m.fired() && m.verdict.criterion == "main:condition5")) t.fail("p = t: " + m.verdict.criterion);
  t.instance();
  if (!is_disconjugate(bell, w2).disconjugate()) t.fail("p = t: oracle disagrees");
  t.instance();
  if (!curve_in_region(bell, w2, RegionQuery::O()).inside) t.fail("p = t: curve leaves O");
  return t.done("curve in N yet conjugate (zeros within " + num(zerr) + "); curve in O yet condition 5 certifies");
}

SuiteResult green_suite() {
  Tally t;
  std::mt19937_64 g(11);
  int entries = 0;
  for (const auto& e : catalog_list()) {
    const double a = e.disconjugate_on.lo(), b = e.disconjugate_on.hi();
    const bool p_zero = e.equation.p_constant() && e.equation.p(0.5 * (a + b)) == 0.0;
    ++entries;
    t.instance();
    const GreenFunction gf = green_function(e.equation, a, b);
    const GreenCheck c = verify_green(gf, 12, p_zero);
    if (c.boundary > 1e-8) t.fail(e.id + ": boundary " + num(c.boundary));
    if (c.jump_error > 1e-6) t.fail(e.id + ": jump error " + num(c.jump_error));
    if (p_zero && c.identity_gap > 1e-8) t.fail(e.id + ": identity gap " + num(c.identity_gap));
    std::uniform_real_distribution<double> u(a, b);
    int negative = 0;
    for (int i = 0; i < 100; ++i) {
      const double tt = u(g), s = u(g);
      if (gf(tt, s) < 0) ++negative;
    }
    if (negative != 100) t.fail(e.id + ": G < 0 at only " + std::to_string(negative) + " of 100 points");
    const BvpSolution x = solve_bvp(e.equation, CoeffExpr::parse("1+t^2"), a, b, {}, 64);
    double worst = std::max(std::abs(x.x(a)), std::abs(x.x(b)));
    for (int i = 1; i < 20; ++i) worst = std::max(worst, x.relative_residual(a + (b - a) * i / 20));
    if (worst > 1e-6) t.fail(e.id + ": BVP residual " + num(worst));
  }
  return t.done(std::to_string(entries) + " catalog intervals: boundary, unit jump, sign, BVP residual");
}

SuiteResult factorization_and_rolle() {
  Tally t;
  Rng rng(21);
  int tests = 0;
  for (const auto& e : catalog_list()) {
    t.instance();
    const Factorization f = build_factorization(e.equation, e.disconjugate_on);
    const FactorizationCheck c = check_factorization(f);
    if (c.product_error > 1e-8) t.fail(e.id + ": product error " + num(c.product_error));
    if (!(c.min_factor > 0)) t.fail(e.id + ": factor not positive");
    const double a = e.disconjugate_on.lo(), b = e.disconjugate_on.hi();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < 10; ++k) {
      std::string u;
      switch (k % 5) {
        case 0: u = n(rng.u(-1, 1)) + "+" + n(rng.u(-1, 1)) + "*t+" + n(rng.u(-1, 1)) + "*t^2"; break;
        case 1: u = "sin(" + n(rng.u(0.5, 4) / half) + "*t+" + n(rng.u(0, 3)) + ")"; break;
        case 2: u = "exp(" + n(rng.u(-1, 1) / half) + "*t)*cos(" + n(rng.u(0.5, 3) / half) + "*t)"; break;
        case 3: u = "1/(1+" + n(rng.u(0.2, 2) / (half * half)) + "*(t-" + n(mid + rng.u(-1, 1) * half) + ")^2)"; break;
        default: u = "(t-" + n(mid) + ")^3-" + n(rng.u(0, 1) * half * half) + "*t"; break;
      }
      const FactoredResidual r = verify_factorization(f, CoeffExpr::parse(u));
      ++tests;
      if (r.max_abs > 1e-6 * (1 + r.scale)) t.fail(e.id + " u=" + u + ": residual " + num(r.max_abs));
    }
  }
  const SuiteResult rolle = rolle_pairs();
  for (const auto& f : rolle.failed) t.fail(f);
  if (!rolle.pass) t.fail("Rolle: " + rolle.detail);
  return t.done("product identity on every catalog interval; " + std::to_string(tests) +
                " factored residuals; Rolle on " + std::to_string(rolle.instances) + " pairs: " + rolle.detail);
}

SuiteResult periodic_suite() {
  Tally t;
  const Equation ratio = Equation::parse("0", "sin(t)/(2+sin(t))");
  const MonodromyReport m = monodromy(ratio, 0, 2 * M_PI);
  t.instance();
  if (m.unit_eigen_distance > 1e-6) t.fail("sin ratio: eigenvalue distance " + num(m.unit_eigen_distance));
  const double det_gap = std::abs(m.det - m.det_expected);
  if (det_gap > 1e-7) t.fail("sin ratio: Liouville gap " + num(det_gap));
  const Equation damped = Equation::parse("1", "0.2");
  const PeriodicVerdict v = check_theorem_periodic(damped, 2 * M_PI, Interval::closed(-20, 20));
  t.instance();
  if (!v.hypotheses.all_hold()) t.fail("p = 1, q = 0.2: hypotheses");
  if (v.monodromy.unit_eigen_distance < 0.1) t.fail("p = 1, q = 0.2: spectrum near 1");
  const SuiteResult random = periodic_consistency();
  for (const auto& f : random.failed) t.fail(f);
  if (!random.pass) t.fail("random families: " + random.detail);
  return t.done("eigenvalue within " + num(m.unit_eigen_distance) + " of 1, det gap " + num(det_gap) +
                "; damped spectrum " + num(v.monodromy.unit_eigen_distance) + " from 1; " + random.detail);
}

SuiteResult property_suites() {
  Tally t;
  std::string detail;
  for (const auto& [name, run] : std::vector<std::pair<std::string, std::function<SuiteResult()>>>{
           {"separation", [] { return sturm_separation(); }},
           {"comparison", [] { return sturm_comparison(); }},
           {"rho", [] { return rho_monotone_inverse(); }},
           {"abel", [] { return abel_identity(); }}}) {
    const SuiteResult r = run();
    t.instance();
    for (const auto& f : r.failed) t.fail(name + ": " + f);
    if (!r.pass) t.fail(name + ": " + r.detail);
    detail += (detail.empty() ? "" : "; ") + name + " " + std::to_string(r.instances);
  }
  return t.done("instances: " + detail);
}

}  // namespace disconj::suites
