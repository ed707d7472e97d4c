#include "disconj/green.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "disconj/errors.hpp"
#include "disconj/text.hpp"

namespace disconj {

GreenFunction::GreenFunction(const Equation& eq, double a, double b, const GreenOptions& opt)
    : eq_(eq), a_(a), b_(b), opt_(opt) {
  if (!(a < b)) throw PreconditionError("Green's function needs a < b");
  phi_ = integrate_ivp(eq_, a, 0.0, 1.0, b, opt.tol);
  chi_ = integrate_ivp(eq_, b, 0.0, 1.0, a, opt.tol);
  if (phi_.final_state().x == 0.0) throw PreconditionError("degenerate problem: C(b,a) = 0");
  // phi(a) = 0, phi'(a) = 1, so the determinant at a is -chi(a)
  w_a_ = -chi_.final_state().x;
  const Equation* e = &eq_;
  int_p_ = std::make_shared<AntiDerivative>([e](double t) { return e->p(t); }, a, a, b);
}

double GreenFunction::wronskian(double s) const { return w_a_ * std::exp(-(*int_p_)(s)); }

double GreenFunction::wronskian_direct(double s) const {
  const State f = phi_.state(s);
  const State c = chi_.state(s);
  return f.x * c.dx - f.dx * c.x;
}

double GreenFunction::operator()(double t, double s) const {
  const double w = wronskian(s);
  return s <= t ? phi_.x(s) * chi_.x(t) / w : phi_.x(t) * chi_.x(s) / w;
}

double GreenFunction::dt(double t, double s, bool upper) const {
  const double w = wronskian(s);
  const bool below = s < t || (s == t && upper);
  return below ? phi_.x(s) * chi_.dx(t) / w : phi_.dx(t) * chi_.x(s) / w;
}

double GreenFunction::jump(double s) const { return dt(s, s, true) - dt(s, s, false); }

double GreenFunction::cauchy_identity(double t, double s) const {
  const double c_ba = phi_.final_state().x;
  if (s < t) {
    const double c_bt = t == b_ ? 0.0 : cauchy(eq_, t, b_, opt_.tol).final_state().x;
    return -c_bt * phi_.x(s) / c_ba;
  }
  const double c_bs = s == b_ ? 0.0 : cauchy(eq_, s, b_, opt_.tol).final_state().x;
  return -phi_.x(t) * c_bs / c_ba;
}

void GreenFunction::write_csv(std::ostream& out, int n) const {
  out << "# a=" << format_number(a_) << " b=" << format_number(b_) << " rel_tol=" << format_number(opt_.tol.rel)
      << "\n";
  out << "t,s,G\n";
  n = std::max(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = a_ + (b_ - a_) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double s = a_ + (b_ - a_) * j / (n - 1);
      out << format_number(t) << "," << format_number(s) << "," << format_number((*this)(t, s)) << "\n";
    }
  }
}

GreenFunction green_function(const Equation& eq, double a, double b, const GreenOptions& opt) {
  ShootOptions so;
  so.tol = opt.tol;
  Verdict v = is_disconjugate(eq, Interval::closed(a, b), so);
  if (!v.disconjugate()) {
    std::string msg = "equation is not disconjugate on [" + format_number(a) + "," + format_number(b) + "]";
    if (v.witness) msg += ": solution vanishes at " + format_number(v.witness->z1) + " and " + format_number(v.witness->z2);
    throw PreconditionError(msg);
  }
  return {eq, a, b, opt};
}

GreenCheck verify_green(const GreenFunction& g, int n, bool with_identity) {
  GreenCheck c;
  c.max_interior = -kInf;
  const double a = g.a();
  const double b = g.b();
  const Equation& eq = g.equation();
  const double h = 2e-4 * (b - a);
  for (int j = 1; j < n; ++j) {
    const double s = a + (b - a) * j / n;
    c.boundary = std::max({c.boundary, std::abs(g(a, s)), std::abs(g(b, s))});
    const double w = g.wronskian(s);
    const double lower = g.phi().x(s) * g.chi().x(s) / w;
    c.continuity = std::max(c.continuity, std::abs(g(s, s) - lower));
    c.jump_error = std::max(c.jump_error, std::abs(g.jump(s) - 1.0));
    // LG against the size of its terms over the column; pointwise scaling
    // breaks down where all three terms vanish (q = 0, G linear)
    double col_res = 0.0, col_mag = 0.0;
    for (int i = 1; i < n; ++i) {
      const double t = a + (b - a) * (i + 0.5) / n;
      if (t >= b) continue;
      c.max_interior = std::max(c.max_interior, g(t, s));
      if (std::abs(t - s) > 3 * h && t - 2 * h > a && t + 2 * h < b) {
        const bool up = s < t;
        auto d1 = [&](double u) { return g.dt(u, s, up); };
        const double d2 = (d1(t - 2 * h) - 8 * d1(t - h) + 8 * d1(t + h) - d1(t + 2 * h)) / (12 * h);
        const double pd = eq.p(t) * d1(t);
        const double qg = eq.q(t) * g(t, s);
        col_mag = std::max(col_mag, std::abs(d2) + std::abs(pd) + std::abs(qg));
        col_res = std::max(col_res, std::abs(d2 + pd + qg));
      }
      if (with_identity) c.identity_gap = std::max(c.identity_gap, std::abs(g(t, s) - g.cauchy_identity(t, s)));
    }
    if (col_mag > 0) c.operator_residual = std::max(c.operator_residual, col_res / col_mag);
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct Integrals {
  double lower;  // int_a^t phi f / W
  double upper;  // int_t^b chi f / W
};

Integrals split_integrals(const GreenFunction& g, const std::function<double(double)>& f, double t) {
  const double qa = g.options().quad_abs;
  auto lo_f = [&](double s) { return g.phi().x(s) * f(s) / g.wronskian(s); };
  auto hi_f = [&](double s) { return g.chi().x(s) * f(s) / g.wronskian(s); };
  Integrals r{0.0, 0.0};
  if (t > g.a()) r.lower = integrate(lo_f, g.a(), t, qa).value;
  if (t < g.b()) r.upper = integrate(hi_f, t, g.b(), qa).value;
  return r;
}

}  // namespace

BvpSolution::BvpSolution(std::shared_ptr<const GreenFunction> g, std::function<double(double)> f, Trajectory traj)
    : g_(std::move(g)), f_(std::move(f)), traj_(std::move(traj)) {}

double BvpSolution::x(double t) const {
  auto in = split_integrals(*g_, f_, t);
  return g_->chi().x(t) * in.lower + g_->phi().x(t) * in.upper;
}

double BvpSolution::dx(double t) const {
  auto in = split_integrals(*g_, f_, t);
  return g_->chi().dx(t) * in.lower + g_->phi().dx(t) * in.upper;
}

namespace {

struct ResidualTerms {
  double ddx, pdx, qx, f;
  [[nodiscard]] double sum() const { return ddx + pdx + qx - f; }
  [[nodiscard]] double mag() const { return std::abs(ddx) + std::abs(pdx) + std::abs(qx) + std::abs(f); }
};

}  // namespace

static ResidualTerms residual_terms(const BvpSolution& s, const GreenFunction& g,
                                    const std::function<double(double)>& f, double t) {
  const double a = g.a();
  const double b = g.b();
  const double h0 = 1e-3 * (b - a);
  const double tc = std::clamp(t, a + 4 * h0, b - 4 * h0);
  const auto& bps = g.equation().breakpoints();
  auto fd = [&](double h) {
    // one-sided next to a breakpoint, where the third derivative may jump
    for (double bp : bps) {
      if (bp > tc - 4 * h && bp < tc + 4 * h) {
        const double d = tc >= bp ? h : -h;
        return (-25 * s.dx(tc) + 48 * s.dx(tc + d) - 36 * s.dx(tc + 2 * d) + 16 * s.dx(tc + 3 * d) -
                3 * s.dx(tc + 4 * d)) /
               (12 * d);
      }
    }
    return (s.dx(tc - 2 * h) - 8 * s.dx(tc - h) + 8 * s.dx(tc + h) - s.dx(tc + 2 * h)) / (12 * h);
  };
  // shrink the step while successive estimates keep getting closer; a steep
  // coefficient needs a small step, rounding noise punishes one that is too small
  double prev = fd(h0);
  double ddx = fd(h0 / 4);
  double gap = std::abs(ddx - prev);
  for (double h = h0 / 16; h > 1e-7 * (b - a); h /= 4) {
    const double next = fd(h);
    const double g2 = std::abs(next - ddx);
    if (g2 >= gap) break;
    gap = g2;
    ddx = next;
  }
  const Equation& eq = g.equation();
  return {ddx, eq.p(tc) * s.dx(tc), eq.q(tc) * s.x(tc), f(tc)};
}

double BvpSolution::residual(double t) const { return residual_terms(*this, *g_, f_, t).sum(); }

double BvpSolution::relative_residual(double t) const {
  const auto r = residual_terms(*this, *g_, f_, t);
  const double m = r.mag();
  return m > 0 ? std::abs(r.sum()) / m : 0.0;
}

BvpSolution solve_bvp(const Equation& eq, const std::function<double(double)>& f, double a, double b,
                      const GreenOptions& opt, int nodes) {
  auto g = std::make_shared<const GreenFunction>(green_function(eq, a, b, opt));
  nodes = std::max(nodes, 2);
  std::vector<double> ts(nodes + 1);
  std::vector<Vec<double, 2>> ys(nodes + 1), fs(nodes + 1);
  for (int i = 0; i <= nodes; ++i) {
    const double t = i == nodes ? b : a + (b - a) * i / nodes;
    auto in = split_integrals(*g, f, t);
    const double x = g->chi().x(t) * in.lower + g->phi().x(t) * in.upper;
    const double v = g->chi().dx(t) * in.lower + g->phi().dx(t) * in.upper;
    ts[i] = t;
    ys[i] = {x, v};
    fs[i] = {v, f(t) - eq.p(t) * v - eq.q(t) * x};
  }
  std::vector<DenseStep<double, 2>> steps;
  for (int i = 0; i < nodes; ++i) {
    steps.push_back(DenseStep<double, 2>::hermite(ts[i], ts[i + 1] - ts[i], ys[i], fs[i], ys[i + 1], fs[i + 1]));
  }
  Trajectory traj(DenseSolution<double, 2>(std::move(steps), a, b, ys.front(), ys.back()), opt.tol);
  return {std::move(g), f, std::move(traj)};
}

BvpSolution solve_bvp(const Equation& eq, const CoeffExpr& f, double a, double b, const GreenOptions& opt,
                      int nodes) {
  auto fc = std::make_shared<CompiledExpr>(f.compile(eq.params()));
  return solve_bvp(eq, [fc](double t) { return (*fc)(t); }, a, b, opt, nodes);
}

Trajectory shoot_bvp(const Equation& eq, const std::function<double(double)>& f, double a, double b, Tolerances tol) {
  const double xp_b = integrate_forced(eq, f, a, 0.0, 0.0, b, tol).final_state().x;
  const double phi_b = cauchy(eq, a, b, tol).final_state().x;
  if (phi_b == 0.0) throw PreconditionError("degenerate problem: C(b,a) = 0");
  return integrate_forced(eq, f, a, 0.0, -xp_b / phi_b, b, tol);
}

}  // namespace disconj
