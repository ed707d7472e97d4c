#include "disconj/ode.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "disconj/errors.hpp"
#include "disconj/quadrature.hpp"
#include "disconj/text.hpp"

namespace disconj {

namespace {

// finite stand-in for the domain, used for validation sampling only
std::pair<double, double> sampling_range(const Interval& d) {
  double lo = d.lo();
  double hi = d.hi();
  if (std::isinf(lo) && std::isinf(hi)) return {-50.0, 50.0};
  if (std::isinf(lo)) lo = std::min(-50.0, hi - 100.0);
  if (std::isinf(hi)) hi = std::max(50.0, lo + 100.0);
  return {lo, hi};
}

}  // namespace

Equation::Equation(CoeffExpr p, CoeffExpr q, Interval domain, ParamMap params, std::vector<double> breakpoints)
    : p_(std::move(p)),
      q_(std::move(q)),
      domain_(domain),
      params_(std::move(params)),
      breakpoints_(std::move(breakpoints)) {
  pc_ = p_.compile(params_);
  qc_ = q_.compile(params_);
  std::sort(breakpoints_.begin(), breakpoints_.end());
  auto [lo, hi] = sampling_range(domain_);
  constexpr int n = 64;
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    const double t = lo + (i + 0.5) * h;
    try {
      (void)pc_(t);
      (void)qc_(t);
    } catch (const DomainError& e) {
      throw DomainError(std::string("coefficient fails inside the domain at t=") + format_number(t) + ": " +
                        e.what());
    }
  }
}

Equation Equation::parse(std::string_view p, std::string_view q, Interval domain, ParamMap params) {
  return {CoeffExpr::parse(p), CoeffExpr::parse(q), domain, std::move(params)};
}

Equation Equation::with_domain(Interval domain) const { return {p_, q_, domain, params_, breakpoints_}; }

Equation Equation::with_coefficients(CoeffExpr p, CoeffExpr q) const {
  return {std::move(p), std::move(q), domain_, params_, breakpoints_};
}

std::string Equation::describe() const {
  return "x'' + (" + p_.to_string() + ")x' + (" + q_.to_string() + ")x = 0";
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(DenseSolution<double, 2> solution, Tolerances tol, bool stopped_early)
    : sol_(std::make_shared<const DenseSolution<double, 2>>(std::move(solution))), tol_(tol), stopped_(stopped_early) {}

State Trajectory::state(double t) const {
  const double lo = sol_->lo();
  const double hi = sol_->hi();
  const double slack = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  if (t < lo - slack || t > hi + slack || std::isnan(t)) {
    throw PreconditionError("trajectory queried at t=" + format_number(t) + " outside [" + format_number(lo) + "," +
                            format_number(hi) + "]");
  }
  auto y = (*sol_)(std::clamp(t, lo, hi));
  return {y[0], y[1]};
}

Interval Trajectory::span() const { return Interval::closed(sol_->lo(), sol_->hi()); }

State Trajectory::initial_state() const { return {sol_->y_begin()[0], sol_->y_begin()[1]}; }

State Trajectory::final_state() const { return {sol_->y_end()[0], sol_->y_end()[1]}; }

std::vector<TrajectoryNode> Trajectory::nodes() const {
  std::vector<TrajectoryNode> out;
  out.push_back({sol_->t_begin(), sol_->y_begin()[0], sol_->y_begin()[1]});
  for (const auto& s : sol_->steps()) {
    auto y = s.eval(s.t1());
    out.push_back({s.t1(), y[0], y[1]});
  }
  if (!out.empty()) {
    out.back() = {sol_->t_end(), sol_->y_end()[0], sol_->y_end()[1]};
  }
  if (sol_->backward()) std::reverse(out.begin(), out.end());
  // drop duplicates (breakpoint restarts, zero-length spans)
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t == b.t; }), out.end());
  return out;
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "# rel_tol=" << format_number(tol_.rel) << " abs_tol=" << format_number(tol_.abs) << "\n";
  out << "t,x,dx\n";
  for (const auto& n : nodes()) {
    out << format_number(n.t) << "," << format_number(n.x) << "," << format_number(n.dx) << "\n";
  }
}

// ---------------------------------------------------------------------------

namespace {

void check_span(const Equation& eq, double t0, double t1) {
  const Interval cl = eq.domain().closure();
  if (!std::isfinite(t0) || !std::isfinite(t1) || !cl.contains(t0) || !cl.contains(t1)) {
    throw PreconditionError("integration span [" + format_number(std::min(t0, t1)) + "," +
                            format_number(std::max(t0, t1)) + "] leaves the domain " + eq.domain().to_string());
  }
}

void check_tol(const Tolerances& tol) {
  if (!(tol.rel > 0) || !(tol.abs > 0)) throw PreconditionError("tolerances must be positive");
}

template <typename Rhs>
Trajectory run(const Equation& eq, Rhs&& rhs, double t0, double x0, double v0, double t1, Tolerances tol,
               const StepObserver& stop) {
  check_span(eq, t0, t1);
  check_tol(tol);
  Dopri5Options<double, 2> opt;
  opt.rel_tol = tol.rel;
  opt.abs_tol = tol.abs;
  opt.breakpoints = eq.breakpoints();
  opt.stop = stop;
  auto res = dopri5<double, 2>(rhs, t0, {x0, v0}, t1, opt);
  return {std::move(res.solution), tol, res.stopped};
}

}  // namespace

Trajectory integrate_ivp(const Equation& eq, double t0, double x0, double v0, double t1, Tolerances tol,
                         const StepObserver& stop) {
  auto rhs = [&eq](double t, const Vec<double, 2>& y) {
    return Vec<double, 2>{y[1], -eq.p(t) * y[1] - eq.q(t) * y[0]};
  };
  return run(eq, rhs, t0, x0, v0, t1, tol, stop);
}

Trajectory integrate_forced(const Equation& eq, const std::function<double(double)>& f, double t0, double x0,
                            double v0, double t1, Tolerances tol) {
  auto rhs = [&eq, &f](double t, const Vec<double, 2>& y) {
    return Vec<double, 2>{y[1], f(t) - eq.p(t) * y[1] - eq.q(t) * y[0]};
  };
  return run(eq, rhs, t0, x0, v0, t1, tol, {});
}

Trajectory cauchy(const Equation& eq, double s, double t1, Tolerances tol) {
  return integrate_ivp(eq, s, 0.0, 1.0, t1, tol);
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
  double t;
  double x;
};

template <typename F>
double bisect(F&& f, double lo, double hi, double flo, double rel) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel * (1.0 + std::abs(mid)) || mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// minimizes |f| on [lo, hi]; returns the argmin
template <typename F>
double golden_min_abs(F&& f, double lo, double hi, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = std::abs(f(c));
  double fd = std::abs(f(d));
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = std::abs(f(c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = std::abs(f(d));
    }
  }
  return fc < fd ? c : d;
}

// core scan shared by trajectory and plain-function zero searches
template <typename F>
std::vector<Zero> scan_samples(F&& f, const std::vector<Sample>& s, double refine_rel, double tangency_rel) {
  std::vector<Zero> out;
  if (s.empty()) return out;
  double scale = 0.0;
  for (const auto& p : s) scale = std::max(scale, std::abs(p.x));
  if (scale == 0.0) return out;  // identically zero: no isolated zeros
  const double tang = tangency_rel * scale;

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].x == 0.0) out.push_back({s[i].t, ZeroKind::Simple});
    if (i + 1 < s.size() && s[i].x != 0.0 && s[i + 1].x != 0.0 && (s[i].x > 0) != (s[i + 1].x > 0)) {
      out.push_back({bisect(f, s[i].t, s[i + 1].t, s[i].x, refine_rel), ZeroKind::Simple});
    }
    // dip of |x| between two samples of the same sign
    if (i > 0 && i + 1 < s.size()) {
      const double l = s[i - 1].x, m = s[i].x, r = s[i + 1].x;
      const bool same = (l > 0 && m > 0 && r > 0) || (l < 0 && m < 0 && r < 0);
      if (same && std::abs(m) <= std::abs(l) && std::abs(m) <= std::abs(r)) {
        const double tm = golden_min_abs(f, s[i - 1].t, s[i + 1].t);
        const double fm = f(tm);
        if (fm == 0.0 || (fm > 0) != (m > 0)) {
          // two sign changes hidden between samples
          out.push_back({bisect(f, s[i - 1].t, tm, l, refine_rel), ZeroKind::Simple});
          out.push_back({bisect(f, tm, s[i + 1].t, fm, refine_rel), ZeroKind::Simple});
        } else if (std::abs(fm) < tang) {
          out.push_back({tm, ZeroKind::Suspect});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Zero& a, const Zero& b) { return a.t < b.t; });
  // merge duplicates produced by overlapping detections
  std::vector<Zero> merged;
  for (const auto& z : out) {
    if (!merged.empty() && z.t - merged.back().t <= 1e3 * refine_rel * (1.0 + std::abs(z.t))) {
      if (z.kind == ZeroKind::Simple) merged.back().kind = ZeroKind::Simple;
      continue;
    }
    merged.push_back(z);
  }
  // a pair of crossings squeezed together under the tangency threshold is
  // one touching zero seen through rounding noise
  std::vector<Zero> result;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (i + 1 < merged.size()) {
      const double a = merged[i].t, b = merged[i + 1].t;
      if (b - a < 1e-6 * (1.0 + std::abs(a)) && std::abs(f(0.5 * (a + b))) < tang) {
        result.push_back({0.5 * (a + b), ZeroKind::Suspect});
        ++i;
        continue;
      }
    }
    result.push_back(merged[i]);
  }
  return result;
}

}  // namespace

ZeroList find_zeros(const Trajectory& traj, const Interval& window, const ZeroSearch& opt) {
  const auto& sol = traj.dense();
  const double wlo = std::max(window.lo(), sol.lo());
  const double whi = std::min(window.hi(), sol.hi());
  if (!(wlo <= whi)) return {};

  // cell boundaries: window ends plus step ends inside the window
  std::vector<double> cuts{wlo, whi};
  for (const auto& st : sol.steps()) {
    if (st.t1() > wlo && st.t1() < whi) cuts.push_back(st.t1());
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto xf = [&traj](double t) { return traj.x(t); };
  std::vector<Sample> samples;
  const int m = std::max(1, opt.samples_per_step);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    for (int k = 0; k < m; ++k) {
      const double t = cuts[i] + (cuts[i + 1] - cuts[i]) * k / m;
      samples.push_back({t, xf(t)});
    }
  }
  samples.push_back({whi, xf(whi)});

  ZeroList out;
  for (const auto& z : scan_samples(xf, samples, opt.refine_rel, opt.tangency_rel)) {
    if (window.contains(z.t)) out.push_back(z);
  }
  return out;
}

std::vector<double> function_zeros(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                                   double cluster) {
  std::vector<Sample> samples;
  n = std::max<std::size_t>(n, 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    samples.push_back({t, f(t)});
  }
  std::vector<double> out;
  for (const auto& z : scan_samples(f, samples, 1e-13, 1e-10)) {
    if (!out.empty() && z.t - out.back() <= cluster * (1.0 + std::abs(z.t))) continue;
    out.push_back(z.t);
  }
  return out;
}

// ---------------------------------------------------------------------------

WronskianReport wronskian(const Equation& eq, double a, double t, Tolerances tol) {
  WronskianReport r;
  const double ip = integrate([&eq](double s) { return eq.p(s); }, std::min(a, t), std::max(a, t)).value;
  r.abel = std::exp(t >= a ? -ip : ip);
  auto y1 = integrate_ivp(eq, a, 1.0, 0.0, t, tol).final_state();
  auto y2 = integrate_ivp(eq, a, 0.0, 1.0, t, tol).final_state();
  r.determinant = y1.x * y2.dx - y1.dx * y2.x;
  r.rel_diff = std::abs(r.determinant - r.abel) / std::abs(r.abel);
  return r;
}

Residual::Residual(const Equation& eq, const CoeffExpr& u) {
  const CoeffExpr du = u.differentiate();
  const CoeffExpr ddu = du.differentiate();
  p_ = eq.p_expr().compile(eq.params());
  q_ = eq.q_expr().compile(eq.params());
  u_ = u.compile(eq.params());
  du_ = du.compile(eq.params());
  ddu_ = ddu.compile(eq.params());
}

double Residual::operator()(double t) const { return ddu_(t) + p_(t) * du_(t) + q_(t) * u_(t); }

Residual apply_L(const Equation& eq, const CoeffExpr& u) { return {eq, u}; }

}  // namespace disconj
