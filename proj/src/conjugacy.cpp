#include "disconj/conjugacy.hpp"

#include <algorithm>
#include <cmath>

#include "disconj/errors.hpp"
#include "disconj/text.hpp"

namespace disconj {

std::string ExtendedPoint::to_string() const {
  if (window_limited) return value > 0 ? "inf" : "-inf";
  return format_number(value);
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::GuaranteedDisconjugate:
      return "GuaranteedDisconjugate";
    case VerdictKind::Inconclusive:
      return "Inconclusive";
    case VerdictKind::NotDisconjugate:
      return "NotDisconjugate";
  }
  return "Inconclusive";
}

namespace {

bool evaluable(const Equation& eq, double t) {
  if (!eq.domain().contains(t)) return false;
  try {
    return std::isfinite(eq.p(t)) && std::isfinite(eq.q(t));
  } catch (const DomainError&) {
    return false;
  }
}

double endpoint_slack(const ShootOptions& opt, double t) { return opt.endpoint_rel * (1.0 + std::abs(t)); }

// Furthest point at most `want` beyond `t` in direction dir that can still be
// integrated to; used to look a little past a closed endpoint.
double overshoot(const Equation& eq, double t, double dir, double want) {
  const double u = t + dir * want;
  return evaluable(eq, u) ? u : t;
}

struct Shot {
  Trajectory traj;
  std::optional<double> first_zero;  // nearest zero strictly beyond the start
};

// Shoots x(a)=x0, x'(a)=v0 toward `end`, stopping after the first sign
// change. Suspect zeros trigger one re-run at a 100x tighter tolerance.
Shot shoot_first_zero(const Equation& eq, double a, double x0, double v0, double end, Tolerances tol,
                      bool retried = false) {
  const double dir = end >= a ? 1.0 : -1.0;
  double sign0 = x0 != 0.0 ? (x0 > 0 ? 1.0 : -1.0) : (v0 * dir > 0 ? 1.0 : -1.0);
  StepObserver stop = [sign0](const DenseStep<double, 2>& s) { return s.eval(s.t1())[0] * sign0 <= 0.0; };
  Shot out{integrate_ivp(eq, a, x0, v0, end, tol, stop), std::nullopt};
  const double t_end = out.traj.t_final();
  if (t_end == a) return out;
  Interval window = dir > 0 ? Interval::open_closed(a, t_end) : Interval::closed_open(t_end, a);
  auto zs = find_zeros(out.traj, window);
  if (zs.empty()) return out;
  const Zero z = dir > 0 ? zs.front() : zs.back();
  if (z.kind == ZeroKind::Suspect && !retried) return shoot_first_zero(eq, a, x0, v0, end, tol.tightened(100), true);
  out.first_zero = z.t;
  return out;
}

ExtendedPoint rho_impl(const Equation& eq, double a, double window_end, const ShootOptions& opt) {
  const double dir = window_end > a ? 1.0 : -1.0;
  if (!(window_end != a) || !std::isfinite(a)) throw PreconditionError("conjugate point search needs a proper window");
  if (!evaluable(eq, a)) throw PreconditionError("base point " + format_number(a) + " outside the equation domain");
  // stay inside the domain, away from a singular end
  double end = window_end;
  const Interval& d = eq.domain();
  if (dir > 0 && end > d.hi()) end = d.hi();
  if (dir < 0 && end < d.lo()) end = d.lo();
  if (!evaluable(eq, end)) end -= dir * opt.margin_rel * std::abs(end - a);
  Shot s = shoot_first_zero(eq, a, 0.0, 1.0, end, opt.tol);
  if (s.first_zero) return {*s.first_zero, false};
  return {dir * kInf, true};
}

}  // namespace

ExtendedPoint rho_plus(const Equation& eq, double a, double window_hi, const ShootOptions& opt) {
  if (!(a < window_hi)) throw PreconditionError("rho_plus needs a < window_hi");
  return rho_impl(eq, a, window_hi, opt);
}

ExtendedPoint rho_minus(const Equation& eq, double a, double window_lo, const ShootOptions& opt) {
  if (!(window_lo < a)) throw PreconditionError("rho_minus needs window_lo < a");
  return rho_impl(eq, a, window_lo, opt);
}

Interval examined_interval(const Equation& eq, const Interval& iv, const ShootOptions& opt, bool* limited) {
  double lo = iv.lo();
  double hi = iv.hi();
  bool lc = iv.lo_closed();
  bool hc = iv.hi_closed();
  bool lim = false;
  if (std::isinf(lo) && std::isinf(hi)) {
    lo = -opt.window_half;
    hi = opt.window_half;
    lc = hc = true;
    lim = true;
  } else if (std::isinf(hi)) {
    hi = lo + opt.window_length;
    hc = true;
    lim = true;
  } else if (std::isinf(lo)) {
    lo = hi - opt.window_length;
    lc = true;
    lim = true;
  }
  const Interval cl = eq.domain().closure();
  if (lo < cl.lo() || hi > cl.hi()) {
    throw PreconditionError("interval " + iv.to_string() + " is not inside the domain " + eq.domain().to_string());
  }
  const double len = hi - lo;
  if (!evaluable(eq, lo)) {
    if (lc) throw PreconditionError("coefficients are singular at the closed endpoint " + format_number(lo));
    lo += opt.margin_rel * len;
  }
  if (!evaluable(eq, hi)) {
    if (hc) throw PreconditionError("coefficients are singular at the closed endpoint " + format_number(hi));
    hi -= opt.margin_rel * len;
  }
  if (limited) *limited = lim;
  return {lo, hi, lc, hc};
}

namespace {

// Whether a zero z found by a shot from the left lies in the examined interval.
bool zero_inside(const Interval& ex, double z, const ShootOptions& opt) {
  const double zeta = endpoint_slack(opt, ex.hi());
  return ex.hi_closed() ? z <= ex.hi() + zeta : z < ex.hi() - zeta;
}

Verdict decide(const Equation& eq, const Interval& iv, const ShootOptions& opt, bool retried) {
  bool limited = false;
  const Interval ex = examined_interval(eq, iv, opt, &limited);
  const bool both_closed = ex.lo_closed() && ex.hi_closed();
  // only the fully closed case looks at a zero on the right end
  const Interval test = both_closed ? ex : Interval::open(ex.lo(), ex.hi());
  const double lo = test.lo();
  const double hi = test.hi();
  const double end = test.hi_closed() ? overshoot(eq, hi, 1.0, 10 * endpoint_slack(opt, hi)) : hi;

  Verdict v;
  v.criterion = "oracle";
  v.window_limited = limited;
  v.examined = ex;
  if (ex.lo() != iv.lo() && std::isfinite(iv.lo())) v.note = "left end kept at a singular-endpoint margin";
  if (ex.hi() != iv.hi() && std::isfinite(iv.hi())) v.note = "right end kept at a singular-endpoint margin";

  Shot s = shoot_first_zero(eq, lo, 0.0, 1.0, end, opt.tol);
  if (!s.first_zero || !zero_inside(test, *s.first_zero, opt)) {
    v.kind = VerdictKind::GuaranteedDisconjugate;
    if (limited) v.note = "holds on the truncation " + ex.to_string() + " only";
    return v;
  }

  Witness w;
  w.a = lo;
  w.z1 = lo;
  w.z2 = *s.first_zero;
  w.trajectory = s.traj;
  if (!test.lo_closed()) {
    // move the start inside so that both zeros belong to the open interval;
    // the conjugate point moves continuously with the start
    double delta = 1e-3 * (w.z2 - lo);
    bool found = false;
    for (int i = 0; i < 40 && !found; ++i, delta *= 0.5) {
      Shot s2 = shoot_first_zero(eq, lo + delta, 0.0, 1.0, end, opt.tol);
      if (s2.first_zero && zero_inside(test, *s2.first_zero, opt)) {
        w.a = w.z1 = lo + delta;
        w.z2 = *s2.first_zero;
        w.trajectory = s2.traj;
        found = true;
      }
    }
    if (!found) {
      v.kind = VerdictKind::Inconclusive;
      v.note = "conjugate point sits on the open endpoint within tolerance";
      return v;
    }
  }

  // independent confirmation at a tighter tolerance
  Shot tight = shoot_first_zero(eq, w.a, 0.0, 1.0, end, opt.tol.tightened(100));
  if (!tight.first_zero || !zero_inside(test, *tight.first_zero, opt)) {
    if (!retried) {
      ShootOptions o2 = opt;
      o2.tol = opt.tol.tightened(100);
      return decide(eq, iv, o2, true);
    }
    v.kind = VerdictKind::Inconclusive;
    v.note = "witness not reproduced at a tighter tolerance";
    return v;
  }
  w.residual = std::abs(*tight.first_zero - w.z2);
  if (w.z2 > hi) {
    w.z2 = hi;
    v.note = "second zero on the closed right end within tolerance";
  }
  v.kind = VerdictKind::NotDisconjugate;
  v.witness = std::move(w);
  return v;
}

}  // namespace

Verdict is_disconjugate(const Equation& eq, const Interval& iv, const ShootOptions& opt) {
  return decide(eq, iv, opt, false);
}

BruteForceReport crosscheck_bruteforce(const Equation& eq, const Interval& iv, int n_angles, const ShootOptions& opt) {
  if (n_angles < 8) throw PreconditionError("brute-force cross-check needs at least 8 angles");
  BruteForceReport r;
  r.n_angles = n_angles;
  const Interval ex = examined_interval(eq, iv, opt);
  const bool both_closed = ex.lo_closed() && ex.hi_closed();
  const double lo = ex.lo();
  const double hi = ex.hi();
  const double zeta = endpoint_slack(opt, hi);
  const double end = both_closed ? overshoot(eq, hi, 1.0, 10 * zeta) : hi;
  const Interval count_window = both_closed ? Interval::closed(lo, hi + zeta) : Interval::open(lo, hi - zeta);
  for (int k = 0; k < n_angles; ++k) {
    const double th = M_PI * k / n_angles;
    auto tr = integrate_ivp(eq, lo, std::cos(th), std::sin(th), end, opt.tol);
    const int n = static_cast<int>(find_zeros(tr, count_window).size());
    if (n > r.max_zero_count) {
      r.max_zero_count = n;
      r.worst_angle = th;
    }
  }
  r.oracle_disconjugate = is_disconjugate(eq, iv, opt).disconjugate();
  r.agrees = (r.max_zero_count <= 1) == r.oracle_disconjugate;
  return r;
}

Trajectory find_positive_solution(const Equation& eq, const Interval& iv, const ShootOptions& opt) {
  if (!iv.finite()) throw PreconditionError("positive solution needs a finite interval");
  const Interval ex = examined_interval(eq, iv, opt);
  const double lo = ex.lo();
  const double hi = ex.hi();
  Trajectory y;
  if (ex.lo_closed() && ex.hi_closed()) {
    // y1 + y2 with y1 = C(., lo) and y2 vanishing at hi with slope -1; the
    // sum is re-integrated from its data at lo
    auto y2 = integrate_ivp(eq, hi, 0.0, -1.0, lo, opt.tol).final_state();
    y = integrate_ivp(eq, lo, y2.x, 1.0 + y2.dx, hi, opt.tol);
  } else if (ex.hi_closed()) {
    y = integrate_ivp(eq, hi, 0.0, -1.0, lo, opt.tol);
  } else {
    y = integrate_ivp(eq, lo, 0.0, 1.0, hi, opt.tol);
  }
  // positivity on the closed interval, or the interior otherwise
  const bool closed = ex.lo_closed() && ex.hi_closed();
  constexpr int n = 1024;
  for (int i = 0; i <= n; ++i) {
    if (!closed && (i == 0 || i == n)) continue;
    const double t = lo + (hi - lo) * i / n;
    if (!(y.x(t) > 0.0)) {
      throw PreconditionError("no positive solution: the equation is not disconjugate on " + iv.to_string() +
                              " (solution vanishes near t=" + format_number(t) + ")");
    }
  }
  return y;
}

}  // namespace disconj
