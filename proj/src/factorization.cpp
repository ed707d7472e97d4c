#include "disconj/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "disconj/errors.hpp"
#include "disconj/text.hpp"

namespace disconj {

Factorization::Factorization(Equation eq, Interval iv, Trajectory y, Trajectory u, double w_lo)
    : eq_(std::move(eq)), iv_(iv), y_(std::move(y)), u_(std::move(u)), w_lo_(w_lo) {
  const Equation& e = eq_;
  int_p_ = std::make_shared<AntiDerivative>([&e](double t) { return e.p(t); }, iv_.lo(), iv_.lo(), iv_.hi());
}

double Factorization::w(double t) const { return w_lo_ * std::exp(-(*int_p_)(t)); }

double Factorization::w_direct(double t) const {
  const State a = y_.state(t), b = u_.state(t);
  return a.x * b.dx - a.dx * b.x;
}

double Factorization::h1(double t) const {
  const double v = y(t);
  return v * v / w(t);
}

std::vector<double> Factorization::grid(int n) const {
  std::vector<double> ts;
  n = std::max(n, 2);
  for (int i = 0; i <= n; ++i) {
    if ((i == 0 && !iv_.lo_closed()) || (i == n && !iv_.hi_closed())) continue;
    ts.push_back(i == n ? iv_.hi() : iv_.lo() + (iv_.hi() - iv_.lo()) * i / n);
  }
  return ts;
}

void Factorization::write_csv(std::ostream& out, int n) const {
  out << "# equation: " << eq_.describe() << '\n';
  out << "# interval: " << iv_.to_string() << '\n';
  out << "t,h0,h1,h2,product\n";
  for (double t : grid(n)) {
    out << format_number(t) << ',' << format_number(h0(t)) << ',' << format_number(h1(t)) << ','
        << format_number(h2(t)) << ',' << format_number(product(t)) << '\n';
  }
}

Factorization build_factorization(const Equation& eq, const Interval& iv, const ShootOptions& opt) {
  const Verdict v = is_disconjugate(eq, iv, opt);
  if (!v.disconjugate()) {
    throw PreconditionError("factorization needs disconjugacy on " + iv.to_string() + " (oracle: " +
                            to_string(v.kind) + ")");
  }
  const Interval ex = examined_interval(eq, iv, opt);
  Trajectory y = find_positive_solution(eq, ex, opt);
  const double lo = ex.lo(), hi = ex.hi();
  const State y0 = y.state(lo);
  // companion from (1, 0); (0, 1) when that one is parallel to y
  double u0 = 1.0, du0 = 0.0;
  double w_lo = -y0.dx;
  if (std::abs(w_lo) <= 1e-6 * (std::abs(y0.x) + std::abs(y0.dx))) {
    u0 = 0.0;
    du0 = 1.0;
    w_lo = y0.x;
  }
  if (w_lo < 0) {
    u0 = -u0;
    du0 = -du0;
    w_lo = -w_lo;
  }
  Trajectory u = integrate_ivp(eq, lo, u0, du0, hi, opt.tol);
  // off the closed case y vanishes at an end, so the factors live inside
  const Interval on = ex.lo_closed() && ex.hi_closed() ? ex : Interval::open(lo, hi);
  Factorization f(eq, on, std::move(y), std::move(u), w_lo);
  for (double t : f.grid(256)) {
    if (!(f.w_direct(t) > 0.0)) throw IntegrationError("Wronskian lost its sign near t=" + format_number(t));
  }
  return f;
}

FactorizationCheck check_factorization(const Factorization& f, int n) {
  FactorizationCheck c;
  c.min_factor = kInf;
  for (double t : f.grid(n)) {
    c.product_error = std::max(c.product_error, std::abs(f.product(t) - 1.0));
    c.min_factor = std::min({c.min_factor, f.h0(t), f.h1(t), f.h2(t)});
    const double w = f.w(t);
    c.wronskian_gap = std::max(c.wronskian_gap, std::abs(w - f.w_direct(t)) / std::abs(w));
  }
  return c;
}

FactoredResidual verify_factorization(const Factorization& f, const CoeffExpr& u_test, int n) {
  const Equation& eq = f.equation();
  const Residual L(eq, u_test);
  FactoredResidual r;
  for (double t : f.grid(n)) {
    const double x = L.u(t), dx = L.du(t), ddx = L.ddu(t);
    const double p = eq.p(t), q = eq.q(t);
    const double y = f.y(t), dy = f.dy(t), w = f.w(t);
    const double ddy = -p * dy - q * y;
    // (h0 x)' = (x' y - x y') / y^2, so h1 (h0 x)' = (x' y - x y') / w and
    // its derivative follows from w' = -p w
    const double middle_dt = ((ddx * y - x * ddy) + p * (dx * y - x * dy)) / w;
    const double factored = f.h2(t) * middle_dt;
    const double direct = L(t);
    const double scale = std::abs(ddx) + std::abs(p * dx) + std::abs(q * x);
    const double diff = std::abs(direct - factored);
    r.max_abs = std::max(r.max_abs, diff);
    if (scale > 0) r.max_rel = std::max(r.max_rel, diff / scale);
    r.scale = std::max(r.scale, scale);
  }
  return r;
}

RolleCount generalized_rolle_check(const Equation& eq, const Interval& iv, const CoeffExpr& u_test, int samples,
                                   const ShootOptions& opt) {
  const Verdict v = is_disconjugate(eq, iv, opt);
  if (!v.disconjugate()) {
    throw PreconditionError("zero counting needs disconjugacy on " + iv.to_string() + " (oracle: " +
                            to_string(v.kind) + ")");
  }
  const Interval ex = examined_interval(eq, iv, opt);
  const Residual L(eq, u_test);
  auto inside = [&](std::vector<double> zs) {
    zs.erase(std::remove_if(zs.begin(), zs.end(), [&](double z) { return !ex.contains(z); }), zs.end());
    return zs;
  };
  RolleCount c;
  const auto n = static_cast<std::size_t>(std::max(samples, 16));
  c.zeros_u = inside(function_zeros([&](double t) { return L.u(t); }, ex.lo(), ex.hi(), n, 1e-7));
  c.zeros_Lu = inside(function_zeros([&](double t) { return L(t); }, ex.lo(), ex.hi(), n, 1e-7));
  c.m = static_cast<int>(c.zeros_u.size());
  c.k = static_cast<int>(c.zeros_Lu.size());
  return c;
}

}  // namespace disconj
