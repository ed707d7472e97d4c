#include "disconj/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "disconj/dopri5.hpp"
#include "disconj/errors.hpp"
#include "disconj/quadrature.hpp"
#include "disconj/text.hpp"

namespace disconj {

namespace {

using LD = long double;

Vec<LD, 2> period_map(const Equation& eq, double a, double T, const Vec<LD, 2>& y0, const MonodromyOptions& opt) {
  auto rhs = [&eq](LD t, const Vec<LD, 2>& y) {
    const double td = static_cast<double>(t);
    return Vec<LD, 2>{y[1], -LD(eq.p(td)) * y[1] - LD(eq.q(td)) * y[0]};
  };
  Dopri5Options<LD, 2> o;
  o.rel_tol = opt.rel_tol;
  o.abs_tol = opt.abs_tol;
  o.keep_dense = false;
  for (double b : eq.breakpoints()) o.breakpoints.push_back(b);
  return dopri5<LD, 2>(rhs, LD(a), y0, LD(a) + LD(T), o).solution.y_end();
}

// smallest singular value of a 2x2 matrix
LD sigma_min(LD a, LD b, LD c, LD d) {
  const LD det = std::abs(a * d - b * c);
  const LD s = a * a + b * b + c * c + d * d;
  const LD big = std::sqrt((s + std::sqrt(std::max(LD(0), s * s - 4 * det * det))) / 2);
  return big == 0 ? LD(0) : det / big;
}

PeriodicKind classify(double d, const PeriodicOptions& opt) {
  if (d < opt.has_below) return PeriodicKind::HasPeriodic;
  if (d > opt.none_above) return PeriodicKind::NoNontrivialPeriodic;
  return PeriodicKind::Borderline;
}

}  // namespace

MonodromyReport monodromy(const Equation& eq, double a, double T, const MonodromyOptions& opt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionError("period must be positive and finite");
  const Interval cl = eq.domain().closure();
  if (!cl.contains(a) || !cl.contains(a + T)) {
    throw PreconditionError("[" + format_number(a) + ", " + format_number(a + T) + "] is not inside the domain " +
                            eq.domain().to_string());
  }
  MonodromyReport r;
  r.a = a;
  r.T = T;
  const auto c1 = period_map(eq, a, T, {1, 0}, opt);
  const auto c2 = period_map(eq, a, T, {0, 1}, opt);
  const LD m11 = c1[0], m21 = c1[1], m12 = c2[0], m22 = c2[1];
  r.matrix = {{{double(m11), double(m12)}, {double(m21), double(m22)}}};

  const LD tr = m11 + m22;
  const LD det = m11 * m22 - m12 * m21;
  r.det = double(det);
  r.det_expected = std::exp(-integrate([&eq](double t) { return eq.p(t); }, a, a + T, 1e-14, 1e-13).value);
  r.det_rel_error = std::abs(r.det - r.det_expected) / std::abs(r.det_expected);

  // roots of lambda^2 - tr lambda + det, the larger one first to avoid cancellation
  const LD disc = tr * tr - 4 * det;
  std::complex<LD> l1, l2;
  if (disc >= 0) {
    const LD big = (tr + std::copysign(std::sqrt(disc), tr)) / 2;
    l1 = big;
    l2 = big == 0 ? LD(0) : det / big;
  } else {
    const LD im = std::sqrt(-disc) / 2;
    l1 = {tr / 2, im};
    l2 = {tr / 2, -im};
  }
  r.eigenvalues = {std::complex<double>(double(l1.real()), double(l1.imag())),
                   std::complex<double>(double(l2.real()), double(l2.imag()))};
  for (const auto& l : {l1, l2}) {
    const std::complex<LD> res = l * l - tr * l + det;
    const LD scale = std::norm(l) + std::abs(tr) * std::abs(l) + std::abs(det);
    r.eigen_residual = std::max(r.eigen_residual, double(scale > 0 ? std::abs(res) / scale : std::abs(res)));
  }
  r.unit_eigen_distance = double(std::min(std::abs(l1 - LD(1)), std::abs(l2 - LD(1))));
  r.unit_singular_distance = double(sigma_min(m11 - 1, m12, m21, m22 - 1));
  return r;
}

PeriodicityCheck check_periodicity(const CoeffExpr& e, double T, const ParamMap& params, double a, int n) {
  if (!(T > 0.0)) throw PreconditionError("period must be positive");
  const CompiledExpr f = e.compile(params);
  PeriodicityCheck c;
  double absmax = 0.0;
  n = std::max(n, 1);
  for (int i = 0; i <= n; ++i) {
    const double t = a + T * i / n;
    const double v = f(t), w = f(t + T);
    c.max_diff = std::max(c.max_diff, std::abs(w - v));
    absmax = std::max({absmax, std::abs(v), std::abs(w)});
  }
  c.scale = 1.0 + absmax;
  c.periodic = std::isfinite(c.max_diff) && c.max_diff <= 1e-9 * c.scale;
  return c;
}

std::string to_string(PeriodicKind k) {
  switch (k) {
    case PeriodicKind::NoNontrivialPeriodic:
      return "NoNontrivialPeriodic";
    case PeriodicKind::HasPeriodic:
      return "HasPeriodic";
    case PeriodicKind::Borderline:
      break;
  }
  return "Borderline";
}

PeriodicVerdict check_theorem_periodic(const Equation& eq, double T, const Interval& window,
                                       const PeriodicOptions& opt) {
  PeriodicVerdict v;
  HypothesisReport& h = v.hypotheses;

  const Interval ex = examined_interval(eq, window, opt.criteria.shoot);
  const int n = opt.criteria.grid.points;
  double qmin = kInf, qmax = -kInf;
  for (int i = 0; i <= n; ++i) {
    const double q = eq.q(ex.lo() + (ex.hi() - ex.lo()) * i / n);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  const double qs = std::max(std::abs(qmin), std::abs(qmax));
  const double tiny = 1e-12 * (1.0 + qs);
  if (qs <= 1e-12) h.q_sign = "zero";
  else if (qmin >= -tiny) h.q_sign = "nonnegative";
  else if (qmax <= tiny) h.q_sign = "nonpositive";
  else h.q_sign = "indefinite";
  h.q_sign_ok = h.q_sign == "nonnegative" || h.q_sign == "nonpositive";

  h.p_periodic = check_periodicity(eq.p_expr(), T, eq.params(), opt.a).periodic;
  h.q_periodic = check_periodicity(eq.q_expr(), T, eq.params(), opt.a).periodic;
  h.periodicity_ok = h.p_periodic && h.q_periodic;

  // disconjugacy on the line: constant coefficients, or the pointwise
  // conditions, which carry over from one period to the line when p and q
  // are periodic; the oracle on the window only as a fallback
  auto c = check_constant(eq, Interval::real_line(), opt.criteria);
  if (c.fired()) {
    h.disconjugacy_ok = true;
    h.disconjugacy_source = c.name;
  } else if (!c.verdict.not_disconjugate()) {
    try {
      auto m = check_main(eq, window, {}, opt.criteria);
      if (m.fired()) {
        h.disconjugacy_ok = true;
        h.disconjugacy_source = m.verdict.criterion;
        h.disconjugacy_window_limited = !(h.periodicity_ok && ex.hi() - ex.lo() >= T);
      }
    } catch (const NonDifferentiableError&) {
    }
    if (!h.disconjugacy_ok && is_disconjugate(eq, window, opt.criteria.shoot).disconjugate()) {
      h.disconjugacy_ok = true;
      h.disconjugacy_source = "oracle";
      h.disconjugacy_window_limited = true;
    }
  }

  v.monodromy = monodromy(eq, opt.a, T, opt.monodromy);
  const double d = v.monodromy.unit_singular_distance;
  v.second_base_point = opt.a + T / 3;
  const auto m2 = monodromy(eq, v.second_base_point, T, opt.monodromy);
  v.base_point_agrees = classify(m2.unit_singular_distance, opt) == classify(d, opt);

  if (h.all_hold()) {
    v.theorem_applied = true;
    v.kind = PeriodicKind::NoNontrivialPeriodic;
    v.cross_validated = d > opt.none_above && v.monodromy.unit_eigen_distance > opt.none_above;
    if (!*v.cross_validated) v.note = "hypotheses hold but the period map is close to having the eigenvalue 1";
    return v;
  }
  v.kind = classify(d, opt);
  if (v.kind == PeriodicKind::HasPeriodic) {
    // null vector of M - I: orthogonal to its larger row
    const auto& M = v.monodromy.matrix;
    const double r1[2] = {M[0][0] - 1, M[0][1]};
    const double r2[2] = {M[1][0], M[1][1] - 1};
    const double* r = std::hypot(r1[0], r1[1]) >= std::hypot(r2[0], r2[1]) ? r1 : r2;
    double x = -r[1], dx = r[0];
    const double len = std::hypot(x, dx);
    if (len == 0.0) {
      x = 1.0;
      dx = 0.0;
    } else {
      x /= len;
      dx /= len;
    }
    v.witness = State{x, dx};
    const auto back = period_map(eq, opt.a, T, {x, dx}, opt.monodromy);
    v.witness_return_error = double(std::hypot(back[0] - x, back[1] - dx));
  }
  std::string why;
  if (!h.q_sign_ok) why = "q is " + h.q_sign;
  else if (!h.periodicity_ok) why = "coefficients are not T-periodic";
  else if (!h.disconjugacy_ok) why = "disconjugacy on the line is not established";
  else why = "disconjugacy only checked on the window";
  v.note = "hypotheses fail (" + why + "); answer from the period map";
  return v;
}

Json to_json(const MonodromyReport& m) {
  Json eig = Json::array();
  for (const auto& l : m.eigenvalues) eig.push_back({{"re", json_number(l.real())}, {"im", json_number(l.imag())}});
  return {{"base_point", m.a},
          {"period", m.T},
          {"matrix", {{json_number(m.matrix[0][0]), json_number(m.matrix[0][1])},
                      {json_number(m.matrix[1][0]), json_number(m.matrix[1][1])}}},
          {"eigenvalues", eig},
          {"eigen_residual", json_number(m.eigen_residual)},
          {"det_check",
           {{"det", json_number(m.det)},
            {"expected", json_number(m.det_expected)},
            {"rel_error", json_number(m.det_rel_error)},
            {"ok", m.liouville_ok()}}},
          {"unit_eigen_distance", json_number(m.unit_eigen_distance)},
          {"unit_singular_distance", json_number(m.unit_singular_distance)}};
}

Json to_json(const HypothesisReport& h) {
  return {{"q_sign", h.q_sign},
          {"q_sign_ok", h.q_sign_ok},
          {"p_periodic", h.p_periodic},
          {"q_periodic", h.q_periodic},
          {"periodicity_ok", h.periodicity_ok},
          {"disconjugacy_ok", h.disconjugacy_ok},
          {"disconjugacy_source", h.disconjugacy_source},
          {"disconjugacy_window_limited", h.disconjugacy_window_limited}};
}

Json to_json(const PeriodicVerdict& v) {
  Json m = to_json(v.monodromy);
  Json j{{"matrix", m["matrix"]},
         {"eigenvalues", m["eigenvalues"]},
         {"det_check", m["det_check"]},
         {"verdict", to_string(v.kind)},
         {"hypothesis_report", to_json(v.hypotheses)},
         {"theorem_applied", v.theorem_applied},
         {"cross_validated", v.cross_validated ? Json(*v.cross_validated) : Json(nullptr)},
         {"monodromy", m}};
  if (v.witness) {
    j["witness"] = {{"x", v.witness->x}, {"dx", v.witness->dx}, {"return_error", v.witness_return_error}};
  }
  j["second_base_point"] = v.second_base_point;
  j["base_point_agrees"] = v.base_point_agrees;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace disconj
