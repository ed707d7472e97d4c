#include "disconj/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "disconj/errors.hpp"

namespace disconj {

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) throw QuadratureError("quadrature needs finite limits");
  double err = 0.0;
  double l1 = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double v = GK::integrate(f, a, b, 15, rel_tol, &err, &l1);
  if (!std::isfinite(v)) throw QuadratureError("quadrature produced a non-finite value");
  // boost stops on the relative criterion; accept the absolute one as well
  if (err > std::max(abs_tol, 1e3 * rel_tol * l1)) {
    throw QuadratureError("quadrature error estimate " + std::to_string(err) + " above tolerance");
  }
  return {v, err};
}

AntiDerivative::AntiDerivative(const std::function<double(double)>& f, double a, double lo, double hi, double rel_tol,
                               double abs_tol)
    : a_(a), lo_(lo), hi_(hi) {
  if (!(lo <= a && a <= hi)) throw PreconditionError("antiderivative base point outside its span");
  Dopri5Options<double, 1> opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = abs_tol;
  auto rhs = [&f](double t, const Vec<double, 1>&) { return Vec<double, 1>{f(t)}; };
  right_ = std::make_shared<const DenseSolution<double, 1>>(dopri5<double, 1>(rhs, a, {0.0}, hi, opt).solution);
  left_ = std::make_shared<const DenseSolution<double, 1>>(dopri5<double, 1>(rhs, a, {0.0}, lo, opt).solution);
}

double AntiDerivative::operator()(double t) const {
  t = std::clamp(t, lo_, hi_);
  return t >= a_ ? (*right_)(t)[0] : (*left_)(t)[0];
}

}  // namespace disconj
