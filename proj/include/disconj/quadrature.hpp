#pragma once

#include <functional>
#include <memory>

#include "disconj/dopri5.hpp"

namespace disconj {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (61 points) on a finite [a, b]. Throws
/// QuadratureError when the error estimate stays above
/// max(abs_tol, rel_tol * integral of |f|).
[[nodiscard]] QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                                   double abs_tol = 1e-10, double rel_tol = 1e-12);

/// F(t) = int_a^t f over [lo, hi] containing a, with dense output, so that
/// repeated evaluations cost one polynomial evaluation each.
class AntiDerivative {
 public:
  AntiDerivative(const std::function<double(double)>& f, double a, double lo, double hi, double rel_tol = 1e-12,
                 double abs_tol = 1e-14);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }

 private:
  double a_, lo_, hi_;
  std::shared_ptr<const DenseSolution<double, 1>> left_;
  std::shared_ptr<const DenseSolution<double, 1>> right_;
};

}  // namespace disconj
