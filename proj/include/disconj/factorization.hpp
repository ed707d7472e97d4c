#pragma once

// Factorization Lx = h2 (h1 (h0 x)')' with positive factors on an interval
// of disconjugacy, and the zero-count inequality it implies.

#include <iosfwd>
#include <memory>
#include <vector>

#include "disconj/conjugacy.hpp"
#include "disconj/quadrature.hpp"

namespace disconj {

/// h0 = 1/y, h1 = y^2/w, h2 = w/y from a positive solution y and a companion
/// u with w = y u' - y' u > 0 (Abel's formula from the left end).
class Factorization {
 public:
  Factorization(Equation eq, Interval iv, Trajectory y, Trajectory u, double w_lo);

  [[nodiscard]] double y(double t) const { return y_.x(t); }
  [[nodiscard]] double dy(double t) const { return y_.dx(t); }
  [[nodiscard]] double w(double t) const;
  /// y u' - y' u from the trajectories, for comparison with w.
  [[nodiscard]] double w_direct(double t) const;

  [[nodiscard]] double h0(double t) const { return 1.0 / y(t); }
  [[nodiscard]] double h1(double t) const;
  [[nodiscard]] double h2(double t) const { return w(t) / y(t); }
  [[nodiscard]] double product(double t) const { return h0(t) * h1(t) * h2(t); }

  /// Interval the factors live on; open ends exclude a zero of y.
  [[nodiscard]] const Interval& interval() const noexcept { return iv_; }
  [[nodiscard]] const Equation& equation() const noexcept { return eq_; }
  [[nodiscard]] const Trajectory& positive_solution() const noexcept { return y_; }
  [[nodiscard]] const Trajectory& companion() const noexcept { return u_; }

  /// Grid of n+1 points, open ends left out.
  [[nodiscard]] std::vector<double> grid(int n) const;

  /// '#' metadata, then t,h0,h1,h2,product.
  void write_csv(std::ostream& out, int n = 512) const;

 private:
  Equation eq_;
  Interval iv_;
  Trajectory y_;
  Trajectory u_;
  double w_lo_;
  std::shared_ptr<AntiDerivative> int_p_;
};

struct FactorizationCheck {
  double product_error = 0.0;  // max |h0 h1 h2 - 1|
  double min_factor = 0.0;     // min over the grid of h0, h1, h2
  double wronskian_gap = 0.0;  // max |w - w_direct| / |w|
  [[nodiscard]] bool holds(double tol = 1e-8) const noexcept { return product_error <= tol && min_factor > 0.0; }
};

/// Needs the oracle to confirm disconjugacy on `iv` (PreconditionError
/// otherwise); throws IntegrationError if w fails to stay positive.
[[nodiscard]] Factorization build_factorization(const Equation& eq, const Interval& iv, const ShootOptions& opt = {});

[[nodiscard]] FactorizationCheck check_factorization(const Factorization& f, int n = 512);

struct FactoredResidual {
  double max_abs = 0.0;  // max |L u - h2 (h1 (h0 u)')'|
  double max_rel = 0.0;  // same over |u''| + |p u'| + |q u| at each point
  double scale = 0.0;    // max |u''| + |p u'| + |q u|
};

/// Both sides of the factored form for a test function, on n+1 grid points.
/// The factored side uses y'' = -p y' - q y and w' = -p w.
[[nodiscard]] FactoredResidual verify_factorization(const Factorization& f, const CoeffExpr& u_test, int n = 512);

struct RolleCount {
  std::vector<double> zeros_u;
  std::vector<double> zeros_Lu;
  int m = 0;
  int k = 0;
  [[nodiscard]] bool holds() const noexcept { return k >= m - 2; }
};

/// Geometrically distinct zeros of u and of Lu on `iv` (PreconditionError if
/// the oracle does not confirm disconjugacy there).
[[nodiscard]] RolleCount generalized_rolle_check(const Equation& eq, const Interval& iv, const CoeffExpr& u_test,
                                                 int samples = 8192, const ShootOptions& opt = {});

}  // namespace disconj
