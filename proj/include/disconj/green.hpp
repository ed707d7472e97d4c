#pragma once

// Green's function of the Dirichlet problem Lx = f, x(a) = x(b) = 0.

#include <functional>
#include <iosfwd>
#include <memory>

#include "disconj/conjugacy.hpp"
#include "disconj/quadrature.hpp"

namespace disconj {

struct GreenOptions {
  Tolerances tol{1e-12, 1e-14};
  double quad_abs = 1e-10;
};

/// G(t,s) = phi(s) chi(t) / W(s) for s <= t and phi(t) chi(s) / W(s) for t < s,
/// with phi = C(., a), chi the solution with chi(b) = 0, chi'(b) = 1 and W
/// their Wronskian from Abel's formula anchored at a.
class GreenFunction {
 public:
  GreenFunction(const Equation& eq, double a, double b, const GreenOptions& opt = {});

  [[nodiscard]] double operator()(double t, double s) const;
  /// dG/dt; on the diagonal `upper` picks the side t > s.
  [[nodiscard]] double dt(double t, double s, bool upper = true) const;
  /// Derivative jump dG/dt(s+, s) - dG/dt(s-, s), from the trajectories.
  [[nodiscard]] double jump(double s) const;
  /// Wronskian of (phi, chi) from Abel's formula.
  [[nodiscard]] double wronskian(double s) const;
  /// The same Wronskian as a determinant of the integrated states.
  [[nodiscard]] double wronskian_direct(double s) const;

  /// -C(b,t) C(s,a) / C(b,a) for s < t, -C(t,a) C(b,s) / C(b,a) otherwise,
  /// with the Cauchy functions C(b, .) shot afresh for each call.
  [[nodiscard]] double cauchy_identity(double t, double s) const;

  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  [[nodiscard]] const Trajectory& phi() const noexcept { return phi_; }
  [[nodiscard]] const Trajectory& chi() const noexcept { return chi_; }
  [[nodiscard]] const Equation& equation() const noexcept { return eq_; }
  [[nodiscard]] const GreenOptions& options() const noexcept { return opt_; }

  /// CSV rows t,s,G over an n x n mesh of [a,b]^2.
  void write_csv(std::ostream& out, int n) const;

 private:
  Equation eq_;
  double a_, b_;
  GreenOptions opt_;
  Trajectory phi_;
  Trajectory chi_;
  std::shared_ptr<AntiDerivative> int_p_;
  double w_a_ = 0.0;
};

/// Builds G after confirming disconjugacy on [a, b] with the shooting oracle.
/// Throws PreconditionError when that fails.
[[nodiscard]] GreenFunction green_function(const Equation& eq, double a, double b, const GreenOptions& opt = {});

struct GreenCheck {
  double boundary = 0.0;         // max |G(a,s)|, |G(b,s)|
  double continuity = 0.0;       // max |G(s+,s) - G(s-,s)|
  double jump_error = 0.0;       // max |jump - 1|
  double operator_residual = 0.0;  // max |LG| / max (|G''| + |pG'| + |qG|) per column, off the diagonal
  double max_interior = 0.0;     // max G over the open square (negative when disconjugate)
  double identity_gap = 0.0;     // max |G - cauchy_identity|
};

/// Evaluates the defining conditions on an n x n interior mesh.
[[nodiscard]] GreenCheck verify_green(const GreenFunction& g, int n = 16, bool with_identity = true);

/// x(t) = int_a^b G(t,s) f(s) ds with x' likewise, each by adaptive
/// quadrature split at s = t.
class BvpSolution {
 public:
  BvpSolution(std::shared_ptr<const GreenFunction> g, std::function<double(double)> f, Trajectory traj);

  [[nodiscard]] double x(double t) const;
  [[nodiscard]] double dx(double t) const;
  /// x'' + p x' + q x - f with x'' from differences of dx; the step shrinks
  /// while successive estimates converge, one-sided next to breakpoints.
  [[nodiscard]] double residual(double t) const;
  /// |residual| / (|x''| + |p x'| + |q x| + |f|) at the same point.
  [[nodiscard]] double relative_residual(double t) const;
  /// Hermite interpolant through quadrature values at uniform nodes.
  [[nodiscard]] const Trajectory& trajectory() const noexcept { return traj_; }

 private:
  std::shared_ptr<const GreenFunction> g_;
  std::function<double(double)> f_;
  Trajectory traj_;
};

[[nodiscard]] BvpSolution solve_bvp(const Equation& eq, const std::function<double(double)>& f, double a, double b,
                                    const GreenOptions& opt = {}, int nodes = 256);
[[nodiscard]] BvpSolution solve_bvp(const Equation& eq, const CoeffExpr& f, double a, double b,
                                    const GreenOptions& opt = {}, int nodes = 256);

/// Reference solution by shooting: particular solution from a plus the
/// multiple of C(., a) that vanishes at b.
[[nodiscard]] Trajectory shoot_bvp(const Equation& eq, const std::function<double(double)>& f, double a, double b,
                                   Tolerances tol = {1e-12, 1e-14});

}  // namespace disconj
