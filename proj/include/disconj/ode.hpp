#pragma once

// Second-order linear equations x'' + p(t) x' + q(t) x = 0, their numerical
// solutions with dense output, zero location and Wronskian identities.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "disconj/dopri5.hpp"
#include "disconj/expr.hpp"
#include "disconj/interval.hpp"

namespace disconj {

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;

  [[nodiscard]] Tolerances tightened(double factor) const { return {rel / factor, abs / factor}; }
};

class Equation {
 public:
  /// Throws DomainError if p or q fails to evaluate on an interior sampling
  /// grid of the domain (infinite domains are sampled on [-50, 50]).
  Equation(CoeffExpr p, CoeffExpr q, Interval domain = Interval::real_line(), ParamMap params = {},
           std::vector<double> breakpoints = {});

  static Equation parse(std::string_view p, std::string_view q, Interval domain = Interval::real_line(),
                        ParamMap params = {});

  [[nodiscard]] const CoeffExpr& p_expr() const noexcept { return p_; }
  [[nodiscard]] const CoeffExpr& q_expr() const noexcept { return q_; }
  /// Coefficients with parameters substituted.
  [[nodiscard]] CoeffExpr p_bound() const { return p_.bind(params_); }
  [[nodiscard]] CoeffExpr q_bound() const { return q_.bind(params_); }
  [[nodiscard]] const Interval& domain() const noexcept { return domain_; }
  [[nodiscard]] const ParamMap& params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  [[nodiscard]] double p(double t) const { return pc_(t); }
  [[nodiscard]] double q(double t) const { return qc_(t); }
  [[nodiscard]] bool p_constant() const noexcept { return pc_.is_constant(); }
  [[nodiscard]] bool q_constant() const noexcept { return qc_.is_constant(); }

  [[nodiscard]] Equation with_domain(Interval domain) const;
  [[nodiscard]] Equation with_coefficients(CoeffExpr p, CoeffExpr q) const;

  /// Human-readable "x'' + (p) x' + (q) x = 0".
  [[nodiscard]] std::string describe() const;

 private:
  CoeffExpr p_;
  CoeffExpr q_;
  Interval domain_;
  ParamMap params_;
  std::vector<double> breakpoints_;
  CompiledExpr pc_;
  CompiledExpr qc_;
};

struct State {
  double x = 0.0;
  double dx = 0.0;
};

struct TrajectoryNode {
  double t = 0.0;
  double x = 0.0;
  double dx = 0.0;
};

/// Dense numerical solution (x, x') over a finite span. Cheap to copy.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(DenseSolution<double, 2> solution, Tolerances tol, bool stopped_early = false);

  [[nodiscard]] double x(double t) const { return state(t).x; }
  [[nodiscard]] double dx(double t) const { return state(t).dx; }
  /// Throws PreconditionError outside the span (a relative slack of 1e-12 is allowed).
  [[nodiscard]] State state(double t) const;

  [[nodiscard]] Interval span() const;
  [[nodiscard]] double t_initial() const { return sol_->t_begin(); }
  [[nodiscard]] double t_final() const { return sol_->t_end(); }
  [[nodiscard]] State initial_state() const;
  [[nodiscard]] State final_state() const;
  [[nodiscard]] bool stopped_early() const noexcept { return stopped_; }
  [[nodiscard]] const Tolerances& tolerances() const noexcept { return tol_; }
  [[nodiscard]] std::size_t step_count() const { return sol_->steps().size(); }
  [[nodiscard]] const DenseSolution<double, 2>& dense() const { return *sol_; }
  [[nodiscard]] bool empty() const noexcept { return !sol_; }

  /// Step boundaries sorted by increasing t.
  [[nodiscard]] std::vector<TrajectoryNode> nodes() const;

  /// CSV: '#' metadata line with tolerances, header t,x,dx, one row per node.
  void write_csv(std::ostream& out) const;

 private:
  std::shared_ptr<const DenseSolution<double, 2>> sol_;
  Tolerances tol_;
  bool stopped_ = false;
};

/// Called with every accepted step; returning true stops the integration.
using StepObserver = std::function<bool(const DenseStep<double, 2>&)>;

/// Solves x(t0)=x0, x'(t0)=v0 up to t1 (t1 < t0 integrates backward).
[[nodiscard]] Trajectory integrate_ivp(const Equation& eq, double t0, double x0, double v0, double t1,
                                       Tolerances tol = {}, const StepObserver& stop = {});

/// Same for the forced equation Lx = f.
[[nodiscard]] Trajectory integrate_forced(const Equation& eq, const std::function<double(double)>& f, double t0,
                                          double x0, double v0, double t1, Tolerances tol = {});

/// Cauchy's function C(., s): value 0 and slope 1 at s.
[[nodiscard]] Trajectory cauchy(const Equation& eq, double s, double t1, Tolerances tol = {});

enum class ZeroKind { Simple, Suspect };

struct Zero {
  double t = 0.0;
  ZeroKind kind = ZeroKind::Simple;
};

struct ZeroSearch {
  double refine_rel = 1e-12;     // bisection width relative to 1+|t|
  double tangency_rel = 1e-8;    // suspect threshold relative to the solution scale
  int samples_per_step = 8;
};

using ZeroList = std::vector<Zero>;

/// Zeros of x over `window` (which must lie within the span). Sign changes of
/// the dense output are refined by bisection; dips of |x| below the tangency
/// threshold without a sign change are reported as suspect.
[[nodiscard]] ZeroList find_zeros(const Trajectory& traj, const Interval& window, const ZeroSearch& opt = {});

/// Zeros of an arbitrary continuous function sampled on `n` uniform cells of
/// [lo, hi]; adjacent zeros closer than `cluster` * (1+|t|) are merged.
[[nodiscard]] std::vector<double> function_zeros(const std::function<double(double)>& f, double lo, double hi,
                                                 std::size_t n, double cluster = 1e-7);

struct WronskianReport {
  double abel = 0.0;         // exp(-int_a^t p)
  double determinant = 0.0;  // y1 y2' - y1' y2 with y1(a)=(1,0), y2(a)=(0,1)
  double rel_diff = 0.0;
};

/// W(t)/W(a) from Abel's formula and from two integrated solutions.
[[nodiscard]] WronskianReport wronskian(const Equation& eq, double a, double t, Tolerances tol = {});

/// t -> u'' + p u' + q u built from symbolic derivatives of u.
class Residual {
 public:
  Residual(const Equation& eq, const CoeffExpr& u);
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double u(double t) const { return u_(t); }
  [[nodiscard]] double du(double t) const { return du_(t); }
  [[nodiscard]] double ddu(double t) const { return ddu_(t); }

 private:
  CompiledExpr p_, q_, u_, du_, ddu_;
};

[[nodiscard]] Residual apply_L(const Equation& eq, const CoeffExpr& u);

}  // namespace disconj
