#pragma once

// Sufficient conditions for disconjugacy in terms of the coefficients, the
// (p,q)-plane regions and the half-line substitution.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "disconj/conjugacy.hpp"
#include "json.hpp"

namespace disconj {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// (p,q)-plane regions

enum class Region { N, O, Mplus, Mminus };

/// N: p^2 - 4q >= 0, O: its complement, M+(g): q <= -g^2 + g p,
/// M-(g): q <= -g^2 - g p.
struct RegionQuery {
  Region region = Region::N;
  std::optional<double> gamma;  // present iff region is Mplus or Mminus

  static RegionQuery N() { return {Region::N, std::nullopt}; }
  static RegionQuery O() { return {Region::O, std::nullopt}; }
  static RegionQuery Mplus(double gamma);
  static RegionQuery Mminus(double gamma);

  /// Signed margin: <= 0 inside the closed region (O uses the open side).
  [[nodiscard]] double excess(double p, double q) const;
  [[nodiscard]] bool contains(double p, double q) const;
  [[nodiscard]] std::string to_string() const;
};

/// Does the curve t -> (p(t), q(t)) over the window stay in the region?
struct RegionCheck {
  bool inside = false;
  double worst_excess = 0.0;
  double worst_t = 0.0;
};

[[nodiscard]] RegionCheck curve_in_region(const Equation& eq, const Interval& window, const RegionQuery& region);

// ---------------------------------------------------------------------------
// grid checks

/// "for all t" inequalities are verified on a uniform grid with golden-section
/// refinement around near-active points.
struct GridOptions {
  int points = 2048;
  double slack_rel = 1e-9;   // tolerance for non-strict inequalities
  double active_rel = 1e-6;  // refine where the margin is below this
  int max_refinements = 48;
};

struct GridMax {
  double value = 0.0;  // max of lhs - rhs - slack (<= 0 means the inequality holds)
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  int evaluations = 0;
  [[nodiscard]] bool holds() const noexcept { return value <= 0.0; }
};

/// Checks lhs(t) <= rhs(t) over the grid of `iv` (its endpoints are included
/// only when the interval contains them). The slack is relative to `scale`,
/// by default |lhs| + |rhs|, plus its maximum over the grid.
[[nodiscard]] GridMax check_inequality(const std::function<double(double)>& lhs,
                                       const std::function<double(double)>& rhs, const Interval& iv,
                                       const GridOptions& opt = {}, const std::function<double(double)>& scale = {});

// ---------------------------------------------------------------------------
// criteria

/// A verdict with the data that produced it. The verdict's `examined`
/// interval is the interval the criterion makes its claim about.
struct CriterionResult {
  std::string name;
  Verdict verdict;
  Json certificate = Json::object();
  double elapsed_ms = 0.0;

  [[nodiscard]] bool fired() const noexcept { return verdict.disconjugate(); }
};

struct CriteriaOptions {
  GridOptions grid{};
  ShootOptions shoot{};
};

/// Constant coefficients: disconjugate on the line iff p^2 - 4q >= 0.
[[nodiscard]] CriterionResult check_constant(const Equation& eq, const Interval& iv = Interval::real_line(),
                                             const CriteriaOptions& opt = {});
/// p = c/t on a subinterval of (0, inf) with q(t) <= (c-1)^2 / (4 t^2).
[[nodiscard]] CriterionResult check_euler(const Equation& eq, const Interval& iv, const CriteriaOptions& opt = {});
/// p = 0 and int_a^b q+ <= 4/(b-a): disconjugate on [a, b].
[[nodiscard]] CriterionResult check_lyapunov(const Equation& eq, double a, double b, const CriteriaOptions& opt = {});
/// Test function v > 0 with Lv <= 0.
[[nodiscard]] CriterionResult check_vallee_poussin(const Equation& eq, const Interval& iv, const CoeffExpr& v,
                                                   const CriteriaOptions& opt = {});
/// q <= 0.
[[nodiscard]] CriterionResult check_A(const Equation& eq, const Interval& iv, const CriteriaOptions& opt = {});
/// Sine test function on [a, b).
[[nodiscard]] CriterionResult check_B(const Equation& eq, double a, double b, const CriteriaOptions& opt = {});
/// Parabola test function on [a, b), forms C1 and C2.
[[nodiscard]] CriterionResult check_C(const Equation& eq, double a, double b, const CriteriaOptions& opt = {});
/// Exponential test function e^{nu t} over the window.
[[nodiscard]] CriterionResult check_D(const Equation& eq, const Interval& window, const CriteriaOptions& opt = {});
/// Test function from the constant-coefficient problem x'' + P x' + Q x = -1.
[[nodiscard]] CriterionResult check_XA1(const Equation& eq, double a, double b, double P, double Q,
                                        const CriteriaOptions& opt = {});
/// The case Q = 0 with closed-form bounds on v and v'.
[[nodiscard]] CriterionResult check_XA2(const Equation& eq, double a, double b, double P,
                                        const CriteriaOptions& opt = {});
/// Test function from x'' + p(t) x' = -1.
[[nodiscard]] CriterionResult check_XA3(const Equation& eq, double a, double b, const CriteriaOptions& opt = {});

/// Kernel M(t,s) >= 0 with int M ds = v, the solution of x'' + P x' + Q x = -1
/// vanishing at a and b. `literal` selects the form C(b,t) C(s,a) / C(b,a)
/// on s <= t instead of the exact one.
class ConstantKernel {
 public:
  ConstantKernel(double a, double b, double P, double Q);
  /// Cauchy function C(tau) of x'' + P x' + Q x = 0 and its derivative.
  [[nodiscard]] double cauchy(double tau) const;
  [[nodiscard]] double cauchy_dt(double tau) const;
  [[nodiscard]] double M(double t, double s, bool literal = false) const;
  [[nodiscard]] double dM(double t, double s, bool literal = false) const;
  /// int_a^b M(t,s) ds and int_a^b dM/dt ds, reduced to integrals of C.
  [[nodiscard]] double v(double t, bool literal = false) const;
  [[nodiscard]] double dv(double t, bool literal = false) const;
  /// C(b - a) > 0, i.e. the auxiliary equation is disconjugate on [a, b).
  [[nodiscard]] bool admissible() const noexcept { return c_len_ > 0.0; }

 private:
  double a_, b_, P_, Q_;
  [[nodiscard]] double panel_integral(const std::function<double(double)>& f, double x) const;
  [[nodiscard]] double int_c(double x) const;
  [[nodiscard]] double int_c_damped(double x) const;

  int kind_ = 0;  // 0 real distinct, 1 double, 2 complex
  double mu_ = 0.0;
  double c_len_ = 0.0;
};

/// Closed-form v, v' for Q = 0: x'' + P x' = -1, x(a) = x(b) = 0.
struct Xa2Factors {
  double displayed_dv = 0.0;  // |P(b-a) + e^{-P(b-a)} - 1| / (P (1 - e^{-P(b-a)}))
  double displayed_v = 0.0;   // 2((b-a)/2 - (1 - e^{-P(b-a)/2})/P) / (P (1 + e^{-P(b-a)/2}))
  double sup_dv = 0.0;        // max |v'| on [a, b]
  double sup_v = 0.0;         // max v on [a, b]
};

[[nodiscard]] Xa2Factors xa2_factors(double a, double b, double P);

// --- the six conditions on the whole line, checked over a finite window ---

struct MainOptions {
  /// User-supplied r for condition 6; otherwise the constants in r_family.
  std::optional<CoeffExpr> r;
  std::vector<double> r_family{-4, -2, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 4};
};

/// One condition (1..6) over the window.
[[nodiscard]] CriterionResult check_condition(const Equation& eq, const Interval& window, int condition,
                                              const MainOptions& mopt = {}, const CriteriaOptions& opt = {});
/// Conditions in the order 1, 3, 4, 5, 2, 6; the first that fires decides.
/// Throws NonDifferentiableError when p has no symbolic derivative and
/// conditions 4-6 are reached.
[[nodiscard]] CriterionResult check_main(const Equation& eq, const Interval& window, const MainOptions& mopt = {},
                                         const CriteriaOptions& opt = {});

// --- Lyapunov sharpness ---

struct SharpnessFamily {
  Equation eq;      // x'' + q x = 0 on [0, 1], solved by v
  CoeffExpr v;      // v = t, smooth cap, 1 - t
  double integral;  // int_0^1 q
  double bound;     // 4 / (1 - 2 delta)
};

/// v(t) = t on [0, 1/2 - delta], 1 - t on [1/2 + delta, 1], joined by an even
/// polynomial cap with v'' < 0 matching value, slope and curvature; q = -v''/v.
/// `steepness` k = 0 is the quintic cap; larger k pushes the bend toward the
/// joints, bringing the integral closer to the bound.
[[nodiscard]] SharpnessFamily lyapunov_sharpness_family(double delta, int steepness = 20);

// --- all of the above ---

struct RunOptions {
  CriteriaOptions criteria{};
  MainOptions main{};
  std::optional<CoeffExpr> test_function;  // for the Vallee-Poussin check
  std::optional<double> P;                 // XA1 / XA2 auxiliary coefficients
  std::optional<double> Q;
  bool parallel = true;
};

struct SoundnessViolation {
  std::string criterion;
  Interval interval;
  Verdict oracle;
};

struct CriteriaReport {
  Equation equation;
  Interval interval;  // queried
  Interval examined;  // finite interval the criteria ran on
  std::vector<CriterionResult> entries;
  std::vector<SoundnessViolation> violations;

  [[nodiscard]] bool sound() const noexcept { return violations.empty(); }
  [[nodiscard]] bool any_fired() const;
  /// [{criterion, verdict, certificate, elapsed_ms}, ...]
  [[nodiscard]] Json to_json() const;
};

/// Runs every applicable criterion on a finite truncation of `iv` and checks
/// each positive answer against the shooting oracle on the interval it claims.
[[nodiscard]] CriteriaReport run_all(const Equation& eq, const Interval& iv, const RunOptions& opt = {});

[[nodiscard]] Json to_json(const CriterionResult& r);

// --- half-line substitution ---

struct HalfLineSubstitution {
  /// x'' + p(a + t^2) x' + q(a + t^2) x = 0 (coefficients composed as written).
  Equation composed;
  /// y(tau) = x(a + tau^2): y'' + (2 tau p(a+tau^2) - 1/tau) y' + 4 tau^2 q(a+tau^2) y = 0 on tau > 0.
  Equation chain_rule;
};

[[nodiscard]] HalfLineSubstitution substitute_half_line(const Equation& eq, double a);

struct HalfLineComparison {
  Verdict original;    // on (a, a + length)
  Verdict composed;    // on [-sqrt(length), sqrt(length)]
  Verdict chain_rule;  // on (0, sqrt(length))
  bool composed_agrees = false;
  bool chain_rule_agrees = false;
};

[[nodiscard]] HalfLineComparison compare_half_line(const Equation& eq, double a, double length = 25.0,
                                                   const ShootOptions& opt = {});

}  // namespace disconj
