#pragma once

// Period map of equations with T-periodic coefficients and the test for
// nontrivial T-periodic solutions.

#include <array>
#include <complex>
#include <optional>
#include <string>

#include "disconj/criteria.hpp"
#include "disconj/report.hpp"

namespace disconj {

struct MonodromyReport {
  double a = 0.0;
  double T = 0.0;
  /// Columns: states at a + T of the solutions with data (1,0) and (0,1) at a.
  std::array<std::array<double, 2>, 2> matrix{};
  std::array<std::complex<double>, 2> eigenvalues{};
  double det = 0.0;
  double det_expected = 0.0;  // exp(-int_a^{a+T} p)
  double det_rel_error = 0.0;
  double eigen_residual = 0.0;  // characteristic polynomial at the eigenvalues, relative
  double unit_eigen_distance = 0.0;  // min |lambda - 1|
  /// Smallest singular value of M - I. Zero exactly when 1 is an eigenvalue,
  /// and unlike the eigenvalues it moves only as much as M does.
  double unit_singular_distance = 0.0;

  [[nodiscard]] bool liouville_ok(double tol = 1e-7) const noexcept { return det_rel_error <= tol; }
};

struct MonodromyOptions {
  double rel_tol = 1e-15;
  double abs_tol = 1e-18;
};

/// Integrates in long double. Throws PreconditionError for T <= 0 or a span
/// outside the domain, IntegrationError on failure.
[[nodiscard]] MonodromyReport monodromy(const Equation& eq, double a, double T, const MonodromyOptions& opt = {});

struct PeriodicityCheck {
  double max_diff = 0.0;  // max |e(t+T) - e(t)|
  double scale = 0.0;     // 1 + max |e|
  bool periodic = false;  // max_diff <= 1e-9 scale
};

/// Compares e(t+T) with e(t) on n+1 points of [a, a+T].
[[nodiscard]] PeriodicityCheck check_periodicity(const CoeffExpr& e, double T, const ParamMap& params = {},
                                                 double a = 0.0, int n = 1024);

enum class PeriodicKind { NoNontrivialPeriodic, HasPeriodic, Borderline };

[[nodiscard]] std::string to_string(PeriodicKind k);

struct HypothesisReport {
  std::string q_sign;  // "nonnegative", "nonpositive", "indefinite" or "zero"
  bool q_sign_ok = false;
  bool p_periodic = false;
  bool q_periodic = false;
  bool periodicity_ok = false;
  bool disconjugacy_ok = false;
  std::string disconjugacy_source;  // criterion name, "oracle" or empty
  /// Only the oracle on the window vouches for disconjugacy, which is not
  /// the property on the whole line.
  bool disconjugacy_window_limited = false;

  [[nodiscard]] bool all_hold() const noexcept {
    return q_sign_ok && periodicity_ok && disconjugacy_ok && !disconjugacy_window_limited;
  }
};

struct PeriodicOptions {
  double a = 0.0;
  /// Classification of the distance of the period map from having the
  /// eigenvalue 1: below `has_below` a periodic solution, above
  /// `none_above` none, borderline in between.
  double has_below = 1e-8;
  double none_above = 1e-6;
  MonodromyOptions monodromy{};
  CriteriaOptions criteria{};
};

struct PeriodicVerdict {
  PeriodicKind kind = PeriodicKind::Borderline;
  HypothesisReport hypotheses;
  bool theorem_applied = false;
  /// With the theorem applied: the period map keeps 1 out of its spectrum.
  std::optional<bool> cross_validated;
  MonodromyReport monodromy;
  /// Initial data at a of the periodic solution (HasPeriodic only) and its
  /// relative mismatch after one period.
  std::optional<State> witness;
  double witness_return_error = 0.0;
  /// Same classification from a second base point.
  double second_base_point = 0.0;
  bool base_point_agrees = false;
  std::string note;
};

[[nodiscard]] PeriodicVerdict check_theorem_periodic(const Equation& eq, double T, const Interval& window,
                                                     const PeriodicOptions& opt = {});

[[nodiscard]] Json to_json(const MonodromyReport& m);
[[nodiscard]] Json to_json(const HypothesisReport& h);
/// {matrix, eigenvalues, det_check, verdict, hypothesis_report, ...}
[[nodiscard]] Json to_json(const PeriodicVerdict& v);

}  // namespace disconj
