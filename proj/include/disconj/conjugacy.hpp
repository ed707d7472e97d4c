#pragma once

// Conjugate points, the shooting decision for disconjugacy and positive
// solutions on intervals of disconjugacy.

#include <optional>
#include <string>
#include <vector>

#include "disconj/ode.hpp"

namespace disconj {

/// A real value or an infinite sentinel. The sentinel is returned when the
/// search window was exhausted without a sign change.
struct ExtendedPoint {
  double value = 0.0;
  bool window_limited = false;

  [[nodiscard]] bool finite() const noexcept { return !window_limited; }
  [[nodiscard]] std::string to_string() const;
};

enum class VerdictKind { GuaranteedDisconjugate, Inconclusive, NotDisconjugate };

[[nodiscard]] std::string to_string(VerdictKind k);

/// A solution with two zeros in the queried interval.
struct Witness {
  double a = 0.0;   // start point of the shot (x(a)=0 unless noted)
  double z1 = 0.0;  // first zero
  double z2 = 0.0;  // second zero
  Trajectory trajectory;
  /// Largest disagreement of the zeros against a 100x tighter re-integration.
  double residual = 0.0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::string criterion;  // what decided it ("oracle", "lyapunov", ...)
  std::optional<Witness> witness;
  /// The answer only covers a finite truncation of an unbounded interval.
  bool window_limited = false;
  /// Interval that was actually examined.
  std::optional<Interval> examined;
  std::string note;

  [[nodiscard]] bool disconjugate() const noexcept { return kind == VerdictKind::GuaranteedDisconjugate; }
  [[nodiscard]] bool not_disconjugate() const noexcept { return kind == VerdictKind::NotDisconjugate; }
};

struct ShootOptions {
  Tolerances tol{};
  /// Truncation of unbounded intervals: [-half, half] for the whole line,
  /// [a, a + length] (or [b - length, b]) for half-lines.
  double window_half = 50.0;
  double window_length = 100.0;
  /// Distance kept from an endpoint where a coefficient is singular, relative
  /// to the interval length.
  double margin_rel = 1e-6;
  /// Zeros within this relative distance of a closed endpoint count as lying
  /// on it.
  double endpoint_rel = 1e-9;
};

/// First zero after a of the solution with x(a)=0, x'(a)=1 in (a, window_hi].
[[nodiscard]] ExtendedPoint rho_plus(const Equation& eq, double a, double window_hi, const ShootOptions& opt = {});
/// Last zero before a of the same solution in [window_lo, a).
[[nodiscard]] ExtendedPoint rho_minus(const Equation& eq, double a, double window_lo, const ShootOptions& opt = {});

/// Finite interval actually examined for `iv`, after truncation of infinite
/// ends and the singular-endpoint margin. `limited` is set when truncated.
[[nodiscard]] Interval examined_interval(const Equation& eq, const Interval& iv, const ShootOptions& opt,
                                         bool* limited = nullptr);

/// Decides disconjugacy with one shot from the left end. Closed intervals
/// count zeros in (lo, hi]; all other interval types use (lo, hi).
[[nodiscard]] Verdict is_disconjugate(const Equation& eq, const Interval& iv, const ShootOptions& opt = {});

struct BruteForceReport {
  int n_angles = 0;
  int max_zero_count = 0;
  double worst_angle = 0.0;
  bool oracle_disconjugate = false;
  bool agrees = false;
};

/// Integrates n_angles solutions with data (cos th, sin th) at the left end
/// and counts their zeros in the interval.
[[nodiscard]] BruteForceReport crosscheck_bruteforce(const Equation& eq, const Interval& iv, int n_angles,
                                                     const ShootOptions& opt = {});

/// A solution positive on the interval (closed) or its interior (otherwise).
/// Throws PreconditionError when positivity fails on the check grid.
[[nodiscard]] Trajectory find_positive_solution(const Equation& eq, const Interval& iv, const ShootOptions& opt = {});

}  // namespace disconj
