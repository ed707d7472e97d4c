#pragma once

#include <limits>
#include <string>
#include <string_view>

namespace disconj {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real interval with independently open/closed endpoints. Infinite endpoints
/// are always open.
class Interval {
 public:
  Interval(double lo, double hi, bool lo_closed, bool hi_closed);

  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval closed_open(double lo, double hi) { return {lo, hi, true, false}; }
  static Interval open_closed(double lo, double hi) { return {lo, hi, false, true}; }
  static Interval real_line() { return {-kInf, kInf, false, false}; }

  /// Parses "[a,b]", "[a,b)", "(a,b]", "(a,b)"; "inf" / "-inf" accepted.
  static Interval parse(std::string_view text);

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }
  [[nodiscard]] bool lo_closed() const noexcept { return lo_closed_; }
  [[nodiscard]] bool hi_closed() const noexcept { return hi_closed_; }
  [[nodiscard]] bool finite() const noexcept;
  [[nodiscard]] double length() const noexcept { return hi_ - lo_; }

  [[nodiscard]] bool contains(double t) const noexcept;
  /// True when `other` is a subset of this interval.
  [[nodiscard]] bool contains(const Interval& other) const noexcept;

  [[nodiscard]] Interval closure() const;
  /// Intersection with [lo, hi]; infinite ends are replaced by the window ends
  /// (which then become closed).
  [[nodiscard]] Interval truncate(double window_lo, double window_hi) const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
  bool lo_closed_;
  bool hi_closed_;
};

}  // namespace disconj
