#include "disconj/interval.hpp"

#include <cmath>
#include <string>

#include "disconj/errors.hpp"
#include "disconj/expr.hpp"
#include "disconj/text.hpp"

namespace disconj {

Interval::Interval(double lo, double hi, bool lo_closed, bool hi_closed)
    : lo_(lo), hi_(hi), lo_closed_(lo_closed), hi_closed_(hi_closed) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw PreconditionError("interval needs lo < hi, got " + format_number(lo) + ", " + format_number(hi));
  }
  if (std::isinf(lo)) lo_closed_ = false;
  if (std::isinf(hi)) hi_closed_ = false;
}

bool Interval::finite() const noexcept { return std::isfinite(lo_) && std::isfinite(hi_); }

bool Interval::contains(double t) const noexcept {
  bool above = lo_closed_ ? t >= lo_ : t > lo_;
  bool below = hi_closed_ ? t <= hi_ : t < hi_;
  return above && below;
}

bool Interval::contains(const Interval& o) const noexcept {
  bool lo_ok = o.lo_ > lo_ || (o.lo_ == lo_ && (lo_closed_ || !o.lo_closed_));
  bool hi_ok = o.hi_ < hi_ || (o.hi_ == hi_ && (hi_closed_ || !o.hi_closed_));
  return lo_ok && hi_ok;
}

Interval Interval::closure() const { return {lo_, hi_, true, true}; }

Interval Interval::truncate(double window_lo, double window_hi) const {
  double lo = lo_;
  double hi = hi_;
  bool lc = lo_closed_;
  bool hc = hi_closed_;
  if (std::isinf(lo) || lo < window_lo) {
    lo = window_lo;
    lc = true;
  }
  if (std::isinf(hi) || hi > window_hi) {
    hi = window_hi;
    hc = true;
  }
  return {lo, hi, lc, hc};
}

std::string Interval::to_string() const {
  return std::string(lo_closed_ ? "[" : "(") + format_number(lo_) + "," + format_number(hi_) + (hi_closed_ ? "]" : ")");
}

namespace {

double parse_endpoint(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  CoeffExpr e = CoeffExpr::parse(s);
  if (e.depends_on_t()) throw ParseError("interval endpoint must not depend on t", 0);
  return e.eval(0.0);
}

}  // namespace

Interval Interval::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.size() < 5) throw ParseError("interval must look like [a,b]", 0);
  char open = text.front();
  char close = text.back();
  if ((open != '[' && open != '(') || (close != ']' && close != ')')) {
    throw ParseError("interval must start with '[' or '(' and end with ']' or ')'", 0);
  }
  std::string_view body = text.substr(1, text.size() - 2);
  // split on the comma at parenthesis depth zero
  int depth = 0;
  std::size_t comma = std::string_view::npos;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '(') ++depth;
    if (body[i] == ')') --depth;
    if (body[i] == ',' && depth == 0) {
      comma = i;
      break;
    }
  }
  if (comma == std::string_view::npos) throw ParseError("interval needs two endpoints", 1);
  return {parse_endpoint(body.substr(0, comma)), parse_endpoint(body.substr(comma + 1)), open == '[', close == ']'};
}

}  // namespace disconj
