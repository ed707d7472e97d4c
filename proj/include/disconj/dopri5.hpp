#pragma once

// Dormand-Prince 5(4) with proportional-integral step control and the
// 4th-order continuous extension of Hairer, Norsett & Wanner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "disconj/errors.hpp"

namespace disconj {

template <typename Real, std::size_t N>
using Vec = std::array<Real, N>;

/// One accepted step with its interpolation coefficients. `h` is signed.
template <typename Real, std::size_t N>
struct DenseStep {
  Real t0{};
  Real h{};
  std::array<Vec<Real, N>, 5> r{};

  [[nodiscard]] Real t1() const { return t0 + h; }
  [[nodiscard]] Real lo() const { return h > 0 ? t0 : t0 + h; }
  [[nodiscard]] Real hi() const { return h > 0 ? t0 + h : t0; }

  [[nodiscard]] Vec<Real, N> eval(Real t) const {
    const Real theta = (t - t0) / h;
    const Real theta1 = Real(1) - theta;
    Vec<Real, N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
    }
    return y;
  }

  /// Cubic Hermite step through (t0, y0, f0) and (t0 + h, y1, f1).
  static DenseStep hermite(Real t0, Real h, const Vec<Real, N>& y0, const Vec<Real, N>& f0, const Vec<Real, N>& y1,
                           const Vec<Real, N>& f1) {
    DenseStep s;
    s.t0 = t0;
    s.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      s.r[0][i] = y0[i];
      s.r[1][i] = y1[i] - y0[i];
      s.r[2][i] = h * f0[i] - s.r[1][i];
      s.r[3][i] = s.r[1][i] - h * f1[i] - s.r[2][i];
      s.r[4][i] = Real(0);
    }
    return s;
  }
};

/// Piecewise polynomial solution in integration order.
template <typename Real, std::size_t N>
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(std::vector<DenseStep<Real, N>> steps, Real t_begin, Real t_end, Vec<Real, N> y_begin,
                Vec<Real, N> y_end)
      : steps_(std::move(steps)), t_begin_(t_begin), t_end_(t_end), y_begin_(y_begin), y_end_(y_end) {}

  [[nodiscard]] const std::vector<DenseStep<Real, N>>& steps() const noexcept { return steps_; }
  [[nodiscard]] Real t_begin() const noexcept { return t_begin_; }
  [[nodiscard]] Real t_end() const noexcept { return t_end_; }
  [[nodiscard]] const Vec<Real, N>& y_begin() const noexcept { return y_begin_; }
  [[nodiscard]] const Vec<Real, N>& y_end() const noexcept { return y_end_; }
  [[nodiscard]] bool backward() const noexcept { return t_end_ < t_begin_; }
  [[nodiscard]] Real lo() const noexcept { return std::min(t_begin_, t_end_); }
  [[nodiscard]] Real hi() const noexcept { return std::max(t_begin_, t_end_); }

  /// Index of the step covering t (t is clamped into the span).
  [[nodiscard]] std::size_t locate(Real t) const {
    if (steps_.empty()) return 0;
    auto begin = steps_.begin();
    auto it = backward() ? std::partition_point(begin, steps_.end(), [t](const auto& s) { return s.t1() > t; })
                         : std::partition_point(begin, steps_.end(), [t](const auto& s) { return s.t1() < t; });
    if (it == steps_.end()) --it;
    return static_cast<std::size_t>(it - begin);
  }

  [[nodiscard]] Vec<Real, N> operator()(Real t) const {
    if (steps_.empty()) return y_begin_;
    if (t == t_begin_) return y_begin_;
    if (t == t_end_) return y_end_;
    return steps_[locate(t)].eval(t);
  }

 private:
  std::vector<DenseStep<Real, N>> steps_;
  Real t_begin_{};
  Real t_end_{};
  Vec<Real, N> y_begin_{};
  Vec<Real, N> y_end_{};
};

template <typename Real, std::size_t N>
struct Dopri5Options {
  Real rel_tol = Real(1e-10);
  Real abs_tol = Real(1e-12);
  /// Points where the right-hand side may be discontinuous; the integrator
  /// lands exactly on each one and restarts.
  std::vector<Real> breakpoints;
  std::size_t max_steps = 2'000'000;
  bool keep_dense = true;
  /// Called after every accepted step; returning true ends the integration.
  std::function<bool(const DenseStep<Real, N>&)> stop;
};

template <typename Real, std::size_t N>
struct Dopri5Result {
  DenseSolution<Real, N> solution;
  bool stopped = false;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace dopri5_detail {

template <typename Real, std::size_t N>
Real error_norm(const Vec<Real, N>& err, const Vec<Real, N>& y0, const Vec<Real, N>& y1, Real rtol, Real atol) {
  Real acc = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const Real sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const Real e = err[i] / sc;
    acc += e * e;
  }
  return std::sqrt(acc / Real(N));
}

template <typename Real, std::size_t N>
bool all_finite(const Vec<Real, N>& v) {
  for (const Real& x : v) {
    if (!std::isfinite(static_cast<double>(x))) return false;
  }
  return true;
}

}  // namespace dopri5_detail

/// Integrates y' = f(t, y) from t0 to t1 (either direction).
/// `f` has signature Vec<Real,N>(Real t, const Vec<Real,N>& y).
template <typename Real, std::size_t N, typename Rhs>
Dopri5Result<Real, N> dopri5(Rhs&& f, Real t0, const Vec<Real, N>& y0, Real t1,
                             const Dopri5Options<Real, N>& opt = {}) {
  using V = Vec<Real, N>;
  using dopri5_detail::all_finite;
  using dopri5_detail::error_norm;

  static constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5, c5 = Real(8) / 9;
  static constexpr Real a21 = Real(1) / 5;
  static constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
  static constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
  static constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187, a53 = Real(64448) / 6561,
                        a54 = Real(-212) / 729;
  static constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247,
                        a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
  static constexpr Real a71 = Real(35) / 384, a73 = Real(500) / 1113, a74 = Real(125) / 192,
                        a75 = Real(-2187) / 6784, a76 = Real(11) / 84;
  static constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                        e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;
  static constexpr Real d1 = Real(-12715105075.0L) / Real(11282082432.0L),
                        d3 = Real(87487479700.0L) / Real(32700410799.0L),
                        d4 = Real(-10690763975.0L) / Real(1880347072.0L),
                        d5 = Real(701980252875.0L) / Real(199316789632.0L),
                        d6 = Real(-1453857185.0L) / Real(822651844.0L), d7 = Real(69997945.0L) / Real(29380423.0L);

  constexpr Real safe = Real(0.9);
  constexpr Real beta = Real(0.04);
  constexpr Real expo1 = Real(0.2) - beta * Real(0.75);
  constexpr Real facmin_inv = Real(5);   // at most 5x growth
  constexpr Real facmax_inv = Real(0.1); // at most 10x shrink

  Dopri5Result<Real, N> out;
  std::vector<DenseStep<Real, N>> steps;
  const Real dir = t1 >= t0 ? Real(1) : Real(-1);
  V y = y0;
  Real t = t0;
  if (t0 == t1) {
    out.solution = DenseSolution<Real, N>({}, t0, t1, y0, y0);
    return out;
  }

  // segment ends: breakpoints strictly between t0 and t1, then t1
  std::vector<Real> ends;
  for (Real b : opt.breakpoints) {
    if ((b - t0) * dir > 0 && (t1 - b) * dir > 0) ends.push_back(b);
  }
  std::sort(ends.begin(), ends.end(), [dir](Real a, Real b) { return a * dir < b * dir; });
  ends.push_back(t1);

  const Real eps = std::numeric_limits<Real>::epsilon();

  for (Real seg_end : ends) {
    V k1 = f(t, y);
    if (!all_finite<Real, N>(k1)) throw IntegrationError("non-finite derivative at t=" + std::to_string(double(t)));

    // initial step guess
    Real h;
    {
      Real d0 = 0, dd1 = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const Real sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
        d0 += (y[i] / sc) * (y[i] / sc);
        dd1 += (k1[i] / sc) * (k1[i] / sc);
      }
      d0 = std::sqrt(d0 / Real(N));
      dd1 = std::sqrt(dd1 / Real(N));
      Real h0 = (d0 < Real(1e-5) || dd1 < Real(1e-5)) ? Real(1e-6) : Real(0.01) * d0 / dd1;
      h0 = std::min(h0, std::abs(seg_end - t));
      V y1;
      for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
      V f1 = f(t + dir * h0, y1);
      Real d2 = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const Real sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
        d2 += ((f1[i] - k1[i]) / sc) * ((f1[i] - k1[i]) / sc);
      }
      d2 = std::sqrt(d2 / Real(N)) / h0;
      const Real dm = std::max(dd1, d2);
      const Real h1 = dm <= Real(1e-15) ? std::max(Real(1e-6), h0 * Real(1e-3)) : std::pow(Real(0.01) / dm, Real(0.2));
      h = std::min(Real(100) * h0, h1);
      h = std::min(h, std::abs(seg_end - t));
    }

    Real facold = Real(1e-4);
    bool last = false;
    bool reject = false;
    while (!last) {
      if (out.accepted + out.rejected >= opt.max_steps) {
        throw IntegrationError("step budget exhausted at t=" + std::to_string(double(t)));
      }
      if (h < Real(10) * eps * std::max(Real(1), std::abs(t))) {
        throw IntegrationError("step-size underflow at t=" + std::to_string(double(t)));
      }
      Real step = h;
      if ((t + dir * step - seg_end) * dir >= 0 || std::abs(seg_end - t - dir * step) < Real(1e-3) * step) {
        step = std::abs(seg_end - t);
        last = true;
      }
      const Real hs = dir * step;
      V yt, k2, k3, k4, k5, k6, k7, y_new, err;
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * a21 * k1[i];
      k2 = f(t + c2 * hs, yt);
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(t + c3 * hs, yt);
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(t + c4 * hs, yt);
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(t + c5 * hs, yt);
      for (std::size_t i = 0; i < N; ++i) {
        yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      const Real t_new = last ? seg_end : t + hs;
      k6 = f(t + hs, yt);
      for (std::size_t i = 0; i < N; ++i) {
        y_new[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      }
      k7 = f(t_new, y_new);
      for (std::size_t i = 0; i < N; ++i) {
        err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      }
      Real en = error_norm<Real, N>(err, y, y_new, opt.rel_tol, opt.abs_tol);
      if (!std::isfinite(static_cast<double>(en)) || !all_finite<Real, N>(y_new)) {
        if (!all_finite<Real, N>(y)) throw IntegrationError("solution overflow");
        en = Real(1e10);
      }

      const Real fac11 = std::pow(std::max(en, Real(1e-30)), expo1);
      if (en <= Real(1)) {
        Real fac = fac11 / std::pow(facold, beta);
        fac = std::max(facmax_inv, std::min(facmin_inv, fac / safe));
        facold = std::max(en, Real(1e-4));
        if (opt.keep_dense || opt.stop) {
          DenseStep<Real, N> ds;
          ds.t0 = t;
          ds.h = t_new - t;
          const Real hd = ds.h;
          for (std::size_t i = 0; i < N; ++i) {
            const Real ydiff = y_new[i] - y[i];
            const Real bspl = hd * k1[i] - ydiff;
            ds.r[0][i] = y[i];
            ds.r[1][i] = ydiff;
            ds.r[2][i] = bspl;
            ds.r[3][i] = ydiff - hd * k7[i] - bspl;
            ds.r[4][i] = hd * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
          }
          const bool stop_now = opt.stop && opt.stop(ds);
          if (opt.keep_dense) steps.push_back(ds);
          if (stop_now) {
            out.stopped = true;
            out.accepted++;
            out.solution = DenseSolution<Real, N>(std::move(steps), t0, t_new, y0, y_new);
            return out;
          }
        }
        out.accepted++;
        y = y_new;
        t = t_new;
        k1 = k7;
        Real h_next = step / fac;
        if (reject) h_next = std::min(h_next, step);
        reject = false;
        h = h_next;
        if (!all_finite<Real, N>(y)) throw IntegrationError("solution overflow");
      } else {
        out.rejected++;
        last = false;
        reject = true;
        h = step / std::min(facmin_inv, fac11 / safe);
      }
    }
    t = seg_end;
  }
  out.solution = DenseSolution<Real, N>(std::move(steps), t0, t1, y0, y);
  return out;
}

}  // namespace disconj
