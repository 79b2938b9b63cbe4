#pragma once

// Piecewise-affine functions on a segment and convex non-decreasing costs.
// Everything here is an immutable value type; all other headers build on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "monorearr/error.hpp"

namespace monorearr {

/// Closed segment [a, b] with a < b, both finite.
struct Interval {
  double a;
  double b;

  Interval(double lo, double hi) : a(lo), b(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      std::ostringstream os;
      os << "interval [" << lo << ", " << hi << "] must satisfy a < b with finite ends";
      throw Error(ErrorCode::InvalidInterval, os.str());
    }
  }

  double length() const noexcept { return b - a; }
  bool contains(double x) const noexcept { return a <= x && x <= b; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One affine piece: the open interval it lives on and its slope.
struct Piece {
  Interval span;
  double slope;
};

/// Continuous piecewise-affine function given by its values at strictly
/// increasing breakpoints. Continuity holds by representation.
class PiecewiseAffine {
 public:
  /// Relative gap (against the domain length) below which two breakpoints
  /// count as the same point.
  static constexpr double kMinRelativeGap = 1e-12;

  PiecewiseAffine(std::vector<double> breakpoints, std::vector<double> values)
      : x_(std::move(breakpoints)), v_(std::move(values)) {
    if (x_.size() != v_.size()) {
      throw Error(ErrorCode::LengthMismatch,
                  "breakpoints and values differ in length (" + std::to_string(x_.size()) +
                      " vs " + std::to_string(v_.size()) + ")");
    }
    if (x_.size() < 2) {
      throw Error(ErrorCode::LengthMismatch, "a piecewise-affine function needs at least two breakpoints");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(v_[i])) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite breakpoint or value at index " + std::to_string(i));
      }
    }
    const double min_gap = kMinRelativeGap * (x_.back() - x_.front());
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      if (!(x_[i + 1] - x_[i] > min_gap)) {
        throw Error(ErrorCode::NonIncreasingBreakpoints,
                    "breakpoints must be strictly increasing (index " + std::to_string(i + 1) + ")");
      }
    }
  }

  const std::vector<double>& breakpoints() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::size_t piece_count() const noexcept { return x_.size() - 1; }
  Interval domain() const { return {x_.front(), x_.back()}; }
  double length() const noexcept { return x_.back() - x_.front(); }

  double width(std::size_t i) const noexcept { return x_[i + 1] - x_[i]; }
  double slope(std::size_t i) const noexcept { return (v_[i + 1] - v_[i]) / (x_[i + 1] - x_[i]); }

  /// Index of the piece containing x; a breakpoint belongs to the piece on its right
  /// except for the last one.
  std::size_t piece_index(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
      std::ostringstream os;
      os << "x = " << x << " outside [" << x_.front() << ", " << x_.back() << "]";
      throw Error(ErrorCode::OutOfDomain, os.str());
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    auto i = static_cast<std::size_t>(it - x_.begin());
    return std::min(i == 0 ? 0 : i - 1, piece_count() - 1);
  }

  double operator()(double x) const {
    const std::size_t i = piece_index(x);
    if (x == x_[i]) return v_[i];
    if (x == x_[i + 1]) return v_[i + 1];
    return v_[i] + (v_[i + 1] - v_[i]) * ((x - x_[i]) / (x_[i + 1] - x_[i]));
  }

  double min_value() const { return *std::min_element(v_.begin(), v_.end()); }
  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }

  friend bool operator==(const PiecewiseAffine&, const PiecewiseAffine&) = default;

 private:
  std::vector<double> x_;
  std::vector<double> v_;
};

inline PiecewiseAffine make_piecewise_affine(std::vector<double> breakpoints, std::vector<double> values) {
  return {std::move(breakpoints), std::move(values)};
}

inline double evaluate(const PiecewiseAffine& u, double x) { return u(x); }

inline std::vector<Piece> slopes(const PiecewiseAffine& u) {
  std::vector<Piece> out;
  out.reserve(u.piece_count());
  const auto& x = u.breakpoints();
  for (std::size_t i = 0; i < u.piece_count(); ++i) out.push_back({Interval(x[i], x[i + 1]), u.slope(i)});
  return out;
}

/// x -> u(a + b - x).
inline PiecewiseAffine reflect(const PiecewiseAffine& u) {
  const auto& x = u.breakpoints();
  const auto& v = u.values();
  const double a = x.front();
  const double b = x.back();
  std::vector<double> rx(x.size());
  std::vector<double> rv(v.rbegin(), v.rend());
  for (std::size_t i = 0; i < x.size(); ++i) rx[i] = a + b - x[x.size() - 1 - i];
  rx.front() = a;
  rx.back() = b;
  return {std::move(rx), std::move(rv)};
}

/// Restriction of u to sub, which must lie inside u's domain.
inline PiecewiseAffine restrict_to(const PiecewiseAffine& u, const Interval& sub) {
  const auto dom = u.domain();
  if (sub.a < dom.a || sub.b > dom.b) throw Error(ErrorCode::OutOfDomain, "sub-interval leaves the domain");
  const double min_gap = PiecewiseAffine::kMinRelativeGap * sub.length();
  std::vector<double> rx{sub.a};
  std::vector<double> rv{u(sub.a)};
  for (double xi : u.breakpoints()) {
    if (xi - rx.back() > min_gap && sub.b - xi > min_gap) {
      rx.push_back(xi);
      rv.push_back(u(xi));
    }
  }
  rx.push_back(sub.b);
  rv.push_back(u(sub.b));
  return {std::move(rx), std::move(rv)};
}

// ---------------------------------------------------------------------------
// Convex costs
// ---------------------------------------------------------------------------

enum class CostKind { Power, Exp, LinearPlusPower, Sampled, Sum };

namespace detail {

/// Inverse of a continuous strictly increasing g on [0, inf) by bracketing and
/// bisection to full double resolution. Levels at or below g(0) map to 0.
inline double invert_increasing(const std::function<double(double)>& g, double s) {
  if (!(s > g(0.0))) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) < s) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < s ? lo : hi) = mid;
  }
  return (s - g(lo) <= g(hi) - s) ? lo : hi;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

/// Convex non-decreasing cost f : R+ -> R+ with its metadata.
///
/// `slope_at_zero` is the right derivative f'(0+); since f is convex it is the
/// infimum of f' and decides whether f^{-1} is Lipschitz.
class ConvexCost {
 public:
  using Fn = std::function<double(double)>;

  ConvexCost(CostKind kind, std::string label, Fn evaluator, bool superlinear, double slope_at_zero,
             std::optional<Fn> inverse = std::nullopt)
      : kind_(kind),
        label_(std::move(label)),
        f_(std::move(evaluator)),
        inverse_(std::move(inverse)),
        superlinear_(superlinear),
        slope_at_zero_(slope_at_zero) {}

  double operator()(double t) const { return f_(t); }

  CostKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  bool superlinear() const noexcept { return superlinear_; }
  double slope_at_zero() const noexcept { return slope_at_zero_; }
  bool has_inverse() const noexcept { return inverse_.has_value(); }
  const Fn& evaluator() const noexcept { return f_; }

  double inverse(double s) const {
    if (!inverse_) throw Error(ErrorCode::NonInvertibleCost, "cost '" + label_ + "' has no inverse");
    return (*inverse_)(s);
  }

 private:
  CostKind kind_;
  std::string label_;
  Fn f_;
  std::optional<Fn> inverse_;
  bool superlinear_;
  double slope_at_zero_;
};

/// f(t) = t^p, p >= 1.
inline ConvexCost power_cost(double p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw Error(ErrorCode::InvalidExponent, "power cost needs p >= 1, got " + detail::format_number(p));
  }
  std::string label = p == 1.0 ? "t" : "t^" + detail::format_number(p);
  auto f = [p](double t) { return p == 2.0 ? t * t : std::pow(t, p); };
  auto inv = [p](double s) { return s <= 0.0 ? 0.0 : (p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p)); };
  return {CostKind::Power, std::move(label), f, p > 1.0, p == 1.0 ? 1.0 : 0.0, inv};
}

/// f(t) = e^t.
inline ConvexCost exp_cost() {
  auto f = [](double t) { return std::exp(t); };
  auto inv = [](double s) { return s <= 1.0 ? 0.0 : std::log(s); };
  return {CostKind::Exp, "exp", f, true, 1.0, inv};
}

/// f(t) = a*t + c*t^p with a, c >= 0 and p >= 1.
inline ConvexCost linear_plus_power_cost(double a, double p, double c) {
  if (!std::isfinite(p) || p < 1.0) {
    throw Error(ErrorCode::InvalidExponent, "linear_plus_power needs p >= 1, got " + detail::format_number(p));
  }
  if (!std::isfinite(a) || !std::isfinite(c) || a < 0.0 || c < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "linear_plus_power coefficients must be finite and >= 0");
  }
  auto f = [a, p, c](double t) { return a * t + c * (p == 2.0 ? t * t : std::pow(t, p)); };
  std::string label = detail::format_number(a) + "*t+" + detail::format_number(c) + "*t^" + detail::format_number(p);
  const bool superlinear = c > 0.0 && p > 1.0;
  const double slope0 = a + (p == 1.0 ? c : 0.0);
  std::optional<ConvexCost::Fn> inv;
  if (a > 0.0 || c > 0.0) {
    if (p == 1.0) {
      inv = [k = a + c](double s) { return s <= 0.0 ? 0.0 : s / k; };
    } else if (p == 2.0 && c > 0.0) {
      // root of c t^2 + a t - s, written to avoid cancellation when a > 0
      inv = [a, c](double s) { return s <= 0.0 ? 0.0 : 2.0 * s / (a + std::sqrt(a * a + 4.0 * c * s)); };
    } else {
      inv = [f](double s) { return detail::invert_increasing(f, s); };
    }
  }
  return {CostKind::LinearPlusPower, std::move(label), f, superlinear, slope0, std::move(inv)};
}

/// Piecewise-linear cost interpolating (t_i, f_i), t_0 = 0, extended linearly
/// past the last sample. Rejected unless non-decreasing and convex on the samples.
inline ConvexCost sampled_cost(std::vector<double> ts, std::vector<double> fs) {
  if (ts.size() != fs.size()) throw Error(ErrorCode::LengthMismatch, "sampled cost: t and f differ in length");
  if (ts.size() < 2) throw Error(ErrorCode::LengthMismatch, "sampled cost needs at least two samples");
  if (ts.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "sampled cost must start at t = 0");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!std::isfinite(ts[i]) || !std::isfinite(fs[i]) || fs[i] < 0.0) {
      throw Error(ErrorCode::NonFiniteValue, "sampled cost values must be finite and >= 0");
    }
    if (i > 0 && !(ts[i] > ts[i - 1])) {
      throw Error(ErrorCode::NonIncreasingBreakpoints, "sampled cost abscissae must increase");
    }
  }
  std::vector<double> dd(ts.size() - 1);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    dd[i] = (fs[i + 1] - fs[i]) / (ts[i + 1] - ts[i]);
    scale = std::max(scale, std::abs(dd[i]));
  }
  const double tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 0; i < dd.size(); ++i) {
    if (dd[i] < -tol) throw Error(ErrorCode::NonConvexSample, "sampled cost decreases near t = " + detail::format_number(ts[i]));
    if (i > 0 && dd[i] < dd[i - 1] - tol) {
      throw Error(ErrorCode::NonConvexSample, "sampled cost is not convex near t = " + detail::format_number(ts[i]));
    }
  }
  const double slope0 = dd.front();
  auto f = [ts = std::move(ts), fs = std::move(fs), dd](double t) {
    if (t >= ts.back()) return fs.back() + dd.back() * (t - ts.back());
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ts.begin() - 1, 0));
    return fs[i] + dd[i] * (t - ts[i]);
  };
  return {CostKind::Sampled, "sampled", f, false, slope0};
}

/// t -> f(t) + epsilon * f_tilde(t), superlinear whenever f_tilde is.
inline ConvexCost superlinearize(const ConvexCost& f, double epsilon, const ConvexCost& f_tilde) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be positive, got " + detail::format_number(epsilon));
  }
  if (!f_tilde.superlinear()) {
    throw Error(ErrorCode::InvalidArgument, "f_tilde '" + f_tilde.label() + "' is not superlinear");
  }
  auto sum = [g = f.evaluator(), h = f_tilde.evaluator(), epsilon](double t) { return g(t) + epsilon * h(t); };
  // a superlinear convex f_tilde is strictly increasing wherever it exceeds its minimum,
  // so the sum is invertible as soon as one term is strictly increasing from 0
  std::optional<ConvexCost::Fn> inv;
  if (f.has_inverse() || f_tilde.has_inverse()) {
    inv = [sum](double s) { return detail::invert_increasing(sum, s); };
  }
  return {CostKind::Sum,
          f.label() + "+" + detail::format_number(epsilon) + "*(" + f_tilde.label() + ")",
          sum,
          true,
          f.slope_at_zero() + epsilon * f_tilde.slope_at_zero(),
          std::move(inv)};
}

/// Finite-difference sanity gate: f non-decreasing and with non-negative second
/// differences on a uniform grid of `samples` points over [0, hi].
inline bool is_convex_nondecreasing(const ConvexCost& f, double hi, int samples = 1000) {
  if (samples < 3 || !(hi > 0.0)) return false;
  const double h = hi / (samples - 1);
  std::vector<double> y(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) y[static_cast<std::size_t>(i)] = f(h * i);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] < y[i - 1] - tol) return false;
    if (i + 1 < y.size() && y[i + 1] - 2.0 * y[i] + y[i - 1] < -tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random generator for property tests
// ---------------------------------------------------------------------------

enum class SlopeSigns { Random, Increasing, Decreasing };

struct RandomShape {
  SlopeSigns signs = SlopeSigns::Random;
  /// Every piece gets the same |slope| (one draw per function).
  bool equal_modulus = false;
  /// Reject slope ranges touching 0.
  bool nonvanishing = true;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries
/// because the mt19937_64 sequence itself is fixed by the standard.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline PiecewiseAffine random_piecewise_affine(std::uint64_t seed, std::size_t pieces,
                                               std::pair<double, double> slope_range, const Interval& interval,
                                               const RandomShape& shape = {}) {
  auto [lo, hi] = slope_range;
  if (pieces < 1) throw Error(ErrorCode::InvalidArgument, "need at least one piece");
  if (!(lo <= hi) || lo < 0.0 || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "slope range must be 0 <= lo <= hi < inf (magnitudes)");
  }
  if (shape.nonvanishing && !(lo > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "nonvanishing slopes requested but slope range touches 0");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> widths(pieces);
  double total = 0.0;
  for (auto& w : widths) {
    w = 0.25 + detail::unit_uniform(rng);
    total += w;
  }
  std::vector<double> x(pieces + 1);
  std::vector<double> v(pieces + 1);
  x[0] = interval.a;
  v[0] = 0.0;
  const double common = lo + (hi - lo) * detail::unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    acc += widths[i];
    x[i + 1] = (i + 1 == pieces) ? interval.b : interval.a + interval.length() * (acc / total);
    double mag = shape.equal_modulus ? common : lo + (hi - lo) * detail::unit_uniform(rng);
    double sign = 1.0;
    switch (shape.signs) {
      case SlopeSigns::Random: sign = (rng() & 1u) ? 1.0 : -1.0; break;
      case SlopeSigns::Increasing: sign = 1.0; break;
      case SlopeSigns::Decreasing: sign = -1.0; break;
    }
    v[i + 1] = v[i] + sign * mag * (x[i + 1] - x[i]);
  }
  return {std::move(x), std::move(v)};
}

}  // namespace monorearr
