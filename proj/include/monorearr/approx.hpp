#pragma once

// Piecewise-affine approximants with nonvanishing slopes for a general sampled
// Sobolev function U on [a, b]:
//
//   h_k     = mean of f(|U'|) over each dyadic cell of length (b - a) / 2^k
//   U_k'    = sgn(U(right end) - U(left end)) * f^{-1}(h_k)   on that cell
//   U_k(a)  = U(a)
//
// U_k -> U in W^{1,1} and f(|U_k'|) -> f(|U'|) in L^1 as k grows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "monorearr/energy.hpp"
#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"

namespace monorearr {

inline constexpr int kMaxDepth = 14;

/// U sampled on the uniform grid a + i (b - a) / 2^K, i = 0..2^K, with U' at the
/// 2^K cell midpoints (supplied, or the difference quotient of adjacent samples).
class SampledFunction {
 public:
  SampledFunction(double a, double b, std::vector<double> values,
                  std::optional<std::vector<double>> derivative = std::nullopt)
      : domain_(a, b), values_(std::move(values)) {
    const std::size_t n = values_.size();
    if (n < 3 || ((n - 1) & (n - 2)) != 0) {
      throw Error(ErrorCode::LengthMismatch,
                  "sample count must be 2^K + 1 with K >= 1, got " + std::to_string(n));
    }
    while ((std::size_t{1} << depth_) < n - 1) ++depth_;
    if (depth_ > kMaxDepth) {
      throw Error(ErrorCode::DepthExceeded,
                  "sample depth " + std::to_string(depth_) + " exceeds " + std::to_string(kMaxDepth));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite sample value");
    }
    const double h = step();
    if (derivative) {
      if (derivative->size() != n - 1) {
        throw Error(ErrorCode::LengthMismatch, "derivative needs one value per cell (" + std::to_string(n - 1) + ")");
      }
      for (double d : *derivative) {
        if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValue, "non-finite derivative value");
      }
      derivative_ = std::move(*derivative);
    } else {
      derivative_.resize(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i) derivative_[i] = (values_[i + 1] - values_[i]) / h;
    }
  }

  const Interval& domain() const noexcept { return domain_; }
  double a() const noexcept { return domain_.a; }
  double b() const noexcept { return domain_.b; }
  int depth() const noexcept { return depth_; }
  std::size_t cell_count() const noexcept { return values_.size() - 1; }
  double step() const noexcept { return domain_.length() / static_cast<double>(values_.size() - 1); }
  double grid_point(std::size_t i) const noexcept {
    return i + 1 == values_.size() ? domain_.b
                                   : domain_.a + domain_.length() * (static_cast<double>(i) / static_cast<double>(cell_count()));
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& derivative() const noexcept { return derivative_; }

  /// Linear interpolant of the samples; the finest piecewise-affine picture of U.
  PiecewiseAffine interpolant() const {
    std::vector<double> x(values_.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid_point(i);
    return {std::move(x), values_};
  }

 private:
  Interval domain_;
  std::vector<double> values_;
  std::vector<double> derivative_;
  int depth_ = 0;
};

/// Cell means of `g` (one value per fine cell, 2^K of them) over the 2^k dyadic cells.
inline std::vector<double> dyadic_average(std::span<const double> g, int k) {
  const std::size_t n = g.size();
  if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorCode::LengthMismatch, "need 2^K fine cells");
  if (k < 1 || (std::size_t{1} << k) > n) {
    throw Error(ErrorCode::DepthExceeded, "dyadic depth " + std::to_string(k) + " not in [1, log2(" + std::to_string(n) + ")]");
  }
  const std::size_t cells = std::size_t{1} << k;
  const std::size_t per = n / cells;
  std::vector<double> h(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    detail::CompensatedSum s;
    for (std::size_t i = c * per; i < (c + 1) * per; ++i) {
      if (g[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "averaged values must be >= 0");
      s.add(g[i]);
    }
    h[c] = s.value() / static_cast<double>(per);
  }
  return h;
}

namespace detail {

inline void require_invertible(const ConvexCost& f) {
  if (!f.has_inverse() || !(f.slope_at_zero() > 0.0)) {
    throw Error(ErrorCode::NonInvertibleCost,
                "cost '" + f.label() + "' needs an inverse and f'(0+) > 0; pass f(t) + t instead");
  }
}

inline std::vector<double> cost_of_derivative(const SampledFunction& u, const ConvexCost& f) {
  std::vector<double> g(u.cell_count());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = f(std::abs(u.derivative()[i]));
  return g;
}

inline PiecewiseAffine approximant_from_means(const SampledFunction& u, const ConvexCost& f, int k,
                                              const std::vector<double>& h) {
  const std::size_t cells = h.size();
  const std::size_t per = u.cell_count() / cells;
  const double width = u.domain().length() / static_cast<double>(cells);
  // cells where U' vanishes identically and f(0) = 0 get this slope instead of 0
  double scale = 0.0;
  for (double d : u.derivative()) scale = std::max(scale, std::abs(d));
  const double floor_slope = std::ldexp(scale > 0.0 ? scale : 1.0, -2 * k);

  std::vector<double> x(cells + 1);
  std::vector<double> v(cells + 1);
  x[0] = u.a();
  v[0] = u.values()[0];
  const double f0 = f(0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double increment = u.values()[(c + 1) * per] - u.values()[c * per];
    const double sign = increment < 0.0 ? -1.0 : 1.0;
    double magnitude = h[c] > f0 ? f.inverse(h[c]) : 0.0;
    if (!(magnitude > 0.0)) magnitude = floor_slope;
    x[c + 1] = c + 1 == cells ? u.b() : u.a() + u.domain().length() * (static_cast<double>(c + 1) / static_cast<double>(cells));
    v[c + 1] = v[c] + sign * magnitude * width;
  }
  return {std::move(x), std::move(v)};
}

}  // namespace detail

/// U_k for dyadic depth k (1 <= k <= sample depth).
inline PiecewiseAffine build_approximant(const SampledFunction& u, const ConvexCost& f, int k) {
  detail::require_invertible(f);
  if (k < 1 || k > u.depth()) {
    throw Error(ErrorCode::DepthExceeded,
                "depth " + std::to_string(k) + " not in [1, " + std::to_string(u.depth()) + "]");
  }
  const auto g = detail::cost_of_derivative(u, f);
  return detail::approximant_from_means(u, f, k, dyadic_average(g, k));
}

struct ApproximantLevel {
  int k;
  double w11_error;   ///< ||U_k - U||_{W^{1,1}} on the sample grid
  double cost_error;  ///< ||f(|U_k'|) - f(|U'|)||_{L^1}
  double min_abs_slope;
};

struct ApproximantSequenceReport {
  std::vector<ApproximantLevel> levels;

  /// Last value below the first and no step more than doubling, for both error
  /// columns; values under `floor` count as zero.
  bool decreasing_trend(double floor = 1e-12) const {
    auto column_ok = [&](auto get) {
      if (levels.size() < 2) return true;
      const double first = get(levels.front());
      const double last = get(levels.back());
      if (!(last < first || last <= floor)) return false;
      for (std::size_t i = 1; i < levels.size(); ++i) {
        if (get(levels[i]) > std::max(2.0 * get(levels[i - 1]), floor)) return false;
      }
      return true;
    };
    return column_ok([](const ApproximantLevel& l) { return l.w11_error; }) &&
           column_ok([](const ApproximantLevel& l) { return l.cost_error; });
  }
};

/// Errors of U_k against U on the sample grid. Values use the trapezoid rule on
/// grid points; derivatives are cellwise constant, so their integrals are exact sums.
inline ApproximantLevel approximant_errors(const SampledFunction& u, const ConvexCost& f, int k,
                                           const PiecewiseAffine& uk) {
  const double h = u.step();
  const auto& vals = u.values();
  detail::CompensatedSum value_err;
  double prev = std::abs(uk(u.grid_point(0)) - vals[0]);
  for (std::size_t i = 1; i < vals.size(); ++i) {
    const double cur = std::abs(uk(u.grid_point(i)) - vals[i]);
    value_err.add(0.5 * h * (prev + cur));
    prev = cur;
  }
  const std::size_t per = u.cell_count() / uk.piece_count();
  detail::CompensatedSum deriv_err;
  detail::CompensatedSum cost_err;
  double min_slope = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < uk.piece_count(); ++c) {
    const double s = uk.slope(c);
    min_slope = std::min(min_slope, std::abs(s));
    const double fs = f(std::abs(s));
    for (std::size_t i = c * per; i < (c + 1) * per; ++i) {
      const double d = u.derivative()[i];
      deriv_err.add(h * std::abs(s - d));
      cost_err.add(h * std::abs(fs - f(std::abs(d))));
    }
  }
  return {k, value_err.value() + deriv_err.value(), cost_err.value(), min_slope};
}

inline ApproximantSequenceReport convergence_report(const SampledFunction& u, const ConvexCost& f,
                                                    std::span<const int> k_list) {
  ApproximantSequenceReport report;
  for (int k : k_list) report.levels.push_back(approximant_errors(u, f, k, build_approximant(u, f, k)));
  return report;
}

struct LiminfProbe {
  double x;
  LevelCount limit_count;  ///< n(x) for the sample interpolant
  LevelCount window_min;   ///< min of n_K over [x - r, x + r], r = (b - a) / 2^K
  bool passed;
};

/// Finite-k diagnostic for m >= n where T' > 0: compares n(x) of the sample
/// interpolant with the smallest n_K seen in a one-cell window around x, K being
/// the largest depth in k_list. Not a computation of the Gamma-liminf itself.
inline std::vector<LiminfProbe> multiplicity_liminf_check(const SampledFunction& u, const ConvexCost& f,
                                                          std::span<const int> k_list,
                                                          std::span<const double> probe_points) {
  if (k_list.empty()) throw Error(ErrorCode::InvalidArgument, "k_list is empty");
  const int kmax = *std::max_element(k_list.begin(), k_list.end());

  const auto fine = u.interpolant();
  const auto t = monotone_transport(pushforward(fine), u.domain());
  const auto n = multiplicity(fine, t);

  const auto uk = build_approximant(u, f, kmax);
  const auto tk = monotone_transport(pushforward(uk), u.domain());
  const auto nk = multiplicity(uk, tk);

  const double r = std::ldexp(u.domain().length(), -kmax);
  std::vector<LiminfProbe> out;
  for (double x : probe_points) {
    if (!(x > u.a() && x < u.b())) throw Error(ErrorCode::OutOfDomain, "probe outside the open interval");
    const std::size_t band = n.band_index(x);
    const auto count = n.counts()[band];
    // neighbouring bands with the same count form one run; only its ends are critical
    std::size_t lo_band = band;
    std::size_t hi_band = band;
    while (lo_band > 0 && n.counts()[lo_band - 1] == count) --lo_band;
    while (hi_band + 1 < n.band_count() && n.counts()[hi_band + 1] == count) ++hi_band;
    const double run_a = n.cut_points()[lo_band];
    const double run_b = n.cut_points()[hi_band + 1];
    if (count.is_infinite() || x - run_a < r || run_b - x < r || !(t.slope(t.piece_index(x)) > 0.0)) {
      std::ostringstream os;
      os << "probe " << x << " is within " << r << " of a level cut or on a flat part of T";
      throw Error(ErrorCode::ProbeAtCriticalLevel, os.str());
    }
    const double lo = std::max(u.a(), x - r);
    const double hi = std::min(u.b(), x + r);
    LevelCount wmin = LevelCount::infinite();
    for (std::size_t i = 0; i < nk.band_count(); ++i) {
      if (nk.cut_points()[i] < hi && nk.cut_points()[i + 1] > lo) wmin = std::min(wmin, nk.counts()[i]);
    }
    out.push_back({x, count, wmin, wmin >= count});
  }
  return out;
}

}  // namespace monorearr
