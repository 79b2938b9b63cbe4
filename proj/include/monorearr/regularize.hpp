#pragma once

// Lipschitz regularization by inf-convolution,
//   g_j(x) = min(j, inf_y { j |x - y| + g(y) }),
// on uniform grids, plus the ordering diagnostics built on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"

namespace monorearr {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Samples of an extended-real function on the uniform grid a + i (b - a) / (N - 1).
/// +infinity is the sentinel for "no finite value here".
class GridFunction {
 public:
  GridFunction(double a, double b, std::vector<double> values) : domain_(a, b), values_(std::move(values)) {
    if (values_.size() < 2) throw Error(ErrorCode::LengthMismatch, "grid function needs at least two samples");
    bool any_finite = false;
    for (double v : values_) {
      if (std::isnan(v) || v == -kInfinity) throw Error(ErrorCode::NonFiniteValue, "grid values must be finite or +inf");
      any_finite = any_finite || std::isfinite(v);
    }
    if (!any_finite) throw Error(ErrorCode::InvalidArgument, "grid function has no finite value");
  }

  const Interval& domain() const noexcept { return domain_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double step() const noexcept { return domain_.length() / static_cast<double>(values_.size() - 1); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool aligned_with(const GridFunction& other) const noexcept {
    return size() == other.size() && domain_ == other.domain_;
  }

 private:
  Interval domain_;
  std::vector<double> values_;
};

/// Cost of reaching grid point i from source k: g[k] + j * dx * |i - k|.
/// Shared by every route through this header so results agree bit for bit.
inline double transport_cost(double source_value, double j, double dx, std::size_t i, std::size_t k) {
  const auto d = i > k ? i - k : k - i;
  return source_value + j * (dx * static_cast<double>(d));
}

/// Two-pass distance transform: a forward and a backward sweep propagate the
/// best source index, then the result is capped at j. Linear in the grid size.
inline GridFunction inf_convolution(const GridFunction& g, double j) {
  if (!(j > 0.0) || !std::isfinite(j)) {
    std::ostringstream os;
    os << "j must be positive and finite, got " << j;
    throw Error(ErrorCode::NonPositiveJ, os.str());
  }
  const std::size_t n = g.size();
  const double dx = g.step();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> val(g.values());
  std::vector<std::size_t> src(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(val[i])) src[i] = i;
  }
  auto relax = [&](std::size_t i, std::size_t from) {
    const std::size_t k = src[from];
    if (k == kNone) return;
    const double cand = transport_cost(g[k], j, dx, i, k);
    if (cand < val[i]) {
      val[i] = cand;
      src[i] = k;
    }
  };
  for (std::size_t i = 1; i < n; ++i) relax(i, i - 1);
  for (std::size_t i = n - 1; i-- > 0;) relax(i, i + 1);
  for (auto& v : val) v = std::min(v, j);
  return {g.domain().a, g.domain().b, std::move(val)};
}

/// Checks the j-envelopes on a grid: outputs are non-decreasing along the
/// ascending j_list, and for the largest j the output equals g wherever g is
/// finite, at most j, and not undercut by any point within reach
/// (g[i] <= g[k] + j |x_i - x_k| for |x_i - x_k| <= (g[i] - min g) / j).
inline bool monotone_envelope_check(const GridFunction& g, std::span<const double> j_list) {
  if (j_list.empty()) throw Error(ErrorCode::InvalidArgument, "j_list is empty");
  for (std::size_t l = 1; l < j_list.size(); ++l) {
    if (!(j_list[l] > j_list[l - 1])) throw Error(ErrorCode::InvalidArgument, "j_list must be ascending");
  }
  constexpr double tol = 1e-12;
  std::vector<GridFunction> env;
  env.reserve(j_list.size());
  for (double j : j_list) env.push_back(inf_convolution(g, j));
  for (std::size_t l = 1; l < env.size(); ++l) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (env[l][i] < env[l - 1][i] - tol) return false;
    }
  }

  const double jmax = j_list.back();
  const auto& top = env.back();
  const double dx = g.step();
  double gmin = kInfinity;
  for (double v : g.values()) gmin = std::min(gmin, v);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || g[i] > jmax) continue;
    const auto reach = static_cast<std::size_t>(std::ceil((g[i] - gmin) / (jmax * dx)));
    bool undercut = false;
    const std::size_t lo = i > reach ? i - reach : 0;
    const std::size_t hi = std::min(g.size() - 1, i + reach);
    for (std::size_t k = lo; k <= hi && !undercut; ++k) {
      undercut = std::isfinite(g[k]) && g[i] > transport_cost(g[k], jmax, dx, i, k) + tol;
    }
    if (!undercut && std::abs(top[i] - g[i]) > tol) return false;
  }
  return true;
}

enum class OrderingVerdict { Holds, Violated, Inconclusive };

inline std::string_view to_string(OrderingVerdict v) {
  switch (v) {
    case OrderingVerdict::Holds: return "holds";
    case OrderingVerdict::Violated: return "violated";
    case OrderingVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct OrderingResult {
  OrderingVerdict verdict;
  /// sup |n_K^j - n_{K-1}^j| over the grid (infinite when fewer than two profiles).
  double stabilization_gap;
  /// min over the grid of h_j - m_j (NaN when not evaluated).
  double margin;
  std::string detail;
};

/// (a) n_k^j <= n_k for every profile, (b) h_j >= m_j - 1e-9 where h_j is the
/// last n_k^j once successive terms agree to 1e-9 in sup norm. Without that
/// agreement the limit is not guessed and the verdict is Inconclusive.
inline OrderingResult ordering_check(std::span<const GridFunction> n_k_profiles, const GridFunction& m_estimate,
                                     double j) {
  if (n_k_profiles.empty()) throw Error(ErrorCode::InvalidArgument, "no profiles given");
  for (const auto& p : n_k_profiles) {
    if (!p.aligned_with(m_estimate)) throw Error(ErrorCode::GridMismatch, "profiles and m estimate use different grids");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<GridFunction> reg;
  reg.reserve(n_k_profiles.size());
  for (std::size_t k = 0; k < n_k_profiles.size(); ++k) {
    reg.push_back(inf_convolution(n_k_profiles[k], j));
    for (std::size_t i = 0; i < m_estimate.size(); ++i) {
      if (reg.back()[i] > n_k_profiles[k][i] + 1e-12) {
        std::ostringstream os;
        os << "n_k^j > n_k at profile " << k << ", grid index " << i;
        return {OrderingVerdict::Violated, kInfinity, nan, os.str()};
      }
    }
  }
  if (reg.size() < 2) return {OrderingVerdict::Inconclusive, kInfinity, nan, "a single profile says nothing about the limit"};
  double gap = 0.0;
  const auto& last = reg.back();
  const auto& before = reg[reg.size() - 2];
  for (std::size_t i = 0; i < last.size(); ++i) gap = std::max(gap, std::abs(last[i] - before[i]));
  if (!(gap < 1e-9)) {
    std::ostringstream os;
    os << "n_k^j has not stabilised (last step " << gap << ")";
    return {OrderingVerdict::Inconclusive, gap, nan, os.str()};
  }
  const auto mj = inf_convolution(m_estimate, j);
  double margin = kInfinity;
  for (std::size_t i = 0; i < last.size(); ++i) margin = std::min(margin, last[i] - mj[i]);
  if (margin < -1e-9) {
    std::ostringstream os;
    os << "h_j falls below m_j by " << -margin;
    return {OrderingVerdict::Violated, gap, margin, os.str()};
  }
  return {OrderingVerdict::Holds, gap, margin, "h_j >= m_j"};
}

/// n sampled at `points` uniform grid points; at a cut point the smaller
/// neighbouring count is used (lower semicontinuous reading), infinity stays +inf.
inline GridFunction sample_profile(const MultiplicityProfile& n, std::size_t points) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "need at least two sample points");
  const auto dom = n.domain();
  std::vector<double> vals(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? dom.b : dom.a + dom.length() * (static_cast<double>(i) / static_cast<double>(points - 1));
    vals[i] = n.lower_at(x).as_double();
  }
  return {dom.a, dom.b, std::move(vals)};
}

}  // namespace monorearr
