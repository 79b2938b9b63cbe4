#pragma once

// Energies int f(|U'|) and int f(n T'), the inequality verifier, and the
// level-set (coarea) oracle for the first one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"

namespace monorearr {

/// One interval of the merged (T breakpoints + profile cuts) decomposition.
struct EnergyBand {
  Interval span;
  LevelCount count;
  double t_slope;
  double contribution;
};

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  std::vector<EnergyBand> bands;
  double tolerance = 0.0;
};

class InequalityViolated : public Error {
 public:
  explicit InequalityViolated(InequalityReport report)
      : Error(ErrorCode::InequalityViolated, describe(report)), report_(std::move(report)) {}

  const InequalityReport& report() const noexcept { return report_; }

 private:
  static std::string describe(const InequalityReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "lhs " << r.lhs << " < rhs " << r.rhs << " (gap " << r.gap << ", tolerance " << r.tolerance << ")";
    return os.str();
  }

  InequalityReport report_;
};

inline double default_tolerance(double lhs) { return 1e-9 * std::max(1.0, lhs); }

/// Exact int_I f(|U'|): the integrand is constant on every piece.
inline double dirichlet_energy(const PiecewiseAffine& u, const ConvexCost& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.piece_count(); ++i) sum += u.width(i) * f(std::abs(u.slope(i)));
  return sum;
}

/// Per-band terms of int_I f(n T'). Where n is infinite T is flat and the
/// product n T' is taken to be 0, so the band contributes length * f(0).
inline std::vector<EnergyBand> rearranged_energy_bands(const PiecewiseAffine& t, const MultiplicityProfile& n,
                                                       const ConvexCost& f) {
  const double len = t.length();
  const double snap = 1e-12 * len;
  const auto td = t.domain();
  const auto nd = n.domain();
  if (std::abs(td.a - nd.a) > snap || std::abs(td.b - nd.b) > snap) {
    throw Error(ErrorCode::IncompatibleProfile, "profile and transport live on different intervals");
  }
  const auto& tx = t.breakpoints();
  std::vector<double> pts(tx);
  for (std::size_t i = 1; i + 1 < n.cut_points().size(); ++i) {
    const double c = n.cut_points()[i];
    auto it = std::lower_bound(tx.begin(), tx.end(), c);
    const bool near_right = it != tx.end() && *it - c <= snap;
    const bool near_left = it != tx.begin() && c - *(it - 1) <= snap;
    if (!near_right && !near_left) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());

  std::vector<EnergyBand> bands;
  bands.reserve(pts.size() - 1);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double lo = pts[k];
    const double hi = pts[k + 1];
    const double mid = 0.5 * (lo + hi);
    const double slope = t.slope(t.piece_index(mid));
    const LevelCount count = n.at(std::clamp(mid, nd.a, nd.b));
    double arg = 0.0;
    if (count.is_infinite()) {
      if (slope != 0.0) {
        std::ostringstream os;
        os << "infinite multiplicity on (" << lo << ", " << hi << ") where T' = " << slope << " > 0";
        throw Error(ErrorCode::IncompatibleProfile, os.str());
      }
    } else {
      arg = static_cast<double>(count.value()) * slope;
    }
    bands.push_back({Interval(lo, hi), count, slope, (hi - lo) * f(arg)});
  }
  return bands;
}

inline double rearranged_energy(const PiecewiseAffine& t, const MultiplicityProfile& n, const ConvexCost& f) {
  double sum = 0.0;
  for (const auto& b : rearranged_energy_bands(t, n, f)) sum += b.contribution;
  return sum;
}

/// Builds T and n for u and checks int f(|U'|) >= int f(n T') - tolerance.
/// A violation throws InequalityViolated with the full report attached.
inline InequalityReport verify_inequality(const PiecewiseAffine& u, const ConvexCost& f,
                                          std::optional<double> tolerance = std::nullopt) {
  if (tolerance && !(*tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto t = monotone_transport(pushforward(u), u.domain());
  const auto n = multiplicity(u, t);

  InequalityReport r;
  r.lhs = dirichlet_energy(u, f);
  r.bands = rearranged_energy_bands(t, n, f);
  for (const auto& b : r.bands) r.rhs += b.contribution;
  r.gap = r.lhs - r.rhs;
  r.tolerance = tolerance.value_or(default_tolerance(r.lhs));
  if (r.gap < -r.tolerance) throw InequalityViolated(std::move(r));
  return r;
}

/// Midpoint rule over `level_grid_size` uniform levels of
///   int dy sum_{x in U^{-1}(y)} f(|U'(x)|) / |U'(x)|,
/// which equals int f(|U'|) dx by the coarea formula.
inline double coarea_energy(const PiecewiseAffine& u, const ConvexCost& f, std::size_t level_grid_size) {
  if (level_grid_size < 2) throw Error(ErrorCode::InvalidArgument, "level grid needs at least 2 levels");
  for (std::size_t i = 0; i < u.piece_count(); ++i) {
    if (u.values()[i] == u.values()[i + 1]) {
      throw Error(ErrorCode::FlatPiecePresent, "piece " + std::to_string(i) + " is flat");
    }
  }
  const auto dec = level_decomposition(u);
  if (std::any_of(dec.atom_mass.begin(), dec.atom_mass.end(), [](double m) { return m > 0.0; })) {
    throw Error(ErrorCode::FlatPiecePresent, "U has a piece that is flat up to rounding");
  }

  const std::size_t g = level_grid_size;
  const double ymin = u.min_value();
  const double dy = (u.max_value() - ymin) / static_cast<double>(g);
  auto level = [&](std::size_t m) { return ymin + (static_cast<double>(m) + 0.5) * dy; };
  // first grid index whose midpoint level is strictly above (or at least) y
  auto first_above = [&](double y, bool strict) {
    double guess = std::floor((y - ymin) / dy - 0.5);
    std::size_t m = guess <= 0.0 ? 0 : std::min(g, static_cast<std::size_t>(guess));
    auto passes = [&](std::size_t k) { return strict ? level(k) > y : level(k) >= y; };
    while (m > 0 && passes(m - 1)) --m;
    while (m < g && !passes(m)) ++m;
    return m;
  };

  std::vector<double> delta(g + 1, 0.0);
  const auto& v = u.values();
  for (std::size_t i = 0; i < u.piece_count(); ++i) {
    const double s = std::abs(u.slope(i));
    const double w = f(s) / s;
    const std::size_t m0 = first_above(std::min(v[i], v[i + 1]), true);
    const std::size_t m1 = first_above(std::max(v[i], v[i + 1]), false);
    if (m0 < m1) {
      delta[m0] += w;
      delta[m1] -= w;
    }
  }
  detail::CompensatedSum running;
  detail::CompensatedSum total;
  for (std::size_t m = 0; m < g; ++m) {
    running.add(delta[m]);
    total.add(running.value());
  }
  return total.value() * dy;
}

struct InjectivityGain {
  double gain_bound;
  double gap;
};

/// Quadratic-energy saving from replacing U on `sub` by its local monotone
/// rearrangement T: gap = int_sub |U'|^2 - int_sub T'^2, and since n >= 2 on sub
/// the chain int|U'|^2 >= int n^2 T'^2 >= 4 int T'^2 gives gap >= 3 int_sub T'^2.
inline InjectivityGain injectivity_gain(const PiecewiseAffine& u, const Interval& sub) {
  const auto local = restrict_to(u, sub);
  const auto t = monotone_transport(pushforward(local), sub);
  const auto n = multiplicity(local, t);
  for (std::size_t i = 0; i < n.band_count(); ++i) {
    const auto c = n.counts()[i];
    if (!c.is_infinite() && c.value() < 2) {
      std::ostringstream os;
      os << "level band (" << n.cut_points()[i] << ", " << n.cut_points()[i + 1] << ") has a single preimage";
      throw Error(ErrorCode::NotNonInjective, os.str());
    }
  }
  const auto quad = power_cost(2.0);
  const double t_energy = dirichlet_energy(t, quad);
  return {3.0 * t_energy, dirichlet_energy(local, quad) - t_energy};
}

}  // namespace monorearr
