#pragma once

// Image measure of a piecewise-affine U, the non-decreasing map T with the same
// image measure, and the multiplicity profile n(x) = #U^{-1}(T(x)).

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"

namespace monorearr {

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Number of preimages of a level; `infinite()` marks the flat intervals of T.
class LevelCount {
 public:
  constexpr LevelCount() = default;
  constexpr explicit LevelCount(std::uint64_t n) : n_(n) {}
  static constexpr LevelCount infinite() { return LevelCount(kInf); }

  constexpr bool is_infinite() const noexcept { return n_ == kInf; }
  constexpr std::uint64_t value() const noexcept { return n_; }
  double as_double() const noexcept {
    return is_infinite() ? std::numeric_limits<double>::infinity() : static_cast<double>(n_);
  }

  friend constexpr auto operator<=>(LevelCount, LevelCount) = default;

 private:
  static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t n_ = 0;
};

inline std::string to_string(LevelCount c) { return c.is_infinite() ? "inf" : std::to_string(c.value()); }

/// Critical values of U and what happens between them.
///
/// levels[k] are the sorted distinct breakpoint values (merged within 1e-12 of the
/// value range). Band k is the open level interval (levels[k], levels[k+1]); on it
/// U has `count[k]` preimages and its image measure has density `density[k]`.
/// `atom_mass[k]` is the total length of flat pieces sitting at levels[k].
struct LevelDecomposition {
  std::vector<double> levels;
  std::vector<double> density;
  std::vector<std::uint64_t> count;
  std::vector<double> atom_mass;
  double merge_tolerance = 0.0;

  std::size_t band_count() const noexcept { return density.size(); }
  bool is_critical(double y) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), y - merge_tolerance);
    return it != levels.end() && std::abs(*it - y) <= merge_tolerance;
  }
};

inline LevelDecomposition level_decomposition(const PiecewiseAffine& u) {
  const auto& v = u.values();
  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end());
  LevelDecomposition dec;
  dec.merge_tolerance = 1e-12 * (sorted.back() - sorted.front());
  for (double y : sorted) {
    if (dec.levels.empty() || y - dec.levels.back() > dec.merge_tolerance) dec.levels.push_back(y);
  }
  auto level_of = [&](double y) {
    auto it = std::upper_bound(dec.levels.begin(), dec.levels.end(), y);
    return static_cast<std::size_t>(it - dec.levels.begin()) - 1;
  };

  const std::size_t nlev = dec.levels.size();
  dec.atom_mass.assign(nlev, 0.0);
  std::vector<double> dens_delta(nlev, 0.0);
  std::vector<std::int64_t> count_delta(nlev, 0);
  for (std::size_t i = 0; i < u.piece_count(); ++i) {
    std::size_t l0 = level_of(v[i]);
    std::size_t l1 = level_of(v[i + 1]);
    if (l0 == l1) {
      dec.atom_mass[l0] += u.width(i);
      continue;
    }
    if (l0 > l1) std::swap(l0, l1);
    const double w = 1.0 / std::abs(u.slope(i));
    dens_delta[l0] += w;
    dens_delta[l1] -= w;
    count_delta[l0] += 1;
    count_delta[l1] -= 1;
  }
  if (nlev > 1) {
    dec.density.resize(nlev - 1);
    dec.count.resize(nlev - 1);
    detail::CompensatedSum d;
    std::int64_t c = 0;
    for (std::size_t k = 0; k + 1 < nlev; ++k) {
      d.add(dens_delta[k]);
      c += count_delta[k];
      dec.density[k] = d.value();
      dec.count[k] = static_cast<std::uint64_t>(c);
    }
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Measures on the line
// ---------------------------------------------------------------------------

struct DensityPiece {
  double lo;
  double hi;
  double density;
};

struct Atom {
  double y;
  double mass;
};

/// Finite measure made of piecewise-constant density pieces plus atoms.
class Measure1D {
 public:
  Measure1D(std::vector<DensityPiece> pieces, std::vector<Atom> atoms)
      : pieces_(std::move(pieces)), atoms_(std::move(atoms)) {
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto& p = pieces_[k];
      if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !std::isfinite(p.density)) {
        throw Error(ErrorCode::NonFiniteValue, "density piece " + std::to_string(k) + " is not finite");
      }
      if (!(p.lo < p.hi) || p.density < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "density piece " + std::to_string(k) + " needs lo < hi and d >= 0");
      }
      if (k > 0 && p.lo < pieces_[k - 1].hi) {
        throw Error(ErrorCode::NonIncreasingBreakpoints, "density pieces overlap or are unsorted");
      }
    }
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (!std::isfinite(atoms_[k].y) || !std::isfinite(atoms_[k].mass) || !(atoms_[k].mass > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "atom " + std::to_string(k) + " needs finite y and mass > 0");
      }
      if (k > 0 && !(atoms_[k].y > atoms_[k - 1].y)) {
        throw Error(ErrorCode::NonIncreasingBreakpoints, "atom locations must be strictly increasing");
      }
    }
    piece_cum_.reserve(pieces_.size() + 1);
    atom_cum_.reserve(atoms_.size() + 1);
    detail::CompensatedSum s;
    piece_cum_.push_back(0.0);
    for (const auto& p : pieces_) {
      s.add(p.density * (p.hi - p.lo));
      piece_cum_.push_back(s.value());
    }
    detail::CompensatedSum t;
    atom_cum_.push_back(0.0);
    for (const auto& a : atoms_) {
      t.add(a.mass);
      atom_cum_.push_back(t.value());
    }
    total_ = piece_cum_.back() + atom_cum_.back();
  }

  const std::vector<DensityPiece>& density_pieces() const noexcept { return pieces_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double total_mass() const noexcept { return total_; }

  /// F(y) = mass of (-inf, y].
  double cdf(double y) const { return continuous_mass_below(y) + atom_mass_until(y, true); }
  /// F(y-) = mass of (-inf, y).
  double cdf_left(double y) const { return continuous_mass_below(y) + atom_mass_until(y, false); }

  /// Lowest and highest points carrying mass.
  std::pair<double, double> support() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : pieces_) {
      if (p.density > 0.0) {
        lo = std::min(lo, p.lo);
        hi = std::max(hi, p.hi);
      }
    }
    for (const auto& a : atoms_) {
      lo = std::min(lo, a.y);
      hi = std::max(hi, a.y);
    }
    return {lo, hi};
  }

 private:
  double continuous_mass_below(double y) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), y,
                               [](double val, const DensityPiece& p) { return val < p.lo; });
    const auto k = static_cast<std::size_t>(it - pieces_.begin());
    if (k == 0) return 0.0;
    const auto& p = pieces_[k - 1];
    if (y >= p.hi) return piece_cum_[k];
    return piece_cum_[k - 1] + p.density * (y - p.lo);
  }
  double atom_mass_until(double y, bool inclusive) const {
    auto it = inclusive ? std::upper_bound(atoms_.begin(), atoms_.end(), y,
                                           [](double val, const Atom& a) { return val < a.y; })
                        : std::lower_bound(atoms_.begin(), atoms_.end(), y,
                                           [](const Atom& a, double val) { return a.y < val; });
    return atom_cum_[static_cast<std::size_t>(it - atoms_.begin())];
  }

  std::vector<DensityPiece> pieces_;
  std::vector<Atom> atoms_;
  std::vector<double> piece_cum_;
  std::vector<double> atom_cum_;
  double total_ = 0.0;
};

/// nu = U_# lambda: density sum of 1/|s| over the branches covering each level band,
/// and an atom of mass L for each flat piece of length L.
inline Measure1D pushforward(const PiecewiseAffine& u) {
  const auto dec = level_decomposition(u);
  std::vector<DensityPiece> pieces;
  pieces.reserve(dec.band_count());
  for (std::size_t k = 0; k < dec.band_count(); ++k) {
    pieces.push_back({dec.levels[k], dec.levels[k + 1], dec.density[k]});
  }
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < dec.levels.size(); ++k) {
    if (dec.atom_mass[k] > 0.0) atoms.push_back({dec.levels[k], dec.atom_mass[k]});
  }
  return {std::move(pieces), std::move(atoms)};
}

/// Quantile map of nu over `domain`: T(x) = inf{y : F(y) >= x - a}.
/// Atoms become flat pieces of T, density d becomes slope 1/d.
inline PiecewiseAffine monotone_transport(const Measure1D& nu, const Interval& domain) {
  const double len = domain.length();
  const double total = nu.total_mass();
  if (!(std::abs(total - len) <= 1e-9 * len)) {
    std::ostringstream os;
    os << "measure has mass " << total << " but the domain has length " << len;
    throw Error(ErrorCode::MassMismatch, os.str());
  }

  std::vector<DensityPiece> pieces;
  for (const auto& p : nu.density_pieces()) {
    if (p.density > 0.0) pieces.push_back(p);
  }
  const auto& atoms = nu.atoms();
  const auto [ylo, yhi] = nu.support();
  const double ytol = 1e-12 * std::max(1.0, std::abs(yhi - ylo));
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    if (pieces[k].lo - pieces[k - 1].hi > ytol) {
      std::ostringstream os;
      os << "support has a gap between " << pieces[k - 1].hi << " and " << pieces[k].lo;
      throw Error(ErrorCode::DisconnectedSupport, os.str());
    }
  }
  if (pieces.empty() && atoms.size() > 1) {
    throw Error(ErrorCode::DisconnectedSupport, "several atoms and no density in between");
  }
  if (!pieces.empty()) {
    for (const auto& a : atoms) {
      if (a.y < pieces.front().lo - ytol || a.y > pieces.back().hi + ytol) {
        std::ostringstream os;
        os << "atom at " << a.y << " is detached from the density support";
        throw Error(ErrorCode::DisconnectedSupport, os.str());
      }
    }
  }

  // (cumulative mass, level) knots of the quantile function
  struct Knot {
    double mass;
    double y;
  };
  std::vector<Knot> knots;
  detail::CompensatedSum cum;
  knots.push_back({0.0, ylo});
  auto push = [&](double y) { knots.push_back({cum.value(), y}); };
  std::size_t ai = 0;
  auto flush_atoms_up_to = [&](double y) {
    while (ai < atoms.size() && atoms[ai].y <= y + ytol) {
      push(atoms[ai].y);
      cum.add(atoms[ai].mass);
      push(atoms[ai].y);
      ++ai;
    }
  };
  for (const auto& p : pieces) {
    flush_atoms_up_to(p.lo);
    push(p.lo);
    cum.add(p.density * (p.hi - p.lo));
    push(p.hi);
  }
  flush_atoms_up_to(std::numeric_limits<double>::infinity());

  const double scale = len / cum.value();
  const double min_gap = 4.0 * PiecewiseAffine::kMinRelativeGap * len;
  std::vector<double> xs{domain.a};
  std::vector<double> ys{knots.front().y};
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double x = domain.a + knots[k].mass * scale;
    if (x - xs.back() > min_gap) {
      xs.push_back(x);
      ys.push_back(knots[k].y);
    } else if (xs.size() > 1) {
      ys.back() = knots[k].y;
    }
  }
  if (xs.size() == 1) {
    xs.push_back(domain.b);
    ys.push_back(knots.back().y);
  }
  xs.back() = domain.b;
  return {std::move(xs), std::move(ys)};
}

// ---------------------------------------------------------------------------
// Multiplicity
// ---------------------------------------------------------------------------

/// Piecewise-constant n(x) on the transport domain. Band i is the open interval
/// (cut_points[i], cut_points[i+1]) with count counts[i].
class MultiplicityProfile {
 public:
  MultiplicityProfile(std::vector<double> cut_points, std::vector<LevelCount> counts)
      : cuts_(std::move(cut_points)), counts_(std::move(counts)) {
    if (cuts_.size() != counts_.size() + 1 || counts_.empty()) {
      throw Error(ErrorCode::LengthMismatch, "profile needs one more cut point than counts");
    }
    for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
      if (!(cuts_[i + 1] > cuts_[i])) throw Error(ErrorCode::NonIncreasingBreakpoints, "profile cut points must increase");
    }
  }

  const std::vector<double>& cut_points() const noexcept { return cuts_; }
  const std::vector<LevelCount>& counts() const noexcept { return counts_; }
  std::size_t band_count() const noexcept { return counts_.size(); }
  Interval band(std::size_t i) const { return {cuts_[i], cuts_[i + 1]}; }
  Interval domain() const { return {cuts_.front(), cuts_.back()}; }

  /// Count of the band containing x (right band at a cut point, last band at the end).
  LevelCount at(double x) const { return counts_[band_index(x)]; }

  /// Lower semicontinuous reading: at a cut point, the smaller neighbouring count.
  LevelCount lower_at(double x) const {
    const std::size_t i = band_index(x);
    if (x == cuts_[i] && i > 0) return std::min(counts_[i], counts_[i - 1]);
    if (x == cuts_[i + 1] && i + 1 < counts_.size()) return std::min(counts_[i], counts_[i + 1]);
    return counts_[i];
  }

  std::size_t band_index(double x) const {
    if (!(x >= cuts_.front() && x <= cuts_.back())) {
      throw Error(ErrorCode::OutOfDomain, "x outside the profile domain");
    }
    auto it = std::upper_bound(cuts_.begin(), cuts_.end(), x);
    const auto i = static_cast<std::size_t>(it - cuts_.begin());
    return std::min(i == 0 ? 0 : i - 1, counts_.size() - 1);
  }

 private:
  std::vector<double> cuts_;
  std::vector<LevelCount> counts_;
};

namespace detail {

/// Smallest x with T(x) >= y, treating values within tol of y as equal to y.
inline double first_reach(const PiecewiseAffine& t, double y, double tol) {
  const auto& x = t.breakpoints();
  const auto& v = t.values();
  auto it = std::lower_bound(v.begin(), v.end(), y - tol);
  if (it == v.end()) return x.back();
  const auto i = static_cast<std::size_t>(it - v.begin());
  if (i == 0 || std::abs(v[i] - y) <= tol) return x[i];
  return x[i - 1] + (y - v[i - 1]) / (v[i] - v[i - 1]) * (x[i] - x[i - 1]);
}

/// Largest x with T(x) <= y, same tolerance convention.
inline double last_stay(const PiecewiseAffine& t, double y, double tol) {
  const auto& x = t.breakpoints();
  const auto& v = t.values();
  auto it = std::upper_bound(v.begin(), v.end(), y + tol);
  if (it == v.begin()) return x.front();
  const auto i = static_cast<std::size_t>(it - v.begin());
  if (i == v.size() || std::abs(v[i - 1] - y) <= tol) return x[i - 1];
  return x[i - 1] + (y - v[i - 1]) / (v[i] - v[i - 1]) * (x[i] - x[i - 1]);
}

inline void check_transport_matches(const PiecewiseAffine& u, const PiecewiseAffine& t) {
  const double len = u.length();
  const auto ud = u.domain();
  const auto td = t.domain();
  if (std::abs(ud.a - td.a) > 1e-12 * len || std::abs(ud.b - td.b) > 1e-12 * len) {
    throw Error(ErrorCode::TransportMismatch, "U and T live on different intervals");
  }
  for (std::size_t i = 0; i < t.piece_count(); ++i) {
    if (t.values()[i + 1] < t.values()[i]) throw Error(ErrorCode::TransportMismatch, "T is not non-decreasing");
  }
  const auto nu_u = pushforward(u);
  const auto nu_t = pushforward(t);
  std::vector<double> probes(u.values());
  probes.insert(probes.end(), t.values().begin(), t.values().end());
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  // compare away from atoms: midpoints between consecutive critical values, plus the far ends
  std::vector<double> at;
  at.push_back(probes.front() - 1.0);
  for (std::size_t k = 0; k + 1 < probes.size(); ++k) at.push_back(0.5 * (probes[k] + probes[k + 1]));
  at.push_back(probes.back() + 1.0);
  for (double y : at) {
    const double d = std::abs(nu_u.cdf(y) - nu_t.cdf(y));
    if (d > 1e-7 * len) {
      std::ostringstream os;
      os << "image-measure CDFs of U and T differ by " << d << " at y = " << y;
      throw Error(ErrorCode::TransportMismatch, os.str());
    }
  }
}

}  // namespace detail

/// n(x) = #U^{-1}(T(x)) on the open bands between the points z_k = T^{-1}(y_k).
/// Where T is flat (an atom of nu) the band gets LevelCount::infinite().
inline MultiplicityProfile multiplicity(const PiecewiseAffine& u, const PiecewiseAffine& t) {
  detail::check_transport_matches(u, t);
  const auto dec = level_decomposition(u);
  const double tol = 0.25 * dec.merge_tolerance;
  const double a = t.breakpoints().front();
  const double b = t.breakpoints().back();

  std::vector<double> cuts{a};
  std::vector<LevelCount> counts;
  auto add_band = [&](double hi, LevelCount c) {
    if (hi > cuts.back()) {
      cuts.push_back(hi);
      counts.push_back(c);
    }
  };
  const std::size_t nlev = dec.levels.size();
  for (std::size_t k = 0; k < nlev; ++k) {
    const double zr = (k + 1 == nlev) ? b : detail::last_stay(t, dec.levels[k], tol);
    if (dec.atom_mass[k] > 0.0) add_band(zr, LevelCount::infinite());
    if (k + 1 < nlev) {
      const double zl_next = (k + 2 == nlev && dec.atom_mass[k + 1] <= 0.0)
                                 ? b
                                 : detail::first_reach(t, dec.levels[k + 1], tol);
      add_band(zl_next, LevelCount(dec.count[k]));
    }
  }
  if (counts.empty()) {
    // degenerate: everything collapsed into one band
    cuts.push_back(b);
    counts.push_back(nlev == 1 ? LevelCount::infinite() : LevelCount(dec.count.front()));
  }
  cuts.back() = b;
  return {std::move(cuts), std::move(counts)};
}

/// |1/T'(T^{-1}(y)) - sum over x in U^{-1}(y) of 1/|U'(x)||, zero at every regular level.
inline double density_relation_residual(const PiecewiseAffine& u, const PiecewiseAffine& t, double y) {
  const auto dec = level_decomposition(u);
  if (!(y > dec.levels.front() && y < dec.levels.back())) {
    std::ostringstream os;
    os << "level " << y << " lies outside the open image (" << dec.levels.front() << ", " << dec.levels.back() << ")";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
  if (dec.is_critical(y)) {
    std::ostringstream os;
    os << "level " << y << " is a critical value of U";
    throw Error(ErrorCode::CriticalLevel, os.str());
  }
  const double x = detail::first_reach(t, y, 0.0);
  const std::size_t i = t.piece_index(x);
  const double t_slope = t.slope(i);
  if (!(t_slope > 0.0)) {
    std::ostringstream os;
    os << "T is flat at T^{-1}(" << y << ") = " << x;
    throw Error(ErrorCode::FlatTransport, os.str());
  }
  detail::CompensatedSum inv;
  const auto& v = u.values();
  for (std::size_t p = 0; p < u.piece_count(); ++p) {
    const double lo = std::min(v[p], v[p + 1]);
    const double hi = std::max(v[p], v[p + 1]);
    if (lo < y && y < hi) inv.add(1.0 / std::abs(u.slope(p)));
  }
  return std::abs(1.0 / t_slope - inv.value());
}

}  // namespace monorearr
