#pragma once

// Seeded randomized runs of the inequality verifier over a fixed set of costs.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "monorearr/energy.hpp"
#include "monorearr/func_core.hpp"

namespace monorearr {

/// t, t^2, t^4, exp.
inline std::vector<ConvexCost> standard_costs() {
  return {power_cost(1.0), power_cost(2.0), power_cost(4.0), exp_cost()};
}

inline constexpr std::size_t kCampaignMaxPieces = 60;
inline constexpr std::pair<double, double> kCampaignSlopes{0.1, 10.0};

/// The function used for `seed`: 1..60 pieces on [0, 1], |slope| in [0.1, 10].
inline PiecewiseAffine campaign_function(std::uint64_t seed, const RandomShape& shape = {}) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t pieces = 1 + static_cast<std::size_t>(rng() % kCampaignMaxPieces);
  return random_piecewise_affine(seed, pieces, kCampaignSlopes, Interval(0.0, 1.0), shape);
}

struct CampaignRow {
  std::uint64_t seed = 0;
  std::string cost_kind;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  std::uint64_t min_n = 0;  ///< over bands where T' > 0; 0 if there are none
  std::uint64_t max_n = 0;
  bool violated = false;
};

inline CampaignRow campaign_row(std::uint64_t seed, const PiecewiseAffine& u, const ConvexCost& f,
                                std::optional<double> tolerance) {
  CampaignRow row;
  row.seed = seed;
  row.cost_kind = f.label();
  InequalityReport report;
  try {
    report = verify_inequality(u, f, tolerance);
  } catch (const InequalityViolated& e) {
    report = e.report();
    row.violated = true;
  }
  row.lhs = report.lhs;
  row.rhs = report.rhs;
  row.gap = report.gap;
  bool any = false;
  for (const auto& b : report.bands) {
    if (b.count.is_infinite()) continue;
    row.min_n = any ? std::min(row.min_n, b.count.value()) : b.count.value();
    row.max_n = any ? std::max(row.max_n, b.count.value()) : b.count.value();
    any = true;
  }
  return row;
}

/// Rows ordered by (seed, cost) regardless of `threads`.
inline std::vector<CampaignRow> run_campaign(std::uint64_t first_seed, std::size_t count, const RandomShape& shape = {},
                                             std::optional<double> tolerance = std::nullopt, unsigned threads = 1) {
  const auto costs = standard_costs();
  std::vector<CampaignRow> rows(count * costs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const std::uint64_t seed = first_seed + s;
      const auto u = campaign_function(seed, shape);
      for (std::size_t c = 0; c < costs.size(); ++c) rows[s * costs.size() + c] = campaign_row(seed, u, costs[c], tolerance);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    work(0, count);
    return rows;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return rows;
}

/// Columns: seed, cost_kind, lhs, rhs, gap, min_n, max_n (17 significant digits).
inline void write_campaign_csv(std::ostream& os, const std::vector<CampaignRow>& rows) {
  os << "seed,cost_kind,lhs,rhs,gap,min_n,max_n\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.seed << ',' << r.cost_kind << ',' << r.lhs << ',' << r.rhs << ',' << r.gap << ',' << r.min_n << ','
       << r.max_n << '\n';
  }
}

}  // namespace monorearr
