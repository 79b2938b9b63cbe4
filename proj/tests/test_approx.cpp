#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "monorearr/approx.hpp"
#include "monorearr/energy.hpp"
#include "oracles.hpp"

using namespace monorearr;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

const ConvexCost kCost = linear_plus_power_cost(1.0, 2.0, 1.0);  // t^2 + t

template <typename Fn>
SampledFunction sample(Fn u, int depth, double a = 0.0, double b = 1.0) {
  const std::size_t n = (std::size_t{1} << depth) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = u(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return {a, b, std::move(v)};
}

SampledFunction sample(const PiecewiseAffine& u, int depth) {
  return sample([&](double x) { return u(x); }, depth, u.domain().a, u.domain().b);
}

/// Random trigonometric polynomial with a few sign changes of U'.
SampledFunction smooth_sample(std::uint64_t seed, int depth) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2 * std::numbers::pi);
  double c[4], p[4];
  for (int m = 0; m < 4; ++m) {
    c[m] = amp(rng) / (m + 1);
    p[m] = phase(rng);
  }
  return sample(
      [&](double x) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += c[m] * std::sin(2 * std::numbers::pi * (m + 1) * x + p[m]);
        return s;
      },
      depth);
}

double max_abs_diff(const PiecewiseAffine& a, const PiecewiseAffine& b, int points = 1025) {
  double d = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = a.domain().a + a.length() * i / (points - 1.0);
    d = std::max(d, std::abs(a(x) - b(x)));
  }
  return d;
}

PiecewiseAffine tent() { return make_piecewise_affine({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}); }
PiecewiseAffine sawtooth() { return make_piecewise_affine({0, 0.25, 0.5, 0.75, 1}, {0, 1, 0, 1, 0}); }

}  // namespace

TEST(SampledFunction, Validation) {
  EXPECT_EQ(code_of([] { SampledFunction(0, 1, {0, 1, 2, 3}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { SampledFunction(0, 1, {0, 1}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { SampledFunction(0, 1, {0, 1, 2}, std::vector<double>{1.0}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { SampledFunction(0, 1, {0, NAN, 2}); }), ErrorCode::NonFiniteValue);
  EXPECT_EQ(code_of([] { SampledFunction(0, 1, std::vector<double>((1u << 15) + 1, 0.0)); }), ErrorCode::DepthExceeded);
  SampledFunction s(0, 1, {0, 1, 0});
  EXPECT_EQ(s.depth(), 1);
  EXPECT_DOUBLE_EQ(s.derivative()[0], 2.0);
  EXPECT_DOUBLE_EQ(s.derivative()[1], -2.0);
}

TEST(DyadicAverage, Examples) {
  std::vector<double> c(64, 3.5);
  for (int k = 1; k <= 6; ++k) {
    for (double h : dyadic_average(c, k)) EXPECT_DOUBLE_EQ(h, 3.5);
  }

  auto t = sample(tent(), 6);
  std::vector<double> g;
  for (double d : t.derivative()) g.push_back(kCost(std::abs(d)));
  auto h = dyadic_average(g, 1);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_DOUBLE_EQ(h[0], 6.0);
  EXPECT_DOUBLE_EQ(h[1], 6.0);

  // g linear 0 -> 1, sampled at fine-cell midpoints
  std::vector<double> lin(1024);
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = (i + 0.5) / 1024.0;
  auto m = dyadic_average(lin, 1);
  EXPECT_NEAR(m[0], 0.25, 1e-15);
  EXPECT_NEAR(m[1], 0.75, 1e-15);
}

TEST(DyadicAverage, Errors) {
  std::vector<double> g(8, 1.0);
  EXPECT_EQ(code_of([&] { dyadic_average(g, 4); }), ErrorCode::DepthExceeded);
  EXPECT_EQ(code_of([&] { dyadic_average(g, 0); }), ErrorCode::DepthExceeded);
}

TEST(DyadicAverage, L1DistanceShrinks) {
  std::vector<double> g(1024);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 + std::sin(6.0 * (i + 0.5) / 1024.0);
  double prev = INFINITY;
  for (int k = 1; k <= 10; ++k) {
    auto h = dyadic_average(g, k);
    const std::size_t per = g.size() / h.size();
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err += std::abs(h[i / per] - g[i]) / 1024.0;
    EXPECT_LE(err, prev + 1e-15);
    prev = err;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(BuildApproximant, AffineIsFixedPoint) {
  auto u = sample([](double x) { return 1.0 - 1.7 * x; }, 8);
  for (int k = 1; k <= 8; ++k) {
    auto uk = build_approximant(u, kCost, k);
    EXPECT_LT(max_abs_diff(uk, u.interpolant()), 1e-12) << "k " << k;
  }
}

TEST(BuildApproximant, TentReproduced) {
  auto u = sample(tent(), 6);
  for (int k = 1; k <= 6; ++k) {
    auto uk = build_approximant(u, kCost, k);
    EXPECT_LT(max_abs_diff(uk, tent()), 1e-12) << "k " << k;
  }
}

TEST(BuildApproximant, SmoothConverges) {
  auto u = sample([](double x) { return std::sin(2 * std::numbers::pi * x); }, 10);
  auto e3 = approximant_errors(u, kCost, 3, build_approximant(u, kCost, 3));
  auto e6 = approximant_errors(u, kCost, 6, build_approximant(u, kCost, 6));
  EXPECT_LT(e6.w11_error, e3.w11_error);
}

TEST(BuildApproximant, Errors) {
  auto u = sample(tent(), 4);
  EXPECT_EQ(code_of([&] { build_approximant(u, power_cost(2.0), 2); }), ErrorCode::NonInvertibleCost);
  EXPECT_EQ(code_of([&] { build_approximant(u, sampled_cost({0, 1, 2}, {0, 1, 3}), 2); }),
            ErrorCode::NonInvertibleCost);
  EXPECT_EQ(code_of([&] { build_approximant(u, kCost, 5); }), ErrorCode::DepthExceeded);
  EXPECT_EQ(code_of([&] { build_approximant(u, kCost, 0); }), ErrorCode::DepthExceeded);
  EXPECT_EQ(code_of([&] { build_approximant(u, superlinearize(power_cost(2.0), 1.0, power_cost(2.0)), 2); }),
            ErrorCode::NonInvertibleCost);
  EXPECT_NO_THROW(build_approximant(u, superlinearize(power_cost(1.0), 1.0, power_cost(2.0)), 2));
}

TEST(BuildApproximant, ZeroDerivativeCellsKeepNonzeroSlope) {
  auto u = sample([](double x) { return x < 0.5 ? 0.0 : x - 0.5; }, 6);
  for (int k = 1; k <= 6; ++k) {
    auto uk = build_approximant(u, kCost, k);
    for (std::size_t c = 0; c < uk.piece_count(); ++c) EXPECT_GT(std::abs(uk.slope(c)), 0.0);
  }
}

TEST(ConvergenceReport, Examples) {
  const std::vector<int> ks{1, 2, 3, 4, 5, 6};
  auto affine = convergence_report(sample([](double x) { return 0.5 + 3 * x; }, 6), kCost, ks);
  for (const auto& l : affine.levels) {
    EXPECT_LT(l.w11_error, 1e-12);
    EXPECT_LT(l.cost_error, 1e-12);
  }
  auto t = convergence_report(sample(tent(), 6), kCost, ks);
  for (const auto& l : t.levels) {
    EXPECT_LT(l.w11_error, 1e-12);
    EXPECT_LT(l.cost_error, 1e-12);
  }
  const std::vector<int> deep{2, 3, 4, 5, 6, 7, 8};
  auto s = convergence_report(smooth_sample(3, 10), kCost, deep);
  EXPECT_LT(s.levels.back().w11_error, 0.1 * s.levels.front().w11_error);
  EXPECT_TRUE(s.decreasing_trend());
}

TEST(LiminfCheck, Examples) {
  const std::vector<int> ks{1, 2, 3, 4, 5, 6};
  const std::vector<double> tent_probes{0.2, 0.7};
  for (const auto& p : multiplicity_liminf_check(sample(tent(), 6), kCost, ks, tent_probes)) {
    EXPECT_EQ(p.limit_count, LevelCount(2));
    EXPECT_EQ(p.window_min, LevelCount(2));
    EXPECT_TRUE(p.passed);
  }
  const std::vector<double> probes{0.3, 0.6};
  for (const auto& p : multiplicity_liminf_check(sample([](double x) { return x * x + x; }, 8), kCost, ks, probes)) {
    EXPECT_EQ(p.limit_count, LevelCount(1));
    EXPECT_TRUE(p.passed);
  }
  const std::vector<double> w_probe{0.5};
  auto w = multiplicity_liminf_check(sample(sawtooth(), 8), kCost, ks, w_probe);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].limit_count, LevelCount(4));
  EXPECT_GE(w[0].window_min, LevelCount(4));
  EXPECT_EQ(static_cast<int>(w[0].limit_count.value()),
            oracle::crossings(sawtooth(), monotone_transport(pushforward(sawtooth()), Interval(0, 1))(0.5)));
  EXPECT_TRUE(w[0].passed);
}

TEST(LiminfCheck, ProbeAtCriticalLevel) {
  auto u = sample(make_piecewise_affine({0, 0.75, 1}, {0, 0.75, 0}), 8);
  const std::vector<int> ks{2, 4};
  const std::vector<double> inside{0.5};
  const std::vector<double> edge{1e-4};
  EXPECT_NO_THROW(multiplicity_liminf_check(u, kCost, ks, inside));
  EXPECT_EQ(code_of([&] { multiplicity_liminf_check(u, kCost, ks, edge); }), ErrorCode::ProbeAtCriticalLevel);
  // count jumps from 1 to 2 at T = 0.5, i.e. x = 0.25
  auto v = sample(make_piecewise_affine({0, 0.5, 1}, {0, 1, 0.5}), 8);
  const std::vector<double> cut{0.25};
  EXPECT_EQ(code_of([&] { multiplicity_liminf_check(v, kCost, ks, cut); }), ErrorCode::ProbeAtCriticalLevel);
  // a kink of a monotone input leaves the count unchanged
  auto w = sample(make_piecewise_affine({0, 0.5, 1}, {0, 0.5, 1.5}), 8);
  const std::vector<double> kink{0.5};
  EXPECT_NO_THROW(multiplicity_liminf_check(w, kCost, ks, kink));
}

// properties

TEST(ApproxProperty, SlopesAnchoringAndInequalityTransfer) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto u = smooth_sample(seed, 9);
    for (int k = 1; k <= 9; ++k) {
      auto uk = build_approximant(u, kCost, k);
      EXPECT_EQ(uk(u.a()), u.values().front());
      for (std::size_t c = 0; c < uk.piece_count(); ++c) EXPECT_GT(std::abs(uk.slope(c)), 0.0);
      EXPECT_NO_THROW(verify_inequality(uk, kCost));
      EXPECT_NO_THROW(verify_inequality(uk, power_cost(2.0)));
    }
  }
}

TEST(ApproxProperty, DyadicAlignedInputsReproduced) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> slope(0.2, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int align = 1 + trial % 4;
    const std::size_t cells = std::size_t{1} << align;
    std::vector<double> x(cells + 1), v(cells + 1);
    for (std::size_t c = 0; c <= cells; ++c) x[c] = static_cast<double>(c) / static_cast<double>(cells);
    v[0] = 0.0;
    for (std::size_t c = 0; c < cells; ++c) v[c + 1] = v[c] + ((rng() & 1u) ? 1.0 : -1.0) * slope(rng) / cells;
    auto u = make_piecewise_affine(x, v);
    auto s = sample(u, 8);
    for (int k = align; k <= 8; ++k) {
      EXPECT_LT(max_abs_diff(build_approximant(s, kCost, k), u), 1e-12) << "trial " << trial << " k " << k;
    }
  }
}

TEST(ApproxProperty, EquiIntegrabilityProxy) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto u = smooth_sample(seed, 9);
    double max_u = 0.0;
    std::vector<double> t_energy;
    for (int k = 1; k <= 9; ++k) {
      auto uk = build_approximant(u, kCost, k);
      max_u = std::max(max_u, dirichlet_energy(uk, kCost));
      t_energy.push_back(dirichlet_energy(monotone_transport(pushforward(uk), uk.domain()), kCost));
    }
    for (double e : t_energy) EXPECT_LE(e, max_u + kCost(0.0) * u.domain().length() + 1e-12);
  }
}
