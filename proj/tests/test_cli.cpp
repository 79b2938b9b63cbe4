#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "cli_harness.hpp"
#include "monorearr/json_io.hpp"

using namespace monorearr;
namespace io = monorearr::io;

namespace {

const std::string kBin = MONOREARR_CLI_PATH;
const std::string kData = MONOREARR_DATA_DIR;

std::string data(const std::string& name) { return cli::quote(kData + "/" + name); }

int line_count(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(CliTransport, TentGivesIdentityAndCountTwo) {
  cli::Sandbox box;
  auto r = box.run(kBin, "transport --input " + data("tent.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = io::parse(r.out);
  auto t = io::piecewise_affine_from_json(j["transport"]);
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) EXPECT_NEAR(t(x), x, 1e-12);
  EXPECT_EQ(j["multiplicity"]["counts"], io::json::array({2}));
}

TEST(CliTransport, MonotoneInputIsItsOwnTransport) {
  cli::Sandbox box;
  auto in = box.write("inc.json", R"({"breakpoints":[0,0.3,0.8,1],"values":[-1,0.5,0.6,2]})");
  auto r = box.run(kBin, "transport --input " + cli::quote(in));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto t = io::piecewise_affine_from_json(io::parse(r.out)["transport"]);
  auto u = make_piecewise_affine({0, 0.3, 0.8, 1}, {-1, 0.5, 0.6, 2});
  for (int i = 0; i <= 100; ++i) EXPECT_NEAR(t(i / 100.0), u(i / 100.0), 1e-9);
}

TEST(CliTransport, RoundTripCdf) {
  cli::Sandbox box;
  auto r = box.run(kBin, "transport --input " + data("sawtooth.json") + " --output " + cli::quote(box.path("t.json")));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = io::read_file(box.path("t.json").string());
  auto nu = io::measure_from_json(j["measure"]);
  auto t_file = box.write("t_only.json", j["transport"].dump());
  auto again = box.run(kBin, "transport --input " + cli::quote(t_file));
  ASSERT_EQ(again.exit_code, 0) << again.err;
  auto nu2 = io::measure_from_json(io::parse(again.out)["measure"]);
  for (int i = -5; i <= 105; ++i) EXPECT_NEAR(nu2.cdf(i / 100.0), nu.cdf(i / 100.0), 1e-9);
}

TEST(CliTransport, InputErrorsExitTwo) {
  cli::Sandbox box;
  EXPECT_EQ(box.run(kBin, "transport --input " + data("malformed.json")).exit_code, 2);
  EXPECT_EQ(box.run(kBin, "transport --input /nonexistent.json").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "transport").exit_code, 2);
  auto dup = box.write("dup.json", R"({"breakpoints":[0,1,1],"values":[0,1,2]})");
  EXPECT_EQ(box.run(kBin, "transport --input " + cli::quote(dup)).exit_code, 2);
  EXPECT_EQ(box.run(kBin, "").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "frobnicate").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "transport --input " + data("tent.json") + " --format xml").exit_code, 2);
}

TEST(CliVerify, TwoSlopeGap) {
  cli::Sandbox box;
  auto r = box.run(kBin, "verify --input " + data("two_slopes.json") + R"( --cost '{"kind":"power","p":2}')");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = io::parse(r.out);
  EXPECT_NEAR(j["gap"].get<double>(), 0.75, 1e-12);
  EXPECT_NEAR(j["lhs"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(j["rhs"].get<double>(), 2.25, 1e-12);
}

TEST(CliVerify, TentGapZeroAndPlot) {
  cli::Sandbox box;
  auto svg = box.path("tent.svg").string();
  auto r = box.run(kBin, "verify --input " + data("tent.json") + " --plot " + cli::quote(svg));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(io::parse(r.out)["gap"].get<double>(), 0.0, 1e-12);
  EXPECT_NE(cli::slurp(svg).find("<svg"), std::string::npos);
}

TEST(CliVerify, CostFromFileAndCsv) {
  cli::Sandbox box;
  auto r = box.run(kBin, "verify --input " + data("two_slopes.json") + " --cost " + data("cost_t2_plus_t.json") +
                             " --format csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("lo,hi,n,tslope,contrib\n", 0), 0u);
}

TEST(CliVerify, InvalidCostExitsTwo) {
  cli::Sandbox box;
  EXPECT_EQ(box.run(kBin, "verify --input " + data("tent.json") + R"( --cost '{"kind":"power","p":0.5}')").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "verify --input " + data("tent.json") + R"( --cost '{"kind":')").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "verify --input " + data("tent.json") + " --tolerance -1").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "verify --input " + data("tent.json"), "MONO_TOL=abc").exit_code, 2);
}

TEST(CliVerify, StrictToleranceSurfacesRoundingAsViolation) {
  cli::Sandbox box;
  // equal-modulus branches: exact gap 0, computed gap is a few ulps below zero
  auto strict = box.run(kBin, "verify --input " + data("equal_slopes.json") + " --tolerance 1e-300");
  EXPECT_EQ(strict.exit_code, 4) << strict.err;
  EXPECT_NE(strict.err.find("InequalityViolated"), std::string::npos);
  EXPECT_LT(io::parse(strict.out)["gap"].get<double>(), 0.0);
  EXPECT_EQ(box.run(kBin, "verify --input " + data("equal_slopes.json"), "MONO_TOL=1e-300").exit_code, 4);
  EXPECT_EQ(box.run(kBin, "verify --input " + data("equal_slopes.json")).exit_code, 0);
}

TEST(CliCoarea, FlatPieceExitsThree) {
  cli::Sandbox box;
  auto r = box.run(kBin, "coarea --input " + data("flat_then_rise.json"));
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("FlatPiecePresent"), std::string::npos);
  auto ok = box.run(kBin, "coarea --input " + data("affine.json") + " --grid 10");
  ASSERT_EQ(ok.exit_code, 0) << ok.err;
  EXPECT_NEAR(io::parse(ok.out)["coarea"].get<double>(), 4.0, 1e-9);
}

TEST(CliApprox, ReportAndNonInvertibleCost) {
  cli::Sandbox box;
  auto r = box.run(kBin, "approx --input " + data("smooth_samples.json") + " --cost " + data("cost_t2_plus_t.json") +
                             " --depth 8");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = io::parse(r.out);
  EXPECT_EQ(j["levels"].size(), 8u);
  EXPECT_TRUE(j["decreasing_trend"].get<bool>());
  EXPECT_EQ(box.run(kBin, "approx --input " + data("smooth_samples.json") + " --depth 8").exit_code, 3);
  EXPECT_EQ(box.run(kBin, "approx --input " + data("smooth_samples.json") + " --cost " + data("cost_t2_plus_t.json") +
                              " --depth 9")
                .exit_code,
            3);
}

TEST(CliRegularize, StepFunction) {
  cli::Sandbox box;
  auto r = box.run(kBin, "regularize --input " + data("step_grid.json") + " --j 2");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto g = io::grid_function_from_json(io::parse(r.out));
  EXPECT_NEAR(g[75], 0.5, 1e-12);
  EXPECT_EQ(box.run(kBin, "regularize --input " + data("step_grid.json") + " --j 0").exit_code, 3);
}

TEST(CliSuite, HundredSeedsFourHundredRows) {
  cli::Sandbox box;
  auto r = box.run(kBin, "suite --count 100 --seed 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(line_count(r.out), 401);
  EXPECT_EQ(r.out.rfind("seed,cost_kind,lhs,rhs,gap,min_n,max_n\n", 0), 0u);
}

TEST(CliSuite, DeterministicAcrossRunsAndThreads) {
  cli::Sandbox box;
  auto a = box.run(kBin, "suite --count 50 --seed 7");
  auto b = box.run(kBin, "suite --count 50 --seed 7");
  auto c = box.run(kBin, "suite --count 50 --seed 7 --threads 4");
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST(CliSuite, MonotoneGapsVanish) {
  cli::Sandbox box;
  auto r = box.run(kBin, "suite --count 1 --monotone");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 7u);
    const double lhs = std::stod(cols[2]);
    EXPECT_LE(std::abs(std::stod(cols[4])), 1e-9 * lhs);
    EXPECT_EQ(cols[5], "1");
    EXPECT_EQ(cols[6], "1");
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST(CliSuite, ZeroCountExitsTwo) {
  cli::Sandbox box;
  EXPECT_EQ(box.run(kBin, "suite --count 0").exit_code, 2);
  EXPECT_EQ(box.run(kBin, "suite --count -3").exit_code, 2);
}

TEST(CliSuite, StrictToleranceReportsSeed) {
  cli::Sandbox box;
  // with t, the rounding residue of the linear cost exceeds a 1e-300 tolerance on seed 1
  auto r = box.run(kBin, "suite --count 20 --seed 0 --tolerance 1e-300");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.err.find("seed 1, cost t,"), std::string::npos) << r.err;
  EXPECT_EQ(box.run(kBin, "suite --count 20 --seed 0").exit_code, 0);
}
