// monorearr: command-line front end.
//
//   monorearr transport  --input u.json
//   monorearr verify     --input u.json --cost '{"kind":"power","p":2}' [--plot out.svg]
//   monorearr coarea     --input u.json --cost ... --grid 4000
//   monorearr approx     --input samples.json --cost ... --depth 8
//   monorearr regularize --input grid.json --j 4
//   monorearr suite      --count 100 --seed 0 [--monotone]
//
// Exit codes: 0 success, 2 bad input or configuration, 3 computation error,
// 4 inequality violated.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "monorearr.hpp"
#include "monorearr/json_io.hpp"
#include "monorearr/svg_plot.hpp"

namespace {

using monorearr::io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;
constexpr int kExitViolated = 4;

enum class Format { Json, Csv };

struct RunConfig {
  std::string command;
  std::string input_path;
  std::string cost_spec = R"({"kind":"power","p":2})";
  std::string output_path;
  std::optional<std::string> format;
  std::string plot_path;
  std::uint64_t seed = 0;
  long long count = 100;
  std::optional<double> tolerance;
  std::size_t grid = 1000;
  int depth = 8;
  double j = 1.0;
  unsigned threads = 1;
  bool monotone = false;
};

/// Thrown while reading inputs and configuration; maps to exit code 2.
struct InputError {
  std::string message;
};

template <typename F>
auto loading(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const monorearr::Error& e) {
    throw InputError{e.what()};
  }
}

Format output_format(const RunConfig& cfg, Format fallback) {
  if (!cfg.format) return fallback;
  if (*cfg.format == "json") return Format::Json;
  if (*cfg.format == "csv") return Format::Csv;
  throw InputError{"--format must be json or csv"};
}

std::optional<double> tolerance_from(const RunConfig& cfg) {
  if (cfg.tolerance) {
    if (!(*cfg.tolerance > 0.0)) throw InputError{"--tolerance must be positive"};
    return cfg.tolerance;
  }
  if (const char* env = std::getenv("MONO_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) throw InputError{std::string("MONO_TOL is not a positive number: ") + env};
    return v;
  }
  return std::nullopt;
}

json read_input(const RunConfig& cfg) {
  if (cfg.input_path.empty()) throw InputError{"--input is required for '" + cfg.command + "'"};
  return loading([&] { return monorearr::io::read_file(cfg.input_path); });
}

monorearr::ConvexCost read_cost(const RunConfig& cfg) {
  return loading([&] {
    const auto first = cfg.cost_spec.find_first_not_of(" \t\n");
    const bool inline_json = first != std::string::npos && cfg.cost_spec[first] == '{';
    const json j = inline_json ? monorearr::io::parse(cfg.cost_spec) : monorearr::io::read_file(cfg.cost_spec);
    return monorearr::io::cost_from_json(j);
  });
}

/// Output sink opened during loading so an unwritable path is an input error.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError{"cannot write '" + path + "'"};
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

int run_transport(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Json);
  const auto u = loading([&] { return monorearr::io::piecewise_affine_from_json(read_input(cfg)); });
  Sink out(cfg.output_path);

  const auto nu = monorearr::pushforward(u);
  const auto t = monorearr::monotone_transport(nu, u.domain());
  const auto n = monorearr::multiplicity(u, t);
  if (fmt == Format::Csv) {
    auto& os = out.stream();
    os << "x,T\n" << std::setprecision(17);
    for (std::size_t i = 0; i < t.breakpoints().size(); ++i) os << t.breakpoints()[i] << ',' << t.values()[i] << '\n';
  } else {
    write_json(out.stream(), {{"transport", monorearr::io::to_json(t)},
                              {"measure", monorearr::io::to_json(nu)},
                              {"multiplicity", monorearr::io::to_json(n)}});
  }
  return kExitOk;
}

void write_report(Format fmt, Sink& out, const monorearr::InequalityReport& r) {
  auto& os = out.stream();
  if (fmt == Format::Csv) {
    os << "lo,hi,n,tslope,contrib\n" << std::setprecision(17);
    for (const auto& b : r.bands) {
      os << b.span.a << ',' << b.span.b << ',' << monorearr::to_string(b.count) << ',' << b.t_slope << ','
         << b.contribution << '\n';
    }
  } else {
    write_json(os, monorearr::io::to_json(r));
  }
}

void write_verify_plot(const RunConfig& cfg, const monorearr::PiecewiseAffine& u, const monorearr::InequalityReport& r) {
  if (cfg.plot_path.empty()) return;
  try {
    std::ofstream svg(cfg.plot_path);
    if (!svg) {
      std::cerr << "warning: cannot write plot '" << cfg.plot_path << "'\n";
      return;
    }
    const auto t = monorearr::monotone_transport(monorearr::pushforward(u), u.domain());
    monorearr::plot::write_svg(svg,
                               {monorearr::plot::function_series(u, "U", "#1f77b4"),
                                monorearr::plot::function_series(t, "T", "#d62728"),
                                monorearr::plot::product_series(r, "n T'", "#2ca02c")},
                               "U, its monotone rearrangement T, and n T'");
  } catch (const std::exception& e) {
    std::cerr << "warning: plot skipped: " << e.what() << '\n';
  }
}

int run_verify(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Json);
  const auto tol = tolerance_from(cfg);
  const auto u = loading([&] { return monorearr::io::piecewise_affine_from_json(read_input(cfg)); });
  const auto f = read_cost(cfg);
  Sink out(cfg.output_path);
  try {
    const auto r = monorearr::verify_inequality(u, f, tol);
    write_report(fmt, out, r);
    write_verify_plot(cfg, u, r);
    return kExitOk;
  } catch (const monorearr::InequalityViolated& e) {
    write_report(fmt, out, e.report());
    write_verify_plot(cfg, u, e.report());
    std::cerr << e.what() << '\n';
    return kExitViolated;
  }
}

int run_coarea(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Json);
  const auto u = loading([&] { return monorearr::io::piecewise_affine_from_json(read_input(cfg)); });
  const auto f = read_cost(cfg);
  if (cfg.grid < 2) throw InputError{"--grid must be at least 2"};
  Sink out(cfg.output_path);
  const double oracle = monorearr::coarea_energy(u, f, cfg.grid);
  const double exact = monorearr::dirichlet_energy(u, f);
  if (fmt == Format::Csv) {
    out.stream() << "grid,coarea,dirichlet,abs_error\n"
                 << std::setprecision(17) << cfg.grid << ',' << oracle << ',' << exact << ','
                 << std::abs(oracle - exact) << '\n';
  } else {
    write_json(out.stream(),
               {{"grid", cfg.grid}, {"coarea", oracle}, {"dirichlet", exact}, {"abs_error", std::abs(oracle - exact)}});
  }
  return kExitOk;
}

int run_approx(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Json);
  const auto u = loading([&] { return monorearr::io::sampled_function_from_json(read_input(cfg)); });
  const auto f = read_cost(cfg);
  if (cfg.depth < 1) throw InputError{"--depth must be at least 1"};
  Sink out(cfg.output_path);
  std::vector<int> ks;
  for (int k = 1; k <= cfg.depth; ++k) ks.push_back(k);
  const auto report = monorearr::convergence_report(u, f, ks);
  if (fmt == Format::Csv) {
    auto& os = out.stream();
    os << "k,w11_error,cost_error,min_abs_slope\n" << std::setprecision(17);
    for (const auto& l : report.levels) {
      os << l.k << ',' << l.w11_error << ',' << l.cost_error << ',' << l.min_abs_slope << '\n';
    }
  } else {
    auto j = monorearr::io::to_json(report);
    j["approximant"] = monorearr::io::to_json(monorearr::build_approximant(u, f, cfg.depth));
    write_json(out.stream(), j);
  }
  return kExitOk;
}

int run_regularize(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Json);
  const auto g = loading([&] { return monorearr::io::grid_function_from_json(read_input(cfg)); });
  Sink out(cfg.output_path);
  const auto r = monorearr::inf_convolution(g, cfg.j);
  if (fmt == Format::Csv) {
    auto& os = out.stream();
    os << "x,g,g_j\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double x = g.domain().a + g.step() * static_cast<double>(i);
      os << x << ',';
      if (std::isinf(g[i])) {
        os << "inf";
      } else {
        os << g[i];
      }
      os << ',' << r[i] << '\n';
    }
  } else {
    write_json(out.stream(), monorearr::io::to_json(r));
  }
  return kExitOk;
}

int run_suite(const RunConfig& cfg) {
  const auto fmt = output_format(cfg, Format::Csv);
  const auto tol = tolerance_from(cfg);
  if (cfg.count < 1) throw InputError{"--count must be at least 1"};
  Sink out(cfg.output_path);
  monorearr::RandomShape shape;
  if (cfg.monotone) shape.signs = monorearr::SlopeSigns::Increasing;
  const auto rows = monorearr::run_campaign(cfg.seed, static_cast<std::size_t>(cfg.count), shape, tol, cfg.threads);
  if (fmt == Format::Csv) {
    monorearr::write_campaign_csv(out.stream(), rows);
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"seed", r.seed}, {"cost_kind", r.cost_kind}, {"lhs", r.lhs}, {"rhs", r.rhs},
                     {"gap", r.gap}, {"min_n", r.min_n}, {"max_n", r.max_n}});
    }
    write_json(out.stream(), arr);
  }
  int code = kExitOk;
  for (const auto& r : rows) {
    if (r.violated) {
      std::cerr << "inequality violated: seed " << r.seed << ", cost " << r.cost_kind << ", gap "
                << std::setprecision(17) << r.gap << '\n';
      code = kExitViolated;
    }
  }
  return code;
}

int dispatch(const RunConfig& cfg) {
  try {
    if (cfg.command == "transport") return run_transport(cfg);
    if (cfg.command == "verify") return run_verify(cfg);
    if (cfg.command == "coarea") return run_coarea(cfg);
    if (cfg.command == "approx") return run_approx(cfg);
    if (cfg.command == "regularize") return run_regularize(cfg);
    if (cfg.command == "suite") return run_suite(cfg);
    std::cerr << "unknown command '" << cfg.command << "'\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.message << '\n';
    return kExitInput;
  } catch (const monorearr::InequalityViolated& e) {
    std::cerr << e.what() << '\n';
    return kExitViolated;
  } catch (const monorearr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone rearrangement and the convexity inequality int f(|U'|) >= int f(n T')"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--input", cfg.input_path, "input JSON file");
  app.add_option("--cost", cfg.cost_spec, "cost as inline JSON or a path to a JSON file");
  app.add_option("--output", cfg.output_path, "output file (default: standard output)");
  app.add_option("--format", cfg.format, "json or csv");
  app.add_option("--plot", cfg.plot_path, "SVG plot of U, T and n T' (verify)");
  app.add_option("--seed", cfg.seed, "first seed (suite)");
  app.add_option("--count", cfg.count, "number of random functions (suite)");
  app.add_option("--tolerance", cfg.tolerance, "absolute gap tolerance (default 1e-9 max(1, lhs), env MONO_TOL)");
  app.add_option("--grid", cfg.grid, "level grid size (coarea)");
  app.add_option("--depth", cfg.depth, "largest dyadic depth (approx)");
  app.add_option("--j", cfg.j, "Lipschitz constant and cap (regularize)");
  app.add_option("--threads", cfg.threads, "worker threads (suite)");
  app.add_flag("--monotone", cfg.monotone, "generate non-decreasing functions only (suite)");

  const std::pair<const char*, const char*> commands[] = {
      {"transport", "push-forward measure, monotone transport T and multiplicity n of a function"},
      {"verify", "check int f(|U'|) >= int f(n T') with a per-band breakdown"},
      {"coarea", "level-set quadrature of the energy next to the exact value"},
      {"approx", "dyadic approximants of a sampled function and their errors"},
      {"regularize", "inf-convolution of a grid function with j|x|, capped at j"},
      {"suite", "random campaign, one CSV row per (seed, cost)"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  return dispatch(cfg);
}
