#include "nestdiag/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "nestdiag/diagnostics.hpp"
#include "nestdiag/io.hpp"
#include "nestdiag/plotdata.hpp"
#include "nestdiag/resampling.hpp"
#include "nestdiag/report.hpp"
#include "nestdiag/rng.hpp"
#include "nestdiag/sampler.hpp"

namespace nestdiag {

namespace fs = std::filesystem;

namespace {

struct InputOptions {
  std::vector<std::string> files;
  std::string format = "auto";
  std::optional<double> prior_birth;
};

void add_input_options(CLI::App* cmd, InputOptions& in, std::size_t min_files) {
  cmd->add_option("files", in.files, "Run files (native or dead-birth)")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->expected(
      static_cast<int>(min_files), -1);
  cmd->add_option("--input-format", in.format, "auto, native or dead-birth")
      ->check(CLI::IsMember({"auto", "native", "dead-birth"}));
  cmd->add_option("--prior-birth", in.prior_birth,
                  "Dead-birth births at or below this value mean 'drawn from the prior'");
}

std::vector<NSRun> load_runs(const InputOptions& in) {
  const auto format = parse_input_format(in.format);
  std::vector<NSRun> runs;
  for (const auto& file : in.files) {
    auto run = read_run_file(file, format, in.prior_birth);
    if (!run.meta.contains("id")) run.meta["id"] = fs::path(file).stem().string();
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<ParamFunction> parse_functions(const std::string& text) {
  std::vector<ParamFunction> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(ParamFunction::parse(std::string_view(text).substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// key=value lines become "--key=value" arguments placed before the user's
// flags; with last-value-wins options the command line takes precedence.
std::vector<std::string> config_arguments(const fs::path& path) {
  const auto text = read_text_file(path);
  std::vector<std::string> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, path.string() + ": expected key=value, got '" + line + "'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty() || key == "config") throw ParseError(line_no, path.string() + ": invalid key '" + key + "'");
    out.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config || args.empty()) return args;
  auto extra = config_arguments(*config);
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

struct SimulateOptions {
  std::string likelihood = "gaussian";
  std::size_t dim = 10;
  SamplerSettings settings;
  std::size_t runs = 1;
  std::string out;
  std::string sampler = "auto";
};

int do_simulate(const SimulateOptions& o, std::uint64_t seed, std::ostream& out) {
  const auto likelihood = LikelihoodSpec::parse(o.likelihood, o.dim);
  std::string sampler = o.sampler;
  if (sampler == "auto") sampler = o.likelihood == "gaussian" ? "perfect" : "slice";
  if (sampler == "perfect" && o.likelihood != "gaussian")
    throw Error("the perfect sampler only supports the gaussian likelihood");
  o.settings.validate();
  if (o.runs < 1) throw Error("--runs must be at least 1");
  fs::create_directories(o.out);

  const int width = std::max<int>(4, static_cast<int>(std::to_string(o.runs).size()));
  parallel_for(o.runs, [&](std::size_t k) {
    auto settings = o.settings;
    settings.seed = derive_seed(seed, k);
    auto run = sampler == "perfect" ? perfect_ns_gaussian(o.dim, settings) : slice_ns(likelihood, settings);
    char name[64];
    std::snprintf(name, sizeof name, "run_%0*zu", width, k);
    run.meta["id"] = name;
    write_file_atomic(fs::path(o.out) / (std::string(name) + ".run"), write_native(run));
  });
  out << "wrote " << o.runs << " run" << (o.runs == 1 ? "" : "s") << " to " << o.out << '\n';
  return 0;
}

struct CheckOptions {
  InputOptions input;
  std::string estimators = "logz";
  std::optional<double> true_logz;
  std::size_t bootstraps = kDefaultBootstraps;
  std::string csv;
};

int do_check(const CheckOptions& o, std::uint64_t seed, std::ostream& out) {
  const auto specs = EstimatorSpec::parse_list(o.estimators);
  const auto runs = load_runs(o.input);
  for (const auto& s : specs) s.check_dimension(runs.front().dim());
  std::vector<std::optional<double>> truths(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (specs[s].quantity == Quantity::log_evidence) truths[s] = o.true_logz;
  }
  const auto budgets = error_budgets(runs, specs, o.bootstraps, seed, truths);
  out << budget_table(budgets);
  if (!o.csv.empty()) write_file_atomic(o.csv, budget_csv(budgets));
  return 0;
}

struct CompareOptions {
  InputOptions input;
  std::string estimators = "logz";
  double alpha = 0.05;
  std::size_t bootstraps = kDefaultBootstraps;
  std::string csv;
};

int do_compare(const CompareOptions& o, std::uint64_t seed, std::ostream& out) {
  const auto specs = EstimatorSpec::parse_list(o.estimators);
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw Error("--alpha must lie in (0, 1)");
  const auto runs = load_runs(o.input);
  for (const auto& s : specs) s.check_dimension(runs.front().dim());

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j) pairs.emplace_back(i, j);

  std::vector<std::vector<PairTestResult>> thread_tests(pairs.size()), distances(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto& a = runs[pairs[p].first];
    const auto& b = runs[pairs[p].second];
    for (std::size_t s = 0; s < specs.size(); ++s) {
      thread_tests[p].push_back(thread_ks_test(a, b, specs[s]));
      distances[p].push_back(bootstrap_distance(a, b, specs[s], o.bootstraps, derive_seed(seed, p)));
    }
  });

  DiagnosticReport report;
  report.alpha = o.alpha;
  std::vector<double> p_values;
  for (const auto& tests : thread_tests) {
    for (const auto& t : tests) {
      report.pair_tests.push_back(t);
      p_values.push_back(*t.p_value);
    }
  }
  for (const auto& tests : distances) report.pair_tests.insert(report.pair_tests.end(), tests.begin(), tests.end());
  report.pair_rejected = holm_bonferroni(p_values, o.alpha);
  const auto rejected = std::count(report.pair_rejected.begin(), report.pair_rejected.end(), true);

  out << pair_tests_table(report);
  out << rejected << " of " << p_values.size() << " thread tests rejected\n";
  if (!o.csv.empty()) write_file_atomic(o.csv, pair_tests_csv(report));
  return 0;
}

struct PlotOptions {
  InputOptions input;
  std::string functions = "t1";
  std::string out;
  std::size_t bootstraps = kDefaultBootstraps;
  std::size_t n_sim = 1000;
  std::size_t traces = kDefaultTracesPerRun;
  std::size_t grid_points = kDefaultGridPoints;
  bool svg = false;
};

std::string file_safe(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

int do_plot(const PlotOptions& o, std::uint64_t seed, std::ostream& out) {
  const auto functions = parse_functions(o.functions);
  const auto runs = load_runs(o.input);
  for (const auto& f : functions) f.check_dimension(runs.front().dim());
  fs::create_directories(o.out);
  const fs::path dir(o.out);

  std::size_t files = 0;
  for (std::size_t j = 0; j < functions.size(); ++j) {
    // Shared grid so that bands of different runs overlay.
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& run : runs) {
      const auto g = default_grid(run, functions[j], o.grid_points);
      lo = std::min(lo, g.front());
      hi = std::max(hi, g.back());
    }
    std::vector<double> grid(o.grid_points);
    for (std::size_t g = 0; g < grid.size(); ++g)
      grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid.size() - 1);

    std::vector<ContourBand> bands;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      bands.push_back(posterior_uncertainty_band(runs[k], functions[j], grid, o.bootstraps,
                                                 derive_seed(derive_seed(seed, k), j)));
      write_file_atomic(dir / ("band_" + file_safe(bands.back().run_id) + "_" + file_safe(functions[j].name()) + ".csv"),
                        band_csv(bands.back()));
      ++files;
    }
    if (o.svg) {
      write_file_atomic(dir / ("band_" + file_safe(functions[j].name()) + ".svg"), band_svg(bands));
      ++files;
    }
  }

  const auto diagram = logx_diagram(runs, functions, o.n_sim, o.traces, derive_seed(splitmix64(seed), 1));
  write_file_atomic(dir / "logx_mass.csv", mass_curve_csv(diagram));
  write_file_atomic(dir / "logx_scatter.csv", scatter_csv(diagram));
  write_file_atomic(dir / "logx_traces.csv", traces_csv(diagram));
  files += 3;
  if (o.n_sim > 0) {
    write_file_atomic(dir / "logx_intervals.csv", logx_intervals_csv(diagram));
    ++files;
  }
  if (o.svg) {
    write_file_atomic(dir / "logx_diagram.svg", logx_diagram_svg(diagram));
    ++files;
  }
  out << "wrote " << files << " files to " << o.out << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diagnostics for nested sampling runs", "nestdiag"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::uint64_t seed = 0;
  std::string config;
  const auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed; output is fully determined by it");
    cmd->add_option("--config", config, "File of key=value lines, overridden by flags");
  };

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate nested sampling runs");
  simulate->add_option("--likelihood", sim.likelihood, "gaussian or loggamma_mix")
      ->check(CLI::IsMember({"gaussian", "loggamma_mix"}));
  simulate->add_option("--dim", sim.dim, "Dimension");
  simulate->add_option("--nlive", sim.settings.nlive, "Live points");
  simulate->add_option("--num-repeats", sim.settings.num_repeats, "Slice steps per replacement");
  simulate->add_option("--termination-frac", sim.settings.termination_frac, "Stop when live points add less than this");
  simulate->add_option("--runs", sim.runs, "Number of runs");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--sampler", sim.sampler, "auto, perfect or slice")
      ->check(CLI::IsMember({"auto", "perfect", "slice"}));
  common(simulate);

  CheckOptions chk;
  auto* check = app.add_subcommand("check", "Error budget over a set of runs");
  add_input_options(check, chk.input, 2);
  check->add_option("--estimators", chk.estimators, "Comma-separated estimators");
  check->add_option("--true-logz", chk.true_logz, "Analytic log evidence, enables RMSE rows");
  check->add_option("--bootstraps", chk.bootstraps, "Bootstrap replications per run");
  check->add_option("--csv", chk.csv, "Also write the budget as CSV");
  common(check);

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Pairwise thread and bootstrap KS tests");
  add_input_options(compare, cmp.input, 2);
  compare->add_option("--estimators", cmp.estimators, "Comma-separated estimators");
  compare->add_option("--alpha", cmp.alpha, "Family-wise significance level");
  compare->add_option("--bootstraps", cmp.bootstraps, "Bootstrap replications per run");
  compare->add_option("--csv", cmp.csv, "Also write the tests as CSV");
  common(compare);

  PlotOptions plt;
  auto* plot = app.add_subcommand("plot", "Posterior bands and log X diagrams as CSV/SVG");
  add_input_options(plot, plt.input, 1);
  plot->add_option("--functions", plt.functions, "Comma-separated functions (t<k> or r)");
  plot->add_option("--out", plt.out, "Output directory")->required();
  plot->add_option("--bootstraps", plt.bootstraps, "Bootstrap replications per band");
  plot->add_option("--n-sim", plt.n_sim, "Simulated log X draws (0 skips intervals)");
  plot->add_option("--traces", plt.traces, "Thread traces per run");
  plot->add_option("--grid-points", plt.grid_points, "Density grid size");
  plot->add_flag("--svg", plt.svg, "Also write SVG drawings");
  common(plot);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*simulate) return do_simulate(sim, seed, out);
    if (*check) return do_check(chk, seed, out);
    if (*compare) return do_compare(cmp, seed, out);
    return do_plot(plt, seed, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace nestdiag
