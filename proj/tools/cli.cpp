#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyamix/analysis.hpp"
#include "polyamix/completion.hpp"
#include "polyamix/datasets.hpp"
#include "polyamix/gibbs.hpp"
#include "polyamix/io.hpp"
#include "polyamix/simulation.hpp"

namespace polyamix::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Writes to --out when given, else to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ValidationError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("failed writing output");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  return in;
}

// Mixtures for analysis: a mixtures file as is, a draws file through the
// multiplicity-weighted mixture of each draw.
struct AnalysisInput {
  std::vector<double> data;
  std::vector<MixtureDensity> mixtures;
};

AnalysisInput load_for_analysis(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty file");
  const FileKind kind = peek_kind(header);
  in.clear();
  in.seekg(0);
  AnalysisInput input;
  if (kind == FileKind::mixtures) {
    MixturesFile f = read_mixtures(in);
    input.data = std::move(f.data);
    input.mixtures = std::move(f.mixtures);
  } else {
    DrawsFile f = read_draws(in);
    input.data = std::move(f.data);
    for (const auto& d : f.draws) input.mixtures.push_back(marginal_mixture(d));
  }
  return input;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::string input;
  std::string out;
  std::size_t iters = 100;
  std::size_t burnin = 2000;
  std::size_t thin = 150;
  std::uint64_t seed = 1;
  std::optional<double> fix_alpha, fix_mu, fix_tau;
  bool no_remix = false;
};

int cmd_fit(const FitOptions& o, std::ostream& out) {
  DrawsFile file;
  file.source = o.input;
  if (auto builtin = builtin_dataset(o.input)) {
    file.data = std::move(*builtin);
  } else {
    std::ifstream in = open_input(o.input);
    file.data = read_data_text(in);
  }
  if (file.data.empty()) throw ValidationError("input '" + o.input + "' contains no data");

  ModelConfig& c = file.config;
  c.iterations = o.iters;
  c.burnin = o.burnin;
  c.thin = o.thin;
  c.seed = o.seed;
  c.fix_alpha = o.fix_alpha;
  c.fix_mu = o.fix_mu;
  c.fix_tau = o.fix_tau;
  c.remix = !o.no_remix;
  validate(c);

  file.draws = run_chain(file.data, c);
  Sink sink(o.out, out);
  write_draws(sink.stream(), file);
  sink.finish();
  return kExitOk;
}

// ---------------------------------------------------------------- complete

struct CompleteOptions {
  std::string input;
  std::string out;
  double eps = 0.01;
  double ups = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int cmd_complete(const CompleteOptions& o, std::ostream& out) {
  std::ifstream in = open_input(o.input);
  DrawsFile draws = read_draws(in);
  MixturesFile file;
  file.source = draws.source;
  file.data = draws.data;
  file.model = draws.config;
  file.completion = {o.eps, o.ups, o.seed};
  validate(file.completion);
  if (!draws.draws.empty()) {
    file.mixtures = complete_all(draws.draws, draws.config, file.completion, o.threads);
  }
  Sink sink(o.out, out);
  write_mixtures(sink.stream(), file);
  sink.finish();
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string input;
  std::string out;
  std::string what;
  std::string of = "cdf";
  std::optional<double> grid_lo, grid_hi;
  std::size_t grid_n = 1000;
  double level = 0.95;
  std::size_t resolution = 512;
};

std::vector<double> analysis_grid(const AnalyzeOptions& o, std::span<const double> data) {
  const auto fallback = default_grid(data, std::max<std::size_t>(o.grid_n, 2));
  return uniform_grid(o.grid_lo.value_or(fallback.front()), o.grid_hi.value_or(fallback.back()),
                      o.grid_n);
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  const AnalysisInput input = load_for_analysis(o.input);
  if (input.data.empty()) throw ValidationError("file carries no data");
  Sink sink(o.out, out);
  std::ostream& os = sink.stream();

  if (o.what == "density" || o.what == "cdf") {
    const auto grid = analysis_grid(o, input.data);
    os << "sample,x,value\n";
    for (std::size_t t = 0; t < input.mixtures.size(); ++t) {
      const auto fn = o.what == "density" ? eval_density(input.mixtures[t], grid)
                                          : eval_cdf(input.mixtures[t], grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        os << t << ',' << fmt17(grid[g]) << ',' << fmt17(fn.values[g]) << '\n';
      }
    }
  } else if (o.what == "modes") {
    const auto [lo, hi] = std::minmax_element(input.data.begin(), input.data.end());
    std::pair<double, double> range{o.grid_lo.value_or(*lo), o.grid_hi.value_or(*hi)};
    std::map<std::size_t, std::size_t> histogram;
    json counts = json::array(), locations = json::array(), components = json::array();
    for (const auto& m : input.mixtures) {
      const auto modes = count_modes(m, range, o.resolution);
      ++histogram[modes.size()];
      counts.push_back(modes.size());
      components.push_back(m.size());
      locations.push_back(modes);
    }
    json hist = json::object();
    for (auto [count, freq] : histogram) hist[std::to_string(count)] = freq;
    os << json{{"what", "modes"},
               {"range", {range.first, range.second}},
               {"resolution", o.resolution},
               {"histogram", hist},
               {"counts", counts},
               {"components", components},
               {"locations", locations}}
              .dump()
       << '\n';
  } else if (o.what == "moments") {
    json rows = json::array();
    const bool custom = o.grid_lo || o.grid_hi;
    for (std::size_t t = 0; t < input.mixtures.size(); ++t) {
      const auto& mix = input.mixtures[t];
      const auto grid = custom ? analysis_grid(o, input.data) : moment_grid(mix);
      const Moments mo = moments_trapezoid(eval_density(mix, grid));
      rows.push_back({{"sample", t},
                      {"mean", mo.mean},
                      {"variance", mo.variance},
                      {"mass", mo.mass},
                      {"low_mass", mo.low_mass}});
    }
    os << json{{"what", "moments"}, {"moments", rows}}.dump() << '\n';
  } else if (o.what == "bands") {
    if (o.of != "cdf" && o.of != "density") throw ValidationError("--of must be cdf or density");
    const auto grid = analysis_grid(o, input.data);
    std::vector<GridFunction> fns;
    fns.reserve(input.mixtures.size());
    for (const auto& m : input.mixtures) {
      fns.push_back(o.of == "cdf" ? eval_cdf(m, grid) : eval_density(m, grid));
    }
    const BandSet pw = bands(fns, o.level, BandKind::pointwise);
    const BandSet sim = bands(fns, o.level, BandKind::simultaneous);
    os << json{{"what", "bands"},
               {"of", o.of},
               {"level", o.level},
               {"grid", grid},
               {"mean", pointwise_mean(fns).values},
               {"pointwise", {{"lower", pw.lower}, {"upper", pw.upper}}},
               {"simultaneous", {{"lower", sim.lower}, {"upper", sim.upper}}}}
              .dump()
       << '\n';
  } else {
    throw ValidationError("unknown --what '" + o.what + "'");
  }
  sink.finish();
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::vector<std::size_t> n{100};
  std::size_t iters = 100;
  std::size_t reps = 10;
  double eps = 0.01;
  double ups = 0.01;
  std::uint64_t seed = 1;
  std::string out;
};

json summarize(std::vector<double> xs) {
  if (xs.empty()) return json::object();
  std::sort(xs.begin(), xs.end());
  double total = 0.0;
  for (double x : xs) total += x;
  const std::size_t mid = xs.size() / 2;
  const double median = xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
  return {{"mean", total / static_cast<double>(xs.size())},
          {"median", median},
          {"min", xs.front()},
          {"max", xs.back()}};
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  json fit = json::array(), completion = json::array();
  if (o.reps > 0 && o.iters > 0) {
    const auto galaxies = *builtin_dataset("galaxies");
    for (std::size_t n : o.n) {
      if (n == 0) throw ValidationError("--n entries must be positive");
      std::vector<double> sweep_ms, complete_ms;
      for (std::size_t r = 0; r < o.reps; ++r) {
        // Resample the galaxies velocities with a little jitter to size n.
        Rng rng = substream(o.seed, r);
        std::vector<double> data(n);
        for (auto& y : data) {
          y = galaxies[rng.next_u64() % galaxies.size()] + sample_normal(0.0, 0.25, rng);
        }
        ModelConfig c;
        c.iterations = o.iters;
        c.burnin = 0;
        c.thin = 1;
        c.seed = o.seed + r;
        auto start = std::chrono::steady_clock::now();
        const auto draws = run_chain(data, c);
        sweep_ms.push_back(elapsed_ms(start) / static_cast<double>(o.iters));

        start = std::chrono::steady_clock::now();
        const auto mixtures = complete_all(draws, c, {o.eps, o.ups, o.seed + r}, 1);
        complete_ms.push_back(elapsed_ms(start));
      }
      fit.push_back({{"n", n},
                     {"iters", o.iters},
                     {"reps", o.reps},
                     {"per_sweep_ms", summarize(sweep_ms)}});
      std::vector<double> per_draw_us;
      for (double ms : complete_ms) per_draw_us.push_back(1000.0 * ms / static_cast<double>(o.iters));
      completion.push_back({{"n", n},
                            {"draws", o.iters},
                            {"eps", o.eps},
                            {"ups", o.ups},
                            {"serial_total_ms", summarize(complete_ms)},
                            {"per_draw_us", summarize(per_draw_us)}});
    }
  }
  Sink sink(o.out, out);
  sink.stream() << json{{"fit", fit}, {"completion", completion}}.dump(2) << '\n';
  sink.finish();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polya completion for Dirichlet process normal mixtures", "polyamix"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run the marginal Gibbs sampler and write draws");
  fit_cmd->add_option("input", fit.input, "Data file (one value per line) or 'galaxies'")
      ->required();
  fit_cmd->add_option("--iters", fit.iters, "Retained draws")->capture_default_str();
  fit_cmd->add_option("--burnin", fit.burnin, "Discarded sweeps")->capture_default_str();
  fit_cmd->add_option("--thin", fit.thin, "Sweeps per retained draw")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--fix-alpha", fit.fix_alpha, "Hold alpha at this value");
  fit_cmd->add_option("--fix-mu", fit.fix_mu, "Hold mu at this value");
  fit_cmd->add_option("--fix-tau", fit.fix_tau, "Hold tau at this value");
  fit_cmd->add_flag("--no-remix", fit.no_remix, "Skip the per-sweep cluster redraw");
  fit_cmd->add_option("--out", fit.out, "Output file (default stdout)");

  CompleteOptions comp;
  auto* comp_cmd = app.add_subcommand("complete", "Complete each draw into a full mixture");
  comp_cmd->add_option("draws", comp.input, "Draws file written by fit")->required();
  comp_cmd->add_option("--eps", comp.eps, "Unassigned stick mass tolerance")->capture_default_str();
  comp_cmd->add_option("--ups", comp.ups, "Probability of missing --eps")->capture_default_str();
  comp_cmd->add_option("--seed", comp.seed, "Random seed")->capture_default_str();
  comp_cmd->add_option("--threads", comp.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  comp_cmd->add_option("--out", comp.out, "Output file (default stdout)");

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Summaries of a draws or mixtures file");
  an_cmd->add_option("file", an.input, "Draws or mixtures file")->required();
  an_cmd->add_option("--what", an.what, "density, cdf, modes, moments or bands")->required();
  an_cmd->add_option("--of", an.of, "Function used for bands: cdf or density")
      ->capture_default_str();
  an_cmd->add_option("--grid-lo", an.grid_lo, "Grid lower end");
  an_cmd->add_option("--grid-hi", an.grid_hi, "Grid upper end");
  an_cmd->add_option("--grid-n", an.grid_n, "Grid points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}))
      ->capture_default_str();
  an_cmd->add_option("--level", an.level, "Band level")->capture_default_str();
  an_cmd->add_option("--resolution", an.resolution, "Mode-search grid points")
      ->capture_default_str();
  an_cmd->add_option("--out", an.out, "Output file (default stdout)");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the sampler and the completion");
  bench_cmd->add_option("--n", bench.n, "Sample sizes")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "Sweeps per fit")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Repetitions")->capture_default_str();
  bench_cmd->add_option("--eps", bench.eps)->capture_default_str();
  bench_cmd->add_option("--ups", bench.ups)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Output file (default stdout)");

  std::vector<const char*> argv{"polyamix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "polyamix: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*comp_cmd) return cmd_complete(comp, out);
    if (*an_cmd) return cmd_analyze(an, out);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const ValidationError& e) {
    err << "polyamix: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "polyamix: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "polyamix: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "polyamix: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace polyamix::cli
