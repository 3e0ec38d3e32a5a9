// gridcs: command-line front end for grid current status inference.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridcs/adaptive_ci.hpp"
#include "gridcs/io.hpp"
#include "gridcs/limits.hpp"
#include "gridcs/model.hpp"
#include "gridcs/nuisance.hpp"
#include "gridcs/sim_study.hpp"

namespace {

using namespace gridcs;
using io::Json;

constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numerical = 3;

std::vector<double> parse_list(const std::string &s) {
  std::vector<double> out;
  for (const auto &cell : io::split(s)) out.push_back(io::parse_fraction(cell));
  if (out.empty()) fail(ErrorKind::invalid_argument, "empty list");
  return out;
}

// Either write to the named file or to stdout.
class Output {
 public:
  explicit Output(const std::string &path) {
    if (!path.empty() && path != "-") file_ = io::open_out(path);
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

 private:
  std::optional<std::ofstream> file_;
};

struct GridFlags {
  std::string sidecar;
  std::optional<double> a, b, delta;

  void add(CLI::App *cmd) {
    cmd->add_option("--grid", sidecar, "JSON sidecar carrying the grid (default: <input>.json)");
    cmd->add_option("--a", a, "grid left endpoint");
    cmd->add_option("--b", b, "grid right endpoint");
    cmd->add_option("--delta", delta, "grid spacing");
  }

  std::optional<GridSpec> resolve(const std::string &input) const {
    if (a || b || delta) {
      if (!(a && b && delta))
        fail(ErrorKind::invalid_argument, "--a, --b and --delta must be given together");
      return GridSpec::from_spacing(*a, *b, *delta);
    }
    std::string path = sidecar;
    if (path.empty() && std::filesystem::exists(input + ".json")) path = input + ".json";
    if (path.empty()) return std::nullopt;
    auto in = io::open_in(path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception &e) {
      fail(ErrorKind::data, std::string("cannot parse grid sidecar: ") + e.what());
    }
    return io::grid_from_json(j.contains("grid") ? j["grid"] : j);
  }
};

BinnedCounts load_binned(const std::string &input, const GridFlags &gf) {
  auto in = io::open_in(input);
  const io::CsvTable table = io::read_csv(in);
  const auto grid = gf.resolve(input);
  if (io::is_binned_header(table.header)) return io::binned_from_csv(table, grid ? &*grid : nullptr);
  if (!grid) fail(ErrorKind::invalid_argument, "raw x,y data needs a grid (--grid or --a/--b/--delta)");
  return bin(io::observations_from_csv(table), *grid);
}

struct SimulateCmd {
  std::string dist = "unif";
  double lower = 0.0, upper = 1.0, rate = 1.0;
  double a = 0.0, b = 1.0, x0 = 0.5;
  std::string gamma, c;
  std::int64_t n = 0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> K;
  std::string out;

  void add(CLI::App &app) {
    auto *cmd = app.add_subcommand("simulate", "generate a grid current status dataset");
    cmd->add_option("--dist", dist, "event time law: unif | exp")->check(CLI::IsMember({"unif", "exp"}));
    cmd->add_option("--lower", lower, "uniform lower end");
    cmd->add_option("--upper", upper, "uniform upper end");
    cmd->add_option("--rate", rate, "exponential rate");
    cmd->add_option("--a", a, "interval left end");
    cmd->add_option("--b", b, "interval right end");
    cmd->add_option("--x0", x0, "anchor point recorded in the sidecar");
    cmd->add_option("--gamma", gamma, "grid exponent, number or p/q")->required();
    cmd->add_option("--c", c, "grid scale, number or p/q")->required();
    cmd->add_option("--K", K, "fixed number of grid points (overrides gamma/c spacing)");
    cmd->add_option("--n", n, "sample size")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("-o,--output", out, "output CSV (sidecar written to <output>.json)")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    ScenarioSpec s;
    s.name = "simulate";
    s.a = a;
    s.b = b;
    s.x0 = x0;
    s.F = dist == "exp" ? Distribution::exponential(rate) : Distribution::uniform(lower, upper);
    s.G = Distribution::uniform(a, b);
    s.gamma0 = io::parse_fraction(gamma);
    s.c0 = io::parse_fraction(c);
    s.fixed_K = K;
    s.n = n;
    s.reps = 1;
    s.seed = seed;
    s.validate();
    const GridSpec grid = build_grid(s);
    RandomStream rng(seed, {stream_tag::dataset, 0});
    const auto p = discretize_G(grid, s.G);
    const ObservationSet obs = generate_dataset(s, grid, p, rng);
    {
      auto f = io::open_out(out);
      io::write_observations(f, obs);
    }
    Json side{{"scenario", io::to_json(s)}, {"grid", io::to_json(grid)}};
    auto f = io::open_out(out + ".json");
    f << side.dump(2) << '\n';
  }
};

struct FitCmd {
  std::string input, out;
  bool check_gcm = false;
  GridFlags grid;

  void add(CLI::App &app) {
    auto *cmd = app.add_subcommand("fit", "fit the NPMLE on grid data");
    cmd->add_option("-i,--input", input, "x,y or t,N,Z CSV")->required();
    cmd->add_option("-o,--output", out, "output t,F_hat CSV (default stdout)");
    cmd->add_flag("--check-gcm", check_gcm, "cross-check against the minorant characterization");
    grid.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    const BinnedCounts binned = load_binned(input, grid);
    const StepEstimate est = npmle(binned);
    if (check_gcm) {
      const StepEstimate alt = npmle_via_gcm(binned);
      for (std::size_t i = 0; i < est.levels.size(); ++i)
        if (std::abs(est.levels[i] - alt.levels[i]) > 1e-12)
          fail(ErrorKind::numerical, "minorant cross-check failed at t = " +
                                         io::fmt(binned.grid.point(i)));
      std::cerr << "gcm cross-check passed on " << est.levels.size() << " grid points\n";
    }
    if (est.empty_bins > 0) std::cerr << "warning: " << est.empty_bins << " empty grid points\n";
    Output o(out);
    io::write_step(o.stream(), est);
  }
};

struct CiCmd {
  std::string input, out, mode = "adaptive";
  std::optional<double> x0, t;
  double eta = 0.05, threshold_mult = 1.0;
  std::size_t K_a = 300, B = 3000;
  std::uint64_t seed = 1;
  std::optional<double> alpha, beta, gamma0, c0;
  GridFlags grid;

  void add(CLI::App &app, unsigned &threads) {
    auto *cmd = app.add_subcommand("ci", "confidence interval for F at a grid point");
    cmd->add_option("-i,--input", input, "x,y or t,N,Z CSV")->required();
    cmd->add_option("-o,--output", out, "output JSON (default stdout)");
    cmd->add_option("--x0", x0, "anchor point; t_l is the largest grid point <= x0");
    cmd->add_option("--t", t, "grid point of interest (anchor-free mode)");
    cmd->add_option("--eta", eta, "total miscoverage")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--Ka", K_a, "truncation half-width");
    cmd->add_option("--B", B, "Monte Carlo draws");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threshold-mult", threshold_mult, "multiple of 1/log n for the j* window");
    cmd->add_option("--mode", mode, "adaptive | oracle-gaussian | oracle-chernoff")
        ->check(CLI::IsMember({"adaptive", "oracle-gaussian", "oracle-chernoff"}));
    cmd->add_option("--alpha", alpha, "oracle: true alpha (default: estimated)");
    cmd->add_option("--beta", beta, "oracle: true beta (default: estimated)");
    cmd->add_option("--gamma0", gamma0, "oracle-gaussian: true grid exponent");
    cmd->add_option("--c0", c0, "oracle-gaussian: true grid scale");
    cmd->add_option("--threads", threads, "Monte Carlo workers");
    grid.add(cmd);
    cmd->callback([this, &threads] { run(threads); });
  }

  void run(unsigned threads) const {
    if (x0 && t) fail(ErrorKind::invalid_argument, "give either --x0 or --t, not both");
    if (!x0 && !t) fail(ErrorKind::invalid_argument, "one of --x0 or --t is required");
    const BinnedCounts binned = load_binned(input, grid);
    const GridSpec &g = binned.grid;
    const StepEstimate est = npmle(binned);
    NuisanceOptions nopts;
    nopts.threshold_mult = threshold_mult;
    Anchor anchor;
    if (x0) {
      anchor = locate_anchor(g, *x0);
    } else {
      const std::size_t l = g.snap(*t);
      if (l == GridSpec::npos) fail(ErrorKind::invalid_argument, "--t is not a grid point");
      anchor = anchor_at_index(g, l);
      nopts.anchor_free = true;
    }
    const std::int64_t n = binned.total();
    SamplerConfig cfg;
    cfg.K_a = K_a;
    cfg.B = B;
    cfg.seed = seed;
    cfg.threads = threads;
    if (B < 100) std::cerr << "warning: unstable quantiles (B < 100)\n";

    const NuisanceEstimates nuis = estimate_nuisance(est, binned, anchor, nopts);
    const double c_hat = compute_c_hat(g.a(), g.b(), static_cast<std::int64_t>(g.size()), n);
    const double a_true = alpha.value_or(nuis.alpha_hat);
    const double b_true = beta.value_or(nuis.beta_hat);
    const double F_tl = est.levels[anchor.l];

    CiResult r;
    if (mode == "adaptive") {
      CiRequest req;
      req.eta = eta;
      req.sampler = cfg;
      r = adaptive_interval(est, nuis, anchor, n, c_hat, req);
    } else if (mode == "oracle-gaussian") {
      if (!gamma0 || !c0) fail(ErrorKind::invalid_argument, "oracle-gaussian needs --gamma0 and --c0");
      r = oracle_interval_gaussian(F_tl, a_true, *c0, *gamma0, n, eta);
    } else {
      r = oracle_interval_chernoff(F_tl, a_true, b_true, n, eta, cfg);
    }
    r.c_hat = c_hat;
    r.nuisance = nuis;
    Json j = io::to_json(r);
    j["t_l"] = g.point(anchor.l);
    j["grid"] = io::to_json(g);
    Output o(out);
    o.stream() << j.dump(2) << '\n';
  }
};

struct CoverageCmd {
  std::string config, out, per_rep;
  std::uint64_t seed = 1;

  void add(CLI::App &app, unsigned &threads) {
    auto *cmd = app.add_subcommand("coverage", "run a scenario battery");
    cmd->add_option("config", config, "scenario battery (JSON)")->required();
    cmd->add_option("-o,--output", out, "report CSV (default stdout)");
    cmd->add_option("--per-rep", per_rep, "optional per-replication CSV");
    cmd->add_option("--seed", seed, "base seed for scenarios without their own");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->callback([this, &threads] { run(threads); });
  }

  void run(unsigned threads) const {
    auto scenarios = io::read_scenarios(config, seed);
    Output o(out);
    io::write_report_header(o.stream());
    std::optional<std::ofstream> detail;
    if (!per_rep.empty()) detail = io::open_out(per_rep);
    std::size_t idx = 0;
    for (ScenarioSpec &s : scenarios) {
      s.threads = threads;
      s.keep_per_rep = detail.has_value();
      std::cerr << "[" << ++idx << "/" << scenarios.size() << "] " << s.name << '\n';
      try {
        const CoverageReport r = run_coverage(s);
        io::write_report_row(o.stream(), r);
        if (detail) io::write_per_rep(*detail, r, idx == 1);
      } catch (const Error &e) {
        std::cerr << "  scenario failed: " << e.what() << '\n';
        o.stream() << s.name << ",,,,,,,,,,,,,error,,\n";
      }
      o.stream().flush();
    }
  }
};

struct QuantilesCmd {
  double c = 1.0, alpha = 1.0, beta = 1.0;
  std::string probs = "0.025,0.975", law = "boundary", out;
  std::size_t K_a = 300, B = 3000;
  std::uint64_t seed = 1;

  void add(CLI::App &app, unsigned &threads) {
    auto *cmd = app.add_subcommand("quantiles", "Monte Carlo quantile table of a limit law");
    cmd->add_option("--c", c, "grid scale")->required();
    cmd->add_option("--alpha", alpha, "alpha")->required();
    cmd->add_option("--beta", beta, "beta")->required();
    cmd->add_option("--probs", probs, "comma-separated probabilities");
    cmd->add_option("--law", law, "boundary | chernoff")->check(CLI::IsMember({"boundary", "chernoff"}));
    cmd->add_option("--Ka", K_a, "truncation half-width");
    cmd->add_option("--B", B, "Monte Carlo draws");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("-o,--output", out, "output JSON (default stdout)");
    cmd->callback([this, &threads] { run(threads); });
  }

  void run(unsigned threads) const {
    const LimitParams params{c, alpha, beta};
    params.validate();
    SamplerConfig cfg;
    cfg.K_a = K_a;
    cfg.B = B;
    cfg.seed = seed;
    cfg.threads = threads;
    if (B < 100) std::cerr << "warning: unstable quantiles (B < 100)\n";
    const auto p = parse_list(probs);
    const QuantileTable t = law == "boundary" ? quantiles_boundary(params, p, cfg)
                                              : quantiles_chernoff(alpha, beta, p, cfg);
    Output o(out);
    o.stream() << io::to_json(t).dump(2) << '\n';
  }
};

struct EcdfCmd {
  double alpha = 1.0, beta = 1.0;
  std::string c_list = "1,2,3,5,10", out;
  std::size_t K_a = 300, B = 5000;
  std::uint64_t seed = 1;

  void add(CLI::App &app, unsigned &threads) {
    auto *cmd = app.add_subcommand("ecdf", "KS distances of S_c to its Gaussian and Chernoff limits");
    cmd->add_option("--alpha", alpha, "alpha")->required();
    cmd->add_option("--beta", beta, "beta")->required();
    cmd->add_option("--c-list", c_list, "comma-separated grid scales");
    cmd->add_option("--Ka", K_a, "truncation half-width");
    cmd->add_option("--B", B, "draws per law");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("-o,--output", out, "output CSV (default stdout)");
    cmd->callback([this, &threads] { run(threads); });
  }

  void run(unsigned threads) const {
    LimitParams{1.0, alpha, beta}.validate();
    SamplerConfig cfg;
    cfg.K_a = K_a;
    cfg.B = B;
    cfg.seed = seed;
    cfg.threads = threads;
    const auto cs = parse_list(c_list);
    const auto rows = ecdf_compare(alpha, beta, cs, cfg);
    Output o(out);
    o.stream() << "c,ks_gaussian,ks_chernoff\n";
    for (const auto &r : rows)
      o.stream() << io::fmt(r.c) << ',' << io::fmt(r.ks_gaussian) << ',' << io::fmt(r.ks_chernoff) << '\n';
  }
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Inference for current status data observed on a grid"};
  app.require_subcommand(1);
  unsigned threads = gridcs::default_threads();

  SimulateCmd simulate;
  FitCmd fit;
  CiCmd ci;
  CoverageCmd coverage;
  QuantilesCmd quantiles;
  EcdfCmd ecdf;
  simulate.add(app);
  fit.add(app);
  ci.add(app, threads);
  coverage.add(app, threads);
  quantiles.add(app, threads);
  ecdf.add(app, threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  } catch (const gridcs::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case gridcs::ErrorKind::invalid_argument: return exit_usage;
      case gridcs::ErrorKind::data: return exit_data;
      case gridcs::ErrorKind::numerical: return exit_numerical;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_data;
  }
  return 0;
}
