#pragma once

// CSV and JSON surfaces: raw `x,y` records, binned `t,N,Z` rows, fitted
// `t,F_hat` rows, quantile tables, interval results, scenario configs and
// coverage reports.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridcs/adaptive_ci.hpp"
#include "gridcs/error.hpp"
#include "gridcs/limits.hpp"
#include "gridcs/model.hpp"
#include "gridcs/sim_study.hpp"

namespace gridcs::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits: enough for an exact double round trip.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string &line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string &s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    fail(ErrorKind::data, "not a number: '" + s + "'");
  }
}

/// Reals given either as numbers or as "p/q" fraction strings.
inline double parse_fraction(const std::string &s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_double(s);
  const double den = parse_double(s.substr(slash + 1));
  if (den == 0.0) fail(ErrorKind::data, "zero denominator in '" + s + "'");
  return parse_double(s.substr(0, slash)) / den;
}

inline std::ifstream open_in(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, "cannot write " + path);
  return out;
}

/// Header line plus rows of cells; blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(std::istream &in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) fail(ErrorKind::data, "ragged CSV row: " + line);
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) fail(ErrorKind::data, "empty file");
  return t;
}

inline bool is_binned_header(const std::vector<std::string> &h) {
  return h.size() == 3 && h[0] == "t" && h[1] == "N" && h[2] == "Z";
}

inline ObservationSet observations_from_csv(const CsvTable &t) {
  if (t.header.size() != 2 || t.header[0] != "x" || t.header[1] != "y")
    fail(ErrorKind::data, "expected header x,y");
  ObservationSet obs;
  obs.reserve(t.rows.size());
  for (const auto &r : t.rows) {
    const double y = parse_double(r[1]);
    if (y != 0.0 && y != 1.0) fail(ErrorKind::data, "response must be 0 or 1");
    obs.push_back({parse_double(r[0]), static_cast<int>(y)});
  }
  if (obs.empty()) fail(ErrorKind::data, "no observations");
  return obs;
}

inline void write_observations(std::ostream &out, const ObservationSet &obs) {
  out << "x,y\n";
  for (const auto &o : obs) out << fmt(o.x) << ',' << o.y << '\n';
}

/// Binned rows `t,N,Z` listing consecutive grid points. The grid is
/// recovered as delta = t_2 - t_1, a = t_1 - delta and b = t_K unless the
/// caller supplies a grid.
inline BinnedCounts binned_from_csv(const CsvTable &t, const GridSpec *grid = nullptr) {
  if (!is_binned_header(t.header)) fail(ErrorKind::data, "expected header t,N,Z");
  if (t.rows.empty()) fail(ErrorKind::data, "no observations");
  std::vector<double> ts;
  std::vector<std::int64_t> N, Z;
  for (const auto &r : t.rows) {
    ts.push_back(parse_double(r[0]));
    N.push_back(static_cast<std::int64_t>(parse_double(r[1])));
    Z.push_back(static_cast<std::int64_t>(parse_double(r[2])));
  }
  GridSpec g;
  if (grid) {
    g = *grid;
  } else if (ts.size() == 1) {
    fail(ErrorKind::data, "a single binned row needs an explicit grid");
  } else {
    const double delta = ts[1] - ts[0];
    g = GridSpec::from_spacing(ts[0] - delta, ts.back(), delta);
  }
  BinnedCounts b{g, std::vector<std::int64_t>(g.size(), 0), std::vector<std::int64_t>(g.size(), 0)};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::size_t k = g.snap(ts[i]);
    if (k == GridSpec::npos) fail(ErrorKind::data, "off-grid observation");
    b.N[k] += N[i];
    b.Z[k] += Z[i];
  }
  b.validate();
  return b;
}

inline void write_binned(std::ostream &out, const BinnedCounts &b) {
  out << "t,N,Z\n";
  for (std::size_t i = 0; i < b.N.size(); ++i)
    out << fmt(b.grid.point(i)) << ',' << b.N[i] << ',' << b.Z[i] << '\n';
}

inline void write_step(std::ostream &out, const StepEstimate &est) {
  out << "t,F_hat\n";
  for (std::size_t i = 0; i < est.levels.size(); ++i)
    out << fmt(est.grid.point(i)) << ',' << fmt(est.levels[i]) << '\n';
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const GridSpec &g) {
  return Json{{"a", g.a()}, {"b", g.b()}, {"delta", g.delta()}, {"K", g.size()}};
}

inline GridSpec grid_from_json(const Json &j) {
  try {
    return GridSpec::from_spacing(j.at("a").get<double>(), j.at("b").get<double>(),
                                  j.at("delta").get<double>());
  } catch (const Json::exception &e) {
    fail(ErrorKind::data, std::string("bad grid description: ") + e.what());
  }
}

inline Json to_json(const SamplerConfig &c) {
  return Json{{"K_a", c.K_a}, {"B", c.B}, {"seed", c.seed}, {"fine_step", c.fine_step},
              {"fine_halfwidth", c.fine_halfwidth}};
}

inline Json to_json(const LimitParams &p) {
  return Json{{"c", p.c}, {"alpha", p.alpha}, {"beta", p.beta}};
}

inline Json to_json(const QuantileTable &t) {
  return Json{{"law", t.law},         {"params", to_json(t.params)}, {"config", to_json(t.config)},
              {"probs", t.probs},     {"quants", t.quants},          {"unstable", t.unstable}};
}

inline Json to_json(const NuisanceEstimates &e) {
  return Json{{"F_hat", e.F_hat},         {"g_hat", e.g_hat},
              {"f_hat", e.f_hat},         {"alpha_hat", e.alpha_hat},
              {"beta_hat", e.beta_hat},   {"j_star", e.j_star},
              {"i_star", e.i_star},       {"window_clamped", e.window_clamped},
              {"below_threshold", e.below_threshold}};
}

inline Json to_json(const CiResult &r) {
  return Json{{"mode", to_string(r.mode)}, {"estimate", r.estimate}, {"lower", r.lower},
              {"upper", r.upper},          {"length", r.length()},   {"eta", r.eta},
              {"n", r.n},                  {"c_hat", r.c_hat},       {"q_lo", r.q_lo},
              {"q_hi", r.q_hi},            {"clamped", r.clamped},   {"nuisance", to_json(r.nuisance)}};
}

inline Json to_json(const Distribution &d) {
  switch (d.kind) {
    case Distribution::Kind::uniform:
      return Json{{"family", "uniform"}, {"lower", d.p1}, {"upper", d.p2}};
    case Distribution::Kind::exponential: return Json{{"family", "exponential"}, {"rate", d.p1}};
    case Distribution::Kind::point: return Json{{"family", "point"}, {"at", d.p1}};
  }
  return {};
}

inline double number(const Json &j) {
  if (j.is_string()) return parse_fraction(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  fail(ErrorKind::data, "expected a number, got " + j.dump());
}

inline Distribution distribution_from_json(const Json &j) {
  const std::string fam = j.at("family").get<std::string>();
  Distribution d;
  if (fam == "uniform") {
    d = Distribution::uniform(j.contains("lower") ? number(j["lower"]) : 0.0,
                              j.contains("upper") ? number(j["upper"]) : 1.0);
  } else if (fam == "exponential") {
    d = Distribution::exponential(j.contains("rate") ? number(j["rate"]) : 1.0);
  } else if (fam == "point") {
    d = Distribution::point(number(j.at("at")));
  } else {
    fail(ErrorKind::data, "unknown distribution family '" + fam + "'");
  }
  d.validate();
  return d;
}

inline Json to_json(const ScenarioSpec &s) {
  Json j{{"name", s.name}, {"a", s.a},           {"b", s.b},         {"x0", s.x0},
         {"F", to_json(s.F)}, {"G", to_json(s.G)}, {"gamma", s.gamma0}, {"c", s.c0},
         {"n", s.n},         {"reps", s.reps},     {"eta", s.eta},     {"seed", s.seed},
         {"sampler", to_json(s.sampler)},          {"threshold_mult", s.nuisance.threshold_mult}};
  if (s.fixed_K) j["K"] = *s.fixed_K;
  return j;
}

/// Overlay the fields present in `j` onto `s`. Numeric fields accept "p/q".
inline void apply_scenario_fields(ScenarioSpec &s, const Json &j) {
  try {
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (j.contains("a")) s.a = number(j["a"]);
    if (j.contains("b")) s.b = number(j["b"]);
    if (j.contains("x0")) s.x0 = number(j["x0"]);
    if (j.contains("F")) s.F = distribution_from_json(j["F"]);
    if (j.contains("G")) s.G = distribution_from_json(j["G"]);
    if (j.contains("gamma")) s.gamma0 = number(j["gamma"]);
    if (j.contains("c")) s.c0 = number(j["c"]);
    if (j.contains("K")) s.fixed_K = static_cast<std::size_t>(number(j["K"]));
    if (j.contains("n")) s.n = static_cast<std::int64_t>(number(j["n"]));
    if (j.contains("reps")) s.reps = static_cast<std::int64_t>(number(j["reps"]));
    if (j.contains("eta")) s.eta = number(j["eta"]);
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threshold_mult")) s.nuisance.threshold_mult = number(j["threshold_mult"]);
    if (j.contains("anchor_free")) s.nuisance.anchor_free = j["anchor_free"].get<bool>();
    const Json &sj = j.contains("sampler") ? j["sampler"] : j;
    if (sj.contains("K_a")) s.sampler.K_a = static_cast<std::size_t>(number(sj["K_a"]));
    if (sj.contains("B")) s.sampler.B = static_cast<std::size_t>(number(sj["B"]));
    if (sj.contains("fine_step")) s.sampler.fine_step = number(sj["fine_step"]);
    if (sj.contains("fine_halfwidth")) s.sampler.fine_halfwidth = number(sj["fine_halfwidth"]);
  } catch (const Json::exception &e) {
    fail(ErrorKind::data, std::string("bad scenario field: ") + e.what());
  }
}

/// Scenario battery:
///
///   { "defaults": {...scenario fields...},
///     "scenarios": [ {...}, ... ],
///     "sweep": { "F": [...], "regimes": [[gamma, c], ...], "n": [...] } }
///
/// Explicit scenarios come first, then the sweep's cartesian product in
/// F-major, regime, n order. A scenario without its own seed gets a seed
/// derived from the base seed and its position.
inline std::vector<ScenarioSpec> scenarios_from_json(const Json &cfg, std::uint64_t base_seed) {
  ScenarioSpec defaults;
  if (cfg.contains("defaults")) apply_scenario_fields(defaults, cfg["defaults"]);
  const bool default_seeded = cfg.contains("defaults") && cfg["defaults"].contains("seed");
  std::vector<ScenarioSpec> out;
  std::vector<bool> seeded;
  if (cfg.contains("scenarios")) {
    for (const Json &j : cfg["scenarios"]) {
      ScenarioSpec s = defaults;
      apply_scenario_fields(s, j);
      out.push_back(s);
      seeded.push_back(j.contains("seed") || default_seeded);
    }
  }
  if (cfg.contains("sweep")) {
    const Json &sw = cfg["sweep"];
    const Json Fs = sw.contains("F") ? sw["F"] : Json::array({to_json(defaults.F)});
    const Json regimes = sw.contains("regimes") ? sw["regimes"]
                                                : Json::array({Json::array({defaults.gamma0, defaults.c0})});
    const Json ns = sw.contains("n") ? sw["n"] : Json::array({defaults.n});
    for (const Json &F : Fs)
      for (const Json &rg : regimes)
        for (const Json &n : ns) {
          ScenarioSpec s = defaults;
          s.F = distribution_from_json(F);
          s.gamma0 = number(rg.at(0));
          s.c0 = number(rg.at(1));
          s.n = static_cast<std::int64_t>(number(n));
          const std::string fam =
              s.F.kind == Distribution::Kind::exponential ? "exp" + fmt(s.F.p1) : s.F.name();
          s.name = fam + "_g" + rg.at(0).dump() + "_c" + rg.at(1).dump() + "_n" + n.dump();
          std::erase(s.name, '"');
          out.push_back(s);
          seeded.push_back(default_seeded);
        }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!seeded[i]) out[i].seed = substream_seed(base_seed, {i});
    out[i].validate();
  }
  return out;
}

inline std::vector<ScenarioSpec> read_scenarios(const std::string &path, std::uint64_t base_seed) {
  auto in = open_in(path);
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::exception &e) {
    fail(ErrorKind::data, std::string("cannot parse config: ") + e.what());
  }
  return scenarios_from_json(cfg, base_seed);
}

inline void write_report_header(std::ostream &out) {
  out << "scenario,F,gamma,c,n,K,c_hat,reps,failures,CR_P,CR_T,AL_P,AL_T,oracle,CR_O,AL_O\n";
}

inline std::string describe(const Distribution &d) {
  switch (d.kind) {
    case Distribution::Kind::uniform: return "U[" + fmt(d.p1) + ";" + fmt(d.p2) + "]";
    case Distribution::Kind::exponential: return "exp(" + fmt(d.p1) + ")";
    case Distribution::Kind::point: return "point(" + fmt(d.p1) + ")";
  }
  return "";
}

inline void write_report_row(std::ostream &out, const CoverageReport &r) {
  const ScenarioSpec &s = r.scenario;
  out << s.name << ',' << describe(s.F) << ',' << fmt(s.gamma0) << ',' << fmt(s.c0) << ','
      << s.n << ',' << r.K << ',' << fmt(r.c_hat) << ',' << s.reps << ',' << r.failures << ','
      << fmt(r.CR_P) << ',' << fmt(r.CR_T) << ',' << fmt(r.AL_P) << ',' << fmt(r.AL_T) << ','
      << r.oracle << ',' << fmt(r.CR_O) << ',' << fmt(r.AL_O) << '\n';
}

inline void write_per_rep(std::ostream &out, const CoverageReport &r, bool header) {
  if (header)
    out << "scenario,rep,estimate,truth,c_hat,alpha_hat,beta_hat,practical_ok,covered_P,length_P,"
           "covered_T,length_T,covered_O,length_O\n";
  for (std::size_t i = 0; i < r.per_rep.size(); ++i) {
    const RepOutcome &o = r.per_rep[i];
    out << r.scenario.name << ',' << i << ',' << fmt(o.estimate) << ',' << fmt(o.truth) << ','
        << fmt(o.c_hat) << ',' << fmt(o.alpha_hat) << ',' << fmt(o.beta_hat) << ','
        << o.practical_ok << ',' << o.covered_P << ',' << fmt(o.length_P) << ',' << o.covered_T
        << ',' << fmt(o.length_T) << ',' << o.covered_O << ',' << fmt(o.length_O) << '\n';
  }
}

}  // namespace gridcs::io
