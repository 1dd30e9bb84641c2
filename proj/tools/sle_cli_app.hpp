#pragma once
// Command-line front end.  Every subcommand writes its tables as CSV (or one
// results.json with --json) plus manifest.json into --out.  The manifest
// records the canonical argument list; `sle_cli --manifest FILE [--out DIR]`
// replays it.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sle/error.hpp"
#include "sle/estimators.hpp"
#include "sle/exponents.hpp"
#include "sle/fast_trace.hpp"
#include "sle/io.hpp"
#include "sle/martingales.hpp"

#ifndef SLE_VERSION
#define SLE_VERSION "dev"
#endif

namespace sle::cli {

enum ExitCode : int { kOk = 0, kDomain = 2, kSolver = 3, kUsage = 64, kIo = 74 };

struct Common {
  std::string out = "sle_out";
  bool json = false;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Binds options and remembers how to print each bound value, so the manifest
// can echo the resolved configuration as a canonical argument list.
class Registry {
 public:
  explicit Registry(CLI::App* app) : app_(app) {}

  void real(const std::string& name, double& v, const std::string& help) {
    app_->add_option("--" + name, v, help)->capture_default_str();
    echo_.emplace_back(name, [&v] { return format_double(v); });
  }
  template <class Int>
  void integer(const std::string& name, Int& v, const std::string& help) {
    app_->add_option("--" + name, v, help)->capture_default_str();
    echo_.emplace_back(name, [&v] { return std::to_string(v); });
  }
  void list(const std::string& name, std::vector<double>& v, const std::string& help) {
    app_->add_option("--" + name, v, help)->delimiter(',')->capture_default_str();
    echo_.emplace_back(name, [&v] {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
      return s;
    });
  }
  void flag(const std::string& name, bool& v, const std::string& help) {
    app_->add_flag("--" + name, v, help);
    echo_.emplace_back(name, [&v] { return std::string(v ? "true" : "false"); });
  }

  void common(Common& c) {
    app_->add_option("--out", c.out, "output directory")->capture_default_str();
    flag("json", c.json, "write one results.json instead of CSV files");
    integer("seed", c.seed, "master seed");
    integer("threads", c.threads, "replica threads (results do not depend on it)");
  }

  // Canonical argv: subcommand, then every option except --out.
  std::vector<std::string> canonical() const {
    std::vector<std::string> a{app_->get_name()};
    for (const auto& [name, show] : echo_) {
      const std::string v = show();
      if (v == "true") {
        a.push_back("--" + name);
      } else if (v != "false" && !v.empty()) {
        a.push_back("--" + name);
        a.push_back(v);
      }
    }
    return a;
  }

  nlohmann::ordered_json config() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, show] : echo_) j[name] = show();
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
};

struct Result {
  std::vector<Table> tables;
  std::string streams;  // how stream indices derive from the seed
};

// ---------------------------------------------------------------------------
// Subcommands.

inline Table fit_table(const SlopeFit& f, double target) {
  Table t{"fit", {"slope", "ci_halfwidth", "intercept", "target", "points", "warnings"}, {}};
  std::string w;
  for (const auto& s : f.warnings) w += (w.empty() ? "" : "; ") + s;
  t.add_row({f.slope, f.confidence_halfwidth, f.intercept, target, static_cast<std::int64_t>(f.points.size()), w});
  return t;
}

inline Result run_exponent_table() {
  Table t{"exponents", {"formula", "kappa", "kappa_prime", "rho", "rho2", "j", "value", "empty_set"}, {}};
  for (const auto& r : exponent_catalog())
    t.add_row({r.formula, r.kappa, r.kappa_prime, r.rho, r.rho2, r.j, r.value, static_cast<std::int64_t>(r.empty_set)});
  return {{t}, "none"};
}

struct TraceOpts {
  double kappa = 6, rho = 0, T = 1, max_spacing = 0;
  std::size_t steps = 1000, stride = 1;
};

inline Result run_trace(const TraceOpts& o, const Common& c) {
  require(o.kappa > 0, "trace: kappa must be positive");
  require(o.steps > 0, "trace: steps must be positive");
  require(o.T > 0, "trace: T must be positive");
  require(o.stride >= 1, "trace: stride must be positive");
  require(o.max_spacing >= 0, "trace: max-spacing must be nonnegative");
  const double dt = o.T / static_cast<double>(o.steps);
  if (o.max_spacing > 0) {
    require(o.rho == 0, "trace: refinement (--max-spacing) supports rho = 0 only");
    const auto rt = refined_brownian_trace(o.kappa, o.T, dt, o.max_spacing, {c.seed, 0});
    Table d{"driving", {"t", "w", "dt"}, {}};
    for (std::size_t k = 0; k < rt.w.size(); ++k) d.add_row({rt.trace.times[k], rt.w[k], rt.dt[k]});
    return {{d, trace_table(rt.trace)}, "stream 0: coarse driving; block offset 2^40: bridge midpoints"};
  }
  SleParams p;
  p.kappa = o.kappa;
  if (o.rho != 0) p.right.push_back({0.0, o.rho, true});
  const auto d = sample_chordal_driving(p, o.T, dt, {c.seed, 0});
  return {{driving_table(d), trace_table(compute_trace(d, o.stride))}, "stream 0: driving"};
}

struct HitOpts {
  HitExperimentConfig cfg;
};

inline Result run_hit_exponent(HitExperimentConfig cfg, const Common& c) {
  cfg.rng = {c.seed, 0};
  cfg.threads = c.threads;
  cfg.validate();
  const auto est = estimate_hitting_probabilities(cfg);
  Table res{"results", {"eps", "p", "std_error", "n"}, {}};
  for (std::size_t i = 0; i < est.size(); ++i)
    res.add_row({cfg.epsilons[i], est[i].value, est[i].std_error, static_cast<std::int64_t>(est[i].n)});
  const auto fit = fit_exponent(zip_eps(cfg.epsilons, est));
  return {{res, fit_table(fit, one_point_alpha(cfg.kappa, cfg.rho1, cfg.rho2).value)},
          "stream i: path i (shared by all eps)"};
}

inline Result run_dim_boundary(BoundaryDimensionConfig cfg, const Common& c) {
  cfg.rng = {c.seed, 0};
  cfg.threads = c.threads;
  const auto r = boundary_dimension_experiment(cfg);
  Table res{"results", {"eps", "mean_count", "std_error", "grid_size"}, {}};
  for (std::size_t i = 0; i < r.counts.size(); ++i)
    res.add_row({cfg.epsilons[i], r.counts[i].value, r.counts[i].std_error, static_cast<std::int64_t>(r.grid_size[i])});
  return {{res, fit_table(r.fit, r.target)}, "stream i: path i (shared by all eps)"};
}

inline Result run_dim_self(SelfIntersectionConfig cfg, SelfIntersectionKind kind, const Common& c) {
  cfg.rng = {c.seed, 0};
  cfg.threads = c.threads;
  const auto r = self_intersection_experiment(cfg);
  const bool dbl = kind == SelfIntersectionKind::double_points;
  const auto& counts = dbl ? r.double_counts : r.cut_counts;
  Table res{"results", {"eps", "mean_cells", "std_error", "mean_trace_points"}, {}};
  for (std::size_t i = 0; i < counts.size(); ++i)
    res.add_row({cfg.epsilons[i], counts[i].value, counts[i].std_error, r.mean_trace_points[i]});
  return {{res, fit_table(dbl ? r.double_fit : r.cut_fit, dbl ? r.double_target : r.cut_target)},
          "stream (e << 32) + i: trace i of eps index e"};
}

struct MgOpts {
  std::size_t samples = 10000;
  int only_case = -1;
};

inline Result run_validate_mg(const MgOpts& o, const Common& c) {
  const auto cases = standard_drift_cases();
  require(o.only_case < static_cast<int>(cases.size()), "validate-mg: --case out of range");
  Table res{"results",
            {"case", "label", "martingale", "m0", "mean", "std_error", "z_score", "pass", "stop_radius", "stop_time_cap",
             "stop_threshold", "stop_collision"},
            {}};
  std::int64_t passed = 0, total = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    if (o.only_case >= 0 && static_cast<std::size_t>(o.only_case) != k) continue;
    const auto rep = drift_check(cases[k], o.samples, {c.seed, k << 32}, c.threads);
    res.add_row({static_cast<std::int64_t>(k), rep.config.label, to_string(rep.config.id), rep.m0, rep.mean.value,
                 rep.mean.std_error, rep.z_score, static_cast<std::int64_t>(rep.pass),
                 static_cast<std::int64_t>(rep.stops[0]), static_cast<std::int64_t>(rep.stops[1]),
                 static_cast<std::int64_t>(rep.stops[2]), static_cast<std::int64_t>(rep.stops[3])});
    passed += rep.pass;
    ++total;
  }
  Table sum{"summary", {"passed", "cases"}, {}};
  sum.add_row({passed, total});
  return {{res, sum}, "stream (case << 32) + i: path i of a case"};
}

inline Result run_angle_law(AngleLawConfig cfg, const Common& c) {
  cfg.rng = {c.seed, 0};
  const auto r = angle_law_check(cfg);
  Table res{"results", {"bin", "lo", "hi", "observed", "expected"}, {}};
  for (std::size_t b = 0; b < r.observed.size(); ++b)
    res.add_row({static_cast<std::int64_t>(b), r.edges[b], r.edges[b + 1], r.observed[b], r.expected[b]});
  Table fit{"fit", {"chi2", "dof", "p_value", "samples", "density_power"}, {}};
  fit.add_row({r.chi2.statistic, static_cast<std::int64_t>(r.chi2.dof), r.chi2.p_value,
               static_cast<std::int64_t>(r.samples), r.density_power});
  return {{res, fit}, "stream 0: the single long path"};
}

struct BeurlingOpts {
  BeurlingConfig cfg;
  std::size_t koebe_pairs = 100;
  double koebe_kappa = 3;
};

inline Result run_beurling(BeurlingOpts o, const Common& c) {
  o.cfg.rng = {c.seed, 0};
  o.cfg.threads = c.threads;
  const auto r = beurling_experiment(o.cfg);
  Table res{"results", {"r", "p_avoid", "std_error", "oracle"}, {}};
  for (std::size_t i = 0; i < r.avoid.size(); ++i)
    res.add_row({o.cfg.radii[i], r.avoid[i].value, r.avoid[i].std_error, r.oracle[i]});
  std::vector<Table> tables{res, fit_table(r.fit, 0.5)};
  if (o.koebe_pairs > 0) {
    Table k{"koebe", {"re", "im", "dist", "two_upsilon", "slack", "ok"}, {}};
    for (const auto& p : koebe_bracket_check({o.koebe_kappa, o.koebe_pairs, 1.0, 1e-4, {c.seed, 1ull << 48}}))
      k.add_row({p.z.real(), p.z.imag(), p.dist, 2 * p.upsilon, p.slack, static_cast<std::int64_t>(p.ok)});
    tables.push_back(k);
  }
  return {tables, "stream (i << 32) + walker: radius index i; koebe pairs from stream 2^48 + j"};
}

// ---------------------------------------------------------------------------
// Output.

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::ordered_json table_json(const Table& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j)
      std::visit([&](const auto& v) { r[t.columns[j]] = v; }, row[j]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<std::string> write_outputs(const std::filesystem::path& dir, const Result& r, bool json) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  if (json) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& t : r.tables) doc[t.name] = table_json(t);
    std::ofstream f(dir / "results.json");
    if (!f) throw std::runtime_error("cannot write " + (dir / "results.json").string());
    f << doc.dump(2) << '\n';
    files.push_back("results.json");
  } else {
    for (const auto& t : r.tables) {
      write_csv((dir / (t.name + ".csv")).string(), t);
      files.push_back(t.name + ".csv");
    }
  }
  return files;
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

inline int rerun_manifest(const std::string& path, const std::string& out_override, std::ostream& out,
                          std::ostream& err) {
  std::ifstream f(path);
  if (!f) {
    err << "cannot read manifest " << path << '\n';
    return kUsage;
  }
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    err << "bad manifest: " << e.what() << '\n';
    return kUsage;
  }
  if (!m.contains("argv") || !m["argv"].is_array()) {
    err << "bad manifest: missing argv\n";
    return kUsage;
  }
  std::vector<std::string> args = m["argv"].get<std::vector<std::string>>();
  args.push_back("--out");
  args.push_back(out_override.empty() ? m.value("out", std::string("sle_out")) : out_override);
  return run(args, out, err);
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and verification toolkit for SLE", "sle_cli"};
  app.set_version_flag("--version", SLE_VERSION);
  app.require_subcommand(0, 1);
  std::string manifest, rerun_out;
  app.add_option("--manifest", manifest, "re-run the command recorded in a manifest.json");
  app.add_option("--out", rerun_out, "output directory for --manifest (default: the recorded one)");

  Common common;
  std::vector<std::pair<CLI::App*, std::unique_ptr<Registry>>> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> Registry& {
    CLI::App* s = app.add_subcommand(name, help);
    subs.emplace_back(s, std::make_unique<Registry>(s));
    subs.back().second->common(common);
    return *subs.back().second;
  };

  sub("exponent-table", "closed-form exponents and dimensions");

  TraceOpts trace;
  {
    auto& r = sub("trace", "sample a chordal SLE_kappa(rho) driving path and its trace");
    r.real("kappa", trace.kappa, "kappa");
    r.real("rho", trace.rho, "weight of a force point at 0^+ (0: none)");
    r.real("T", trace.T, "capacity time horizon");
    r.integer("steps", trace.steps, "driving steps on [0, T]");
    r.integer("stride", trace.stride, "keep every stride-th tip");
    r.real("max-spacing", trace.max_spacing, "bisect steps until tips are this close (0: off)");
  }

  HitExperimentConfig hit;
  {
    auto& r = sub("hit-exponent", "P[hit B(target, eps)] over an eps ladder and its log-log slope");
    r.real("kappa", hit.kappa, "kappa");
    r.real("rho1", hit.rho1, "weight at x_R");
    r.real("rho2", hit.rho2, "weight at the target");
    r.real("x-r", hit.x_R, "x_R (0: 0^+)");
    r.real("target", hit.target, "target point");
    r.list("eps", hit.epsilons, "decreasing eps ladder");
    r.integer("samples", hit.samples_per_eps, "paths (shared by all eps)");
    r.real("delta", hit.delta, "entry height fraction in [0,1)");
    r.real("r", hit.radius_r, "exit radius");
    r.real("dt", hit.dt, "largest step");
    r.real("step-fraction", hit.step_fraction, "steps resolve this fraction of the smallest gap");
  }

  BoundaryDimensionConfig bd;
  {
    auto& r = sub("dim-boundary", "box slope of SLE_kappa(rho) intersected with [x0, x1]");
    r.real("kappa", bd.kappa, "kappa");
    r.real("rho", bd.rho, "weight at 0^+");
    r.list("eps", bd.epsilons, "decreasing eps ladder");
    r.integer("samples", bd.samples, "paths");
    r.real("x0", bd.x0, "window start");
    r.real("x1", bd.x1, "window end");
    r.real("dt", bd.dt, "largest step");
    r.real("step-fraction", bd.step_fraction, "steps resolve this fraction of the smallest gap");
    r.real("retire-gap", bd.retire_gap, "drop a point once g(x) - W < retire-gap * x");
  }

  SelfIntersectionConfig sd, sc;
  auto self_opts = [&](Registry& r, SelfIntersectionConfig& cfg) {
    r.real("kappa", cfg.kappa_prime, "kappa' in (4,8)");
    r.list("eps", cfg.epsilons, "decreasing eps ladder");
    r.integer("samples", cfg.samples, "traces per eps");
    r.integer("steps", cfg.steps, "base driving steps before refinement");
    r.real("T", cfg.T, "capacity time horizon");
    r.real("resolution-ratio", cfg.resolution_ratio, "tip spacing is eps / ratio");
    r.real("excursion", cfg.excursion, "double cells need an excursion reaching this distance");
    r.integer("cut-radius", cfg.cut_radius, "block radius (cells) for the spans that exclude cut cells");
    r.integer("gap", cfg.gap, "minimum index gap between visits");
    r.real("x0", cfg.window.x0, "window");
    r.real("x1", cfg.window.x1, "window");
    r.real("y0", cfg.window.y0, "window");
    r.real("y1", cfg.window.y1, "window");
  };
  self_opts(sub("dim-double", "box slope of double-point cells"), sd);
  self_opts(sub("dim-cut", "box slope of cut-point cells"), sc);

  MgOpts mgo;
  {
    auto& r = sub("validate-mg", "optional-stopping drift checks of the local martingales");
    r.integer("samples", mgo.samples, "paths per case");
    r.integer("case", mgo.only_case, "run only this case index (-1: all 12)");
  }

  AngleLawConfig angle;
  {
    auto& r = sub("angle-law", "stationary law of the angle diffusion vs sin^(2a)");
    r.real("kappa", angle.kappa, "kappa");
    r.real("r", angle.r, "tilt exponent r < 1/2 - 4/kappa");
    r.real("theta0", angle.theta0, "initial angle");
    r.real("dt", angle.dt, "time step");
    r.integer("steps", angle.steps, "steps after burn-in");
    r.integer("burn-in", angle.burn_in, "discarded steps");
    r.integer("thin", angle.thin, "keep every thin-th step");
    r.integer("bins", angle.bins, "histogram bins");
  }

  BeurlingOpts beur;
  {
    auto& r = sub("beurling", "Brownian avoidance of the straight slit and the Koebe bracket");
    r.list("radii", beur.cfg.radii, "starting distances |z| (z = -|z|)");
    r.integer("samples", beur.cfg.samples, "walkers per radius");
    r.real("step", beur.cfg.step, "hit/exit tolerance of the walk");
    r.integer("koebe-pairs", beur.koebe_pairs, "random (path, point) pairs for the Koebe bracket (0: skip)");
    r.real("koebe-kappa", beur.koebe_kappa, "kappa <= 4 for the Koebe pairs");
  }

  std::vector<char*> argv;
  std::string prog = "sle_cli";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* chosen = nullptr;
  Registry* reg = nullptr;
  for (auto& [s, r] : subs)
    if (s->parsed()) {
      chosen = s;
      reg = r.get();
    }
  if (!chosen) {
    if (!manifest.empty()) return rerun_manifest(manifest, rerun_out, out, err);
    err << app.help();
    return kUsage;
  }
  if (!manifest.empty()) {
    err << "--manifest cannot be combined with a subcommand\n";
    return kUsage;
  }

  const std::string name = chosen->get_name();
  const std::string started = utc_now();
  try {
    Result res;
    if (name == "exponent-table") res = run_exponent_table();
    else if (name == "trace") res = run_trace(trace, common);
    else if (name == "hit-exponent") res = run_hit_exponent(hit, common);
    else if (name == "dim-boundary") res = run_dim_boundary(bd, common);
    else if (name == "dim-double") res = run_dim_self(sd, SelfIntersectionKind::double_points, common);
    else if (name == "dim-cut") res = run_dim_self(sc, SelfIntersectionKind::cut_points, common);
    else if (name == "validate-mg") res = run_validate_mg(mgo, common);
    else if (name == "angle-law") res = run_angle_law(angle, common);
    else res = run_beurling(beur, common);

    const std::filesystem::path dir(common.out);
    const auto files = write_outputs(dir, res, common.json);
    nlohmann::ordered_json m;
    m["tool"] = "sle_cli";
    m["version"] = SLE_VERSION;
    m["command"] = name;
    m["argv"] = reg->canonical();
    m["config"] = reg->config();
    m["out"] = common.out;
    m["seed"] = common.seed;
    m["streams"] = res.streams;
    m["outputs"] = files;
    m["started"] = started;
    m["finished"] = utc_now();
    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest in " + common.out);
    mf << m.dump(2) << '\n';
    out << name << ": wrote";
    for (const auto& f : files) out << ' ' << (dir / f).string();
    out << '\n';
    return kOk;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace sle::cli
