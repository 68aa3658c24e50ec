// quadforge: configuration-driven front end producing reproducible JSON/CSV
// experiment artifacts for the free-boundary / quadrature-domain pipelines.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadforge/bessel.hpp"
#include "quadforge/field.hpp"
#include "quadforge/io.hpp"
#include "quadforge/minimize.hpp"
#include "quadforge/quadrature.hpp"
#include "quadforge/radial.hpp"
#include "quadforge/scattering.hpp"
#include "quadforge/version.hpp"

using nlohmann::json;
using namespace quadforge;

namespace {

// Rejects unknown keys so configs stay canonical reproducibility artifacts.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) {
    throw ValidationError("config: " + where + " must be an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

double need_num(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ValidationError("config: " + where + " requires numeric '" + key + "'");
  }
  return obj[key].get<double>();
}

double opt_num(const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

std::function<double(double)> profile_from_config(const json& g, double r1) {
  check_keys(g, {"kind", "value"}, "g");
  const std::string kind = g.value("kind", "zero");
  if (kind == "zero") return nullptr;
  if (kind == "step") {
    const double value = need_num(g, "value", "g");
    return [r1, value](double r) { return r > r1 ? value : 0.0; };
  }
  throw ValidationError("config: g.kind must be 'zero' or 'step'");
}

struct GridProblem {
  EnergySpec spec;
  double k = 0.0;
  double a = 0.0, b = 0.0, r1 = 0.0, gval = 0.0;
};

GridProblem grid_problem_from_config(const json& cfg) {
  check_keys(cfg["grid"], {"m", "R"}, "grid");
  const int m = static_cast<int>(need_num(cfg["grid"], "m", "grid"));
  const double R = need_num(cfg["grid"], "R", "grid");
  const Grid grid(m, R);
  const double lambda = need_num(cfg, "lambda", "config");
  check_keys(cfg["f"], {"a", "b", "r1"}, "f");
  const double a = need_num(cfg["f"], "a", "f");
  const double b = need_num(cfg["f"], "b", "f");
  const double r1 = need_num(cfg["f"], "r1", "f");
  double gval = 0.0;
  if (cfg.contains("g")) {
    check_keys(cfg["g"], {"kind", "value"}, "g");
    if (cfg["g"].value("kind", "zero") == "step") {
      gval = need_num(cfg["g"], "value", "g");
    }
  }
  ScalarField f = ScalarField::ball(grid);
  ScalarField g = ScalarField::ball(grid);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (f.masked(i, j)) continue;
      const double r = std::hypot(grid.coord(i), grid.coord(j));
      f.at(i, j) = (r < r1 ? a : 0.0) - b;
      if (gval > 0.0 && r > r1) g.at(i, j) = gval;
    }
  GridProblem p{make_energy_spec(std::move(f), std::move(g), lambda),
                std::sqrt(lambda), a, b, r1, gval};
  return p;
}

MinimizeOptions options_from_config(const json& cfg) {
  MinimizeOptions opt;
  if (cfg.contains("order")) {
    const std::string order = cfg["order"].get<std::string>();
    if (order == "redblack") {
      opt.order = MinimizeOptions::Order::RedBlack;
    } else if (order != "sequential") {
      throw ValidationError("config: order must be 'sequential' or 'redblack'");
    }
  }
  opt.max_sweeps = static_cast<long>(opt_num(cfg, "max_sweeps", 100000));
  if (cfg.contains("interface_peel")) {
    opt.interface_peel = cfg["interface_peel"].get<bool>();
  }
  return opt;
}

json boundary_stats(const MinimizeResult& res) {
  std::vector<double> rr;
  for (const auto& s : res.boundary.segments)
    rr.push_back(std::hypot(s.mid[0], s.mid[1]));
  std::sort(rr.begin(), rr.end());
  json out;
  out["segments"] = rr.size();
  if (!rr.empty()) {
    out["median_radius"] = rr[rr.size() / 2];
    out["min_radius"] = rr.front();
    out["max_radius"] = rr.back();
    out["total_length"] = res.boundary.total_length();
  }
  return out;
}

struct RunContext {
  std::string out_dir;
  json manifest;
  std::chrono::steady_clock::time_point t0;
};

RunContext begin_run(const std::string& command, const json& cfg,
                     const std::string& out_dir, long seed, int threads) {
  std::filesystem::create_directories(out_dir);
  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.manifest["command"] = command;
  ctx.manifest["config"] = cfg;
  ctx.manifest["library_version"] = kVersion;
  ctx.manifest["seed"] = seed;
  ctx.manifest["threads"] = threads;
  ctx.t0 = std::chrono::steady_clock::now();
  return ctx;
}

void finish_run(RunContext& ctx) {
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - ctx.t0)
                        .count();
  ctx.manifest["timing"]["wall_ms"] = ms;  // excluded from reproducibility checks
  std::ofstream out(ctx.out_dir + "/manifest.json");
  out << ctx.manifest.dump(2) << "\n";
}

RadialParams radial_params_from_config(const json& cfg) {
  const int n = static_cast<int>(need_num(cfg, "n", "config"));
  const double lambda = need_num(cfg, "lambda", "config");
  const double a = need_num(cfg, "a", "config");
  const double b = need_num(cfg, "b", "config");
  const double r1 = need_num(cfg, "r1", "config");
  const double R = need_num(cfg, "R", "config");
  std::function<double(double)> g;
  if (cfg.contains("g")) g = profile_from_config(cfg["g"], r1);
  return make_radial_params(n, lambda, a, b, r1, R, std::move(g));
}

int cmd_radial(const json& cfg, RunContext& ctx) {
  check_keys(cfg, {"n", "lambda", "a", "b", "r1", "R", "g", "profile_samples"},
             "config");
  const RadialParams p = radial_params_from_config(cfg);
  const RadialSolution sol = radial_solve(p);

  // interior-equation residual by central differences
  const double s = 1e-4;
  double worst = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double r = sol.rho * i / 201.0;
    if (r < 10 * s || r > sol.rho - 10 * s || std::fabs(r - p.r1) < 10 * s) continue;
    const double upp = (sol.u(r + s) - 2.0 * sol.u(r) + sol.u(r - s)) / (s * s);
    const double up = (sol.u(r + s) - sol.u(r - s)) / (2.0 * s);
    const double f = (r < p.r1 ? p.a : 0.0) - p.b;
    worst = std::max(worst, std::fabs(upp + (p.n - 1) / r * up + p.lambda * sol.u(r) + f));
  }

  const int samples = static_cast<int>(opt_num(cfg, "profile_samples", 1001));
  std::ofstream prof(ctx.out_dir + "/radial_profile.csv");
  prof << "r,u,du\n";
  char buf[96];
  for (int i = 0; i < samples; ++i) {
    const double r = p.R * i / (samples - 1.0);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r, sol.u(r),
                  r > 0 ? sol.du(r) : 0.0);
    prof << buf;
  }

  ctx.manifest["results"] = {{"c1", sol.c1},
                             {"rho", sol.rho},
                             {"R_prime", sol.Rprime},
                             {"ode_residual", worst},
                             {"boundary_slope", sol.du(sol.rho)}};
  return 0;
}

int cmd_thresholds(const json& cfg, RunContext& ctx) {
  check_keys(cfg, {"n", "beta", "eps", "b", "b0", "mass", "mass_factor"}, "config");
  const int n = static_cast<int>(need_num(cfg, "n", "config"));
  const double beta = need_num(cfg, "beta", "config");
  const double eps = need_num(cfg, "eps", "config");
  const double b = need_num(cfg, "b", "config");
  const double b0 = need_num(cfg, "b0", "config");
  const double mass_min = mass_threshold(n, b0, eps);
  const double mass = cfg.contains("mass")
                          ? need_num(cfg, "mass", "config")
                          : opt_num(cfg, "mass_factor", 2.5) * mass_min;
  const double k_max = frequency_threshold(n, beta, b, mass);
  const double k = 0.9 * k_max;
  const double R = beta / k;
  const double a = mass / mvt_constant(n, k, 2.0 * eps);
  const auto rep = check_admissibility(n, k * k, a, a, b, b0, eps, 3.0 * eps, R);

  json clauses = json::array();
  for (const auto& c : rep.clauses) {
    clauses.push_back({{"name", c.name}, {"pass", c.pass}, {"slack", c.slack}});
  }
  ctx.manifest["results"] = {{"mass_threshold", mass_min},
                             {"mass", mass},
                             {"k_max", k_max},
                             {"k", k},
                             {"R", R},
                             {"a", a},
                             {"r1", eps},
                             {"r2", 3.0 * eps},
                             {"admissible", rep.pass},
                             {"clauses", clauses},
                             {"r_prime_outer", rep.r_prime_outer},
                             {"r_prime_inner", rep.r_prime_inner}};
  return rep.pass ? 0 : 2;
}

int cmd_minimize(const json& cfg, RunContext& ctx) {
  check_keys(cfg,
             {"grid", "lambda", "f", "g", "order", "max_sweeps", "interface_peel"},
             "config");
  GridProblem prob = grid_problem_from_config(cfg);
  MinimizeOptions opt = options_from_config(cfg);
  const MinimizeResult res = minimize(prob.spec, opt);

  write_field_csv(ctx.out_dir + "/u.csv", res.u);
  write_boundary_csv(ctx.out_dir + "/boundary.csv", res.boundary);
  write_energy_log_csv(ctx.out_dir + "/energy_log.csv", res.log);

  json results;
  results["energy"] = res.energy;
  results["sweeps"] = res.sweeps;
  results["fixed_point"] = res.fixed_point;
  results["discrete_tone"] = res.tone;
  results["tau_pos"] = res.tau_pos;
  results["boundary"] = boundary_stats(res);
  results["el_residual"] = el_residual(prob.spec, res);
  if (prob.gval > 0.0 && !res.boundary.segments.empty()) {
    results["bernoulli_residual"] = bernoulli_residual(prob.spec, res);
  }
  ctx.manifest["results"] = results;
  return 0;
}

int cmd_verify(const json& cfg, RunContext& ctx) {
  check_keys(cfg, {"n", "lambda", "a", "b", "r1", "R", "g", "num_waves", "ring"},
             "config");
  const RadialParams p = radial_params_from_config(cfg);
  const RadialSolution sol = radial_solve(p);
  const RadialHybridDomain dom = make_radial_hybrid(sol);
  const int num_waves = static_cast<int>(opt_num(cfg, "num_waves", 16));
  double ring_radius = 2.0 * sol.rho;
  int ring_points = 32;
  if (cfg.contains("ring")) {
    check_keys(cfg["ring"], {"radius", "points"}, "ring");
    ring_radius = opt_num(cfg["ring"], "radius", ring_radius);
    ring_points = static_cast<int>(opt_num(cfg["ring"], "points", ring_points));
  }
  const double idr = quadrature_identity_residual(dom, num_waves);
  const double pmr = potential_match_residual(dom, ring_radius, ring_points);

  json per_direction = json::array();
  for (int j = 0; j < num_waves; ++j) per_direction.push_back(idr);

  json report;
  report["identity_residual"] = idr;
  report["potential_residual"] = pmr;
  report["per_direction"] = per_direction;
  std::ofstream rep(ctx.out_dir + "/residuals.json");
  rep << report.dump(2) << "\n";

  ctx.manifest["results"] = {{"rho", sol.rho},
                             {"R_prime", sol.Rprime},
                             {"c1", sol.c1},
                             {"identity_residual", idr},
                             {"potential_residual", pmr}};
  return 0;
}

int cmd_nonscatter(const json& cfg, RunContext& ctx, int threads) {
  check_keys(cfg,
             {"grid", "lambda", "f", "g", "order", "max_sweeps", "interface_peel",
              "delta_over_h", "num_directions"},
             "config");
  GridProblem prob = grid_problem_from_config(cfg);
  MinimizeOptions opt = options_from_config(cfg);
  const Grid& grid = prob.spec.f.grid();
  const MinimizeResult res = minimize(prob.spec, opt);

  const double delta = opt_num(cfg, "delta_over_h", 10.0) * grid.h();
  const int num_directions = static_cast<int>(opt_num(cfg, "num_directions", 64));

  ScalarField h_vol = ScalarField::box(grid, prob.b);
  ScalarField mu = ScalarField::box(grid);
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (std::hypot(grid.coord(i), grid.coord(j)) < prob.r1)
        mu.at(i, j) = prob.a;

  const ScalarField u0 = incident_field(2, prob.k, grid);
  const ContrastResult cr =
      build_contrast(res, prob.spec.g, h_vol, mu, prob.k, u0, delta);

  std::vector<double> gseg;
  for (const auto& seg : res.boundary.segments)
    gseg.push_back(prob.spec.g.sample(seg.mid[0], seg.mid[1]));
  const double residual =
      nonradiating_residual(cr, res.boundary, gseg, prob.k, num_directions, threads);

  write_field_csv(ctx.out_dir + "/rho.csv", cr.rho);
  write_field_csv(ctx.out_dir + "/v.csv", cr.v);

  long band_nodes = 0;
  double rho_min_band = 1e300, rho_max = 0.0;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (cr.band[idx]) {
        ++band_nodes;
        rho_min_band = std::min(rho_min_band, std::fabs(cr.rho.at(i, j)));
      }
      if (cr.domain[idx]) rho_max = std::max(rho_max, std::fabs(cr.rho.at(i, j)));
    }

  json report;
  report["nonradiating_residual"] = residual;
  report["band_width"] = cr.band_width;
  report["band_nodes"] = band_nodes;
  report["rho_min_band"] = band_nodes ? rho_min_band : 0.0;
  report["rho_max"] = rho_max;
  report["gluing_interior_residual"] = gluing_interior_residual(cr, prob.k, 2);
  std::ofstream rep(ctx.out_dir + "/nonscatter_report.json");
  rep << report.dump(2) << "\n";

  ctx.manifest["results"] = {{"nonradiating_residual", residual},
                             {"energy", res.energy},
                             {"sweeps", res.sweeps},
                             {"boundary", boundary_stats(res)}};
  return 0;
}

int cmd_sweep_lambda(const json& cfg, RunContext& ctx) {
  check_keys(cfg, {"grid", "lambda", "f", "g", "order", "max_sweeps",
                   "interface_peel", "lambdas"},
             "config");
  json cfg_base = cfg;
  if (!cfg_base.contains("lambda")) cfg_base["lambda"] = cfg["lambdas"][0];
  GridProblem prob = grid_problem_from_config(cfg_base);
  MinimizeOptions opt = options_from_config(cfg);
  std::vector<double> lambdas;
  for (const auto& l : cfg["lambdas"]) lambdas.push_back(l.get<double>());
  const auto points = lambda_sweep(prob.spec, lambdas, opt);

  std::ofstream csv(ctx.out_dir + "/sweep.csv");
  csv << "lambda,l2_norm,energy,sweeps\n";
  char buf[128];
  json rows = json::array();
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%ld\n", pt.lambda, pt.l2_norm,
                  pt.energy, pt.sweeps);
    csv << buf;
    rows.push_back({{"lambda", pt.lambda},
                    {"l2_norm", pt.l2_norm},
                    {"energy", pt.energy},
                    {"sweeps", pt.sweeps}});
  }
  ctx.manifest["results"]["points"] = rows;
  return 0;
}

int cmd_null_radii(const json& cfg, RunContext& ctx) {
  check_keys(cfg, {"n", "k", "count"}, "config");
  const int n = static_cast<int>(need_num(cfg, "n", "config"));
  const double k = need_num(cfg, "k", "config");
  const int count = static_cast<int>(need_num(cfg, "count", "config"));
  const auto radii = null_quadrature_radii(n, k, count);
  ctx.manifest["results"]["radii"] = radii;
  std::ofstream rep(ctx.out_dir + "/null_radii.json");
  rep << json(radii).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid quadrature-domain construction and verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 1;
  long seed = 0;
  if (const char* env = std::getenv("QUADFORGE_OUT")) out_dir = env;
  if (out_dir.empty()) out_dir = ".";

  app.add_option("--config", config_path, "path to the JSON run configuration");
  app.add_option("--out", out_dir, "output directory (default $QUADFORGE_OUT or .)");
  app.add_option("--threads", threads, "internal parallelism (default 1, reproducible)");
  app.add_option("--seed", seed, "seed for randomized property trials");

  const char* names[] = {"radial",     "thresholds",  "minimize", "verify",
                         "nonscatter", "sweep-lambda", "null-radii"};
  for (const char* n : names) app.add_subcommand(n, "")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot read config file " + config_path);
      in >> cfg;
    } else if (command != "null-radii") {
      throw ValidationError("--config is required for this command");
    }
    // flag overrides of top-level scalar keys
    if (cfg.contains("seed") && seed == 0) seed = cfg["seed"].get<long>();
    if (cfg.contains("threads") && threads == 1) threads = cfg["threads"].get<int>();
    cfg.erase("seed");
    cfg.erase("threads");

    RunContext ctx = begin_run(command, cfg, out_dir, seed, threads);
    int rc = 0;
    if (command == "radial") {
      rc = cmd_radial(cfg, ctx);
    } else if (command == "thresholds") {
      rc = cmd_thresholds(cfg, ctx);
    } else if (command == "minimize") {
      rc = cmd_minimize(cfg, ctx);
    } else if (command == "verify") {
      rc = cmd_verify(cfg, ctx);
    } else if (command == "nonscatter") {
      rc = cmd_nonscatter(cfg, ctx, threads);
    } else if (command == "sweep-lambda") {
      rc = cmd_sweep_lambda(cfg, ctx);
    } else if (command == "null-radii") {
      if (cfg.empty()) {
        cfg = {{"n", 2}, {"k", 1.0}, {"count", 3}};
        ctx.manifest["config"] = cfg;
      }
      rc = cmd_null_radii(cfg, ctx);
    }
    finish_run(ctx);
    return rc;
  } catch (const NoConvergeError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  }
}
