// hoproc: command-line front end.
//   roots     list the roots of a system
//   field     evaluate drifts and jump rates along a segment
//   simulate  write paths/events CSV and a run.json sidecar
//   verify    run registry entries and emit a JSON report
//   registry  list the verification ids

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hoproc/cli_io.hpp"
#include "hoproc/drift_fields.hpp"
#include "hoproc/root_algebra.hpp"
#include "hoproc/verify.hpp"

namespace {

using nlohmann::json;

// Options shared by every system-aware subcommand. Only options given on
// the command line end up in the flags object.
struct ConfigFlags {
  std::string config;
  std::string system, family, process, out;
  int rank = 0;
  std::vector<double> k, start;
  double dt = 0, T = 0, wall_floor = 0, rate_cap = 0, budget_scale = 0;
  std::int64_t paths = 0, seed = 0, stride = 0, workers = 0;
  std::vector<std::string> verify;
  std::vector<std::pair<std::string, CLI::Option*>> opts;

  void attach(CLI::App* app, bool run_options) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    opts.emplace_back("system", app->add_option("--system", system, "e.g. A2, B2, BC1"));
    opts.emplace_back("family", app->add_option("--family", family, "A, B, C, D or BC"));
    opts.emplace_back("rank", app->add_option("--rank", rank));
    opts.emplace_back("k", app->add_option("--k", k, "multiplicities per orbit")->delimiter(','));
    if (!run_options) return;
    opts.emplace_back("process", app->add_option("--process", process,
                                                 "ho_radial, dunkl_radial, intrinsic, brownian, "
                                                 "ho, dunkl, f0_complex"));
    opts.emplace_back("dt", app->add_option("--dt", dt));
    opts.emplace_back("T", app->add_option("-T,--T", T, "horizon"));
    opts.emplace_back("paths", app->add_option("--paths", paths));
    opts.emplace_back("seed", app->add_option("--seed", seed));
    opts.emplace_back("wall_floor", app->add_option("--wall-floor", wall_floor));
    opts.emplace_back("rate_cap", app->add_option("--rate-cap", rate_cap));
    opts.emplace_back("start", app->add_option("--start", start)->delimiter(','));
    opts.emplace_back("stride", app->add_option("--stride", stride));
    opts.emplace_back("out", app->add_option("--out", out, "output directory"));
    opts.emplace_back("verify", app->add_option("--verify", verify, "registry ids")->delimiter(','));
    opts.emplace_back("workers", app->add_option("--workers", workers));
    opts.emplace_back("budget_scale", app->add_option("--budget-scale", budget_scale));
  }

  json flags() const {
    json j = json::object();
    for (const auto& [key, opt] : opts) {
      if (opt->count() == 0) continue;
      if (key == "system") j[key] = system;
      else if (key == "family") j[key] = family;
      else if (key == "rank") j[key] = rank;
      else if (key == "k") j[key] = k;
      else if (key == "process") j[key] = process;
      else if (key == "dt") j[key] = dt;
      else if (key == "T") j[key] = T;
      else if (key == "paths") j[key] = paths;
      else if (key == "seed") j[key] = seed;
      else if (key == "wall_floor") j[key] = wall_floor;
      else if (key == "rate_cap") j[key] = rate_cap;
      else if (key == "start") j[key] = start;
      else if (key == "stride") j[key] = stride;
      else if (key == "out") j[key] = out;
      else if (key == "verify") j[key] = verify;
      else if (key == "workers") j[key] = workers;
      else if (key == "budget_scale") j[key] = budget_scale;
    }
    return j;
  }

  hop::RunConfig resolve() const {
    json file = config.empty() ? json() : hop::read_json_file(config);
    return hop::parse_config(file, flags());
  }
};

void print_roots(const hop::RootSystem& rs) {
  std::cout << std::setprecision(17);
  for (const hop::Root& r : rs.roots()) {
    for (double c : r.vector) std::cout << c << ' ';
    std::cout << "k=" << r.multiplicity << " orbit=" << r.orbit << '\n';
  }
}

int print_field(const hop::RootSystem& ho, const std::string& kind, std::vector<double> from,
                std::vector<double> to, int points) {
  hop::RootSystem dunkl = hop::rescale_to_dunkl(ho);
  const std::size_t n = ho.rank();
  if (from.size() != n || to.size() != n)
    throw hop::ConfigError("--from and --to need " + std::to_string(n) + " coordinates");
  bool rational = kind == "dunkl" || kind == "intrinsic";
  const hop::RootSystem& m = rational ? dunkl : ho;
  std::cout << std::setprecision(17);
  for (std::size_t i = 0; i < n; ++i) std::cout << (i ? "," : "") << "x_" << i + 1;
  for (std::size_t i = 0; i < n; ++i) std::cout << ",drift_" << i + 1;
  bool rates = kind == "ho" || kind == "dunkl";
  if (rates)
    for (std::size_t a = 0; a < m.positive_count(); ++a) std::cout << ",rate_" << a + 1;
  std::cout << '\n';
  for (int p = 0; p < points; ++p) {
    double s = points == 1 ? 0.0 : double(p) / double(points - 1);
    hop::Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (1 - s) * from[i] + s * to[i];
    hop::Vector b;
    if (kind == "ho") b = hop::ho_radial_drift(m, x);
    else if (kind == "centered") b = hop::ho_centered_drift(m, x);
    else if (kind == "dunkl") b = hop::dunkl_radial_drift(m, x);
    else if (kind == "intrinsic") b = hop::intrinsic_drift(m, x);
    else if (kind == "girsanov") b = hop::girsanov_integrand(m, x);
    else throw hop::ConfigError("unknown field kind '" + kind + "'");
    for (std::size_t i = 0; i < n; ++i) std::cout << (i ? "," : "") << x[i];
    for (std::size_t i = 0; i < n; ++i) std::cout << ',' << b[i];
    if (rates) {
      auto r = hop::jump_rates(m, kind == "ho" ? hop::RateKind::Ho : hop::RateKind::Dunkl, x);
      for (double v : r) std::cout << ',' << v;
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heckman-Opdam and Dunkl process simulator"};
  app.require_subcommand(1);

  ConfigFlags roots_f, field_f, sim_f, ver_f;
  auto* roots = app.add_subcommand("roots", "list roots, one per line");
  roots_f.attach(roots, false);

  auto* field = app.add_subcommand("field", "CSV of drift and rates along a segment");
  field_f.attach(field, false);
  std::string kind = "ho";
  std::vector<double> from, to;
  int points = 11;
  field->add_option("--kind", kind, "ho, centered, dunkl, intrinsic, girsanov");
  field->add_option("--from", from)->delimiter(',')->required();
  field->add_option("--to", to)->delimiter(',')->required();
  field->add_option("--points", points)->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "simulate paths and write CSV");
  sim_f.attach(sim, true);

  auto* ver = app.add_subcommand("verify", "run verification entries");
  ver_f.attach(ver, true);

  auto* reg = app.add_subcommand("registry", "list verification ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*roots) {
      print_roots(roots_f.resolve().system());
    } else if (*field) {
      return print_field(field_f.resolve().system(), kind, from, to, points);
    } else if (*sim) {
      auto cfg = sim_f.resolve();
      auto outs = hop::run_simulate(cfg);
      std::cout << outs.paths_csv.string() << '\n';
      if (!outs.events_csv.empty()) std::cout << outs.events_csv.string() << '\n';
      std::cout << outs.sidecar.string() << '\n';
    } else if (*ver) {
      auto cfg = ver_f.resolve();
      auto res = hop::run_verify(cfg);
      std::string text = res.report.dump(2) + "\n";
      if (cfg.out.empty()) {
        std::cout << text;
      } else {
        std::filesystem::create_directories(cfg.out);
        std::ofstream(std::filesystem::path(cfg.out) / "report.json") << text;
      }
      for (const auto& e : res.report["entries"])
        std::cerr << (e["skipped"].get<bool>() ? "SKIP" : e["pass"].get<bool>() ? "PASS" : "FAIL")
                  << ' ' << e["id"].get<std::string>() << '\n';
      return res.all_pass ? 0 : 1;
    } else if (*reg) {
      for (const auto& r : hop::verification_registry())
        std::cout << r.id << '\t' << r.anchor << '\t' << r.budget << '\n';
    }
  } catch (const hop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
