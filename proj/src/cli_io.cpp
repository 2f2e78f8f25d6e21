#include "hoproc/cli_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "hoproc/jump_engine.hpp"
#include "hoproc/parallel.hpp"
#include "hoproc/sde_engine.hpp"
#include "hoproc/verify.hpp"

namespace hop {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "system", "family", "rank",   "k",       "roots",   "multiplicities", "process",
      "dt",     "T",      "paths",  "seed",    "wall_floor", "rate_cap",  "start",
      "stride", "out",    "verify", "workers", "budget_scale"};
  return keys;
}

namespace {

const std::set<std::string> kSystemKeys{"system", "family", "rank", "k", "roots",
                                        "multiplicities"};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& j, const char* where) {
  if (j.is_null()) return;
  if (!j.is_object()) fail(std::string(where) + " must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, _] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      fail("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("key '" + key + "' has the wrong type");
  }
}

double positive(const json& j, const std::string& key) {
  double v = get<double>(j, key);
  if (!(v > 0.0) || !std::isfinite(v)) fail("key '" + key + "' must be positive");
  return v;
}

std::size_t positive_count(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() <= 0)
    fail("key '" + key + "' must be a positive integer");
  return j.at(key).get<std::size_t>();
}

std::vector<double> number_list(const json& j, const std::string& key) {
  if (j.at(key).is_number()) return {j.at(key).get<double>()};
  return get<std::vector<double>>(j, key);
}

}  // namespace

bool RunConfig::jump_process() const {
  return process == "ho" || process == "dunkl" || process == "f0_complex";
}

RootSystem RunConfig::system() const {
  if (custom()) {
    std::vector<Vector> rs;
    for (const auto& r : roots) rs.emplace_back(std::span<const double>(r));
    return RootSystem::from_roots(std::move(rs), multiplicities);
  }
  return RootSystem::standard(family, rank, k);
}

json RunConfig::echo() const {
  json j;
  if (custom()) {
    j["roots"] = roots;
    j["multiplicities"] = multiplicities;
  } else {
    j["system"] = to_string(family) + std::to_string(rank);
    j["family"] = to_string(family);
    j["rank"] = rank;
    j["k"] = k;
  }
  j["process"] = process;
  j["dt"] = dt;
  j["T"] = T;
  j["paths"] = paths;
  j["seed"] = seed;
  j["wall_floor"] = wall_floor;
  j["rate_cap"] = rate_cap;
  j["start"] = start;
  j["stride"] = stride;
  j["out"] = out;
  j["verify"] = verify;
  j["workers"] = workers;
  j["budget_scale"] = budget_scale;
  j["overridden_by_flags"] = overridden;
  return j;
}

RunConfig parse_config(const json& file, const json& flags) {
  check_keys(file, "config file");
  check_keys(flags, "flags");

  json merged = file.is_null() ? json::object() : file;
  std::vector<std::string> overridden;
  if (!flags.is_null()) {
    bool flag_system = false;
    for (const auto& [key, _] : flags.items()) flag_system = flag_system || kSystemKeys.count(key);
    // A system given on the command line replaces the file's system as a whole.
    if (flag_system)
      for (const auto& key : kSystemKeys)
        if (merged.contains(key) && !flags.contains(key)) {
          merged.erase(key);
          overridden.push_back(key);
        }
    for (const auto& [key, value] : flags.items()) {
      if (merged.contains(key)) overridden.push_back(key);
      merged[key] = value;
    }
  }
  std::sort(overridden.begin(), overridden.end());
  overridden.erase(std::unique(overridden.begin(), overridden.end()), overridden.end());

  RunConfig c;
  c.overridden = overridden;
  const json& m = merged;

  bool has_roots = m.contains("roots");
  if (has_roots && (m.contains("system") || m.contains("family") || m.contains("rank")))
    fail("conflicting options: 'roots' together with 'system'/'family'/'rank'");
  if (has_roots) {
    c.roots = get<std::vector<std::vector<double>>>(m, "roots");
    if (c.roots.empty()) fail("key 'roots' must list at least one root");
    if (!m.contains("multiplicities")) fail("missing key 'multiplicities' for custom roots");
    c.multiplicities = number_list(m, "multiplicities");
    if (c.multiplicities.size() == 1) c.multiplicities.assign(c.roots.size(), c.multiplicities[0]);
    if (c.multiplicities.size() != c.roots.size())
      fail("key 'multiplicities' needs one value per root");
    if (m.contains("k")) fail("conflicting options: 'k' with custom 'roots'");
  } else {
    if (m.contains("multiplicities")) fail("key 'multiplicities' needs 'roots'");
    std::optional<Family> fam;
    std::optional<int> rank;
    if (m.contains("system")) {
      static const std::regex re("^(A|B|C|D|BC)([0-9]+)$");
      std::string s = get<std::string>(m, "system");
      std::smatch sm;
      if (!std::regex_match(s, sm, re)) fail("invalid family in 'system': '" + s + "'");
      fam = parse_family(sm[1].str());
      rank = std::stoi(sm[2].str());
    }
    if (m.contains("family")) {
      Family f;
      try {
        f = parse_family(get<std::string>(m, "family"));
      } catch (const RootSystemError& e) {
        fail(std::string("invalid family: ") + e.what());
      }
      if (f == Family::Custom) fail("invalid family: use 'roots' for custom systems");
      if (fam && *fam != f) fail("conflicting options: 'system' and 'family' disagree");
      fam = f;
    }
    if (m.contains("rank")) {
      if (!m.at("rank").is_number_integer()) fail("key 'rank' must be a positive integer");
      int r = m.at("rank").get<int>();
      if (r <= 0) fail("key 'rank' must be a positive integer");
      if (rank && *rank != r) fail("conflicting options: 'system' and 'rank' disagree");
      rank = r;
    }
    if (!fam) fail("missing key 'system' (or 'family' and 'rank', or 'roots')");
    if (!rank) fail("missing key 'rank'");
    c.family = *fam;
    c.rank = *rank;
    if (m.contains("k")) c.k = number_list(m, "k");
    for (double v : c.k)
      if (!(v >= 0.0)) fail("key 'k' must be non-negative");
  }

  if (m.contains("process")) c.process = get<std::string>(m, "process");
  if (!c.jump_process()) {
    try {
      parse_process_kind(c.process);
    } catch (const std::exception&) {
      fail("key 'process' must be one of ho_radial, dunkl_radial, intrinsic, brownian, ho, "
           "dunkl, f0_complex");
    }
  }
  if (m.contains("dt")) c.dt = positive(m, "dt");
  if (m.contains("T")) c.T = positive(m, "T");
  if (c.dt > c.T) fail("conflicting options: 'dt' exceeds 'T'");
  if (m.contains("paths")) c.paths = positive_count(m, "paths");
  if (m.contains("seed")) c.seed = positive_count(m, "seed");
  if (m.contains("wall_floor")) c.wall_floor = positive(m, "wall_floor");
  if (m.contains("rate_cap")) c.rate_cap = positive(m, "rate_cap");
  if (m.contains("start")) c.start = number_list(m, "start");
  if (m.contains("stride")) c.stride = positive_count(m, "stride");
  if (m.contains("out")) c.out = get<std::string>(m, "out");
  if (m.contains("verify")) {
    c.verify = m.at("verify").is_string() ? std::vector<std::string>{m.at("verify")}
                                          : get<std::vector<std::string>>(m, "verify");
    for (const auto& id : c.verify)
      if (!find_entry(id)) fail("unknown verification id '" + id + "' in 'verify'");
  }
  if (m.contains("workers")) c.workers = positive_count(m, "workers");
  if (m.contains("budget_scale")) c.budget_scale = positive(m, "budget_scale");

  // Build once so that invalid systems surface as config errors.
  try {
    RootSystem rs = c.system();
    if (!c.start.empty() && c.start.size() != rs.rank())
      fail("key 'start' needs " + std::to_string(rs.rank()) + " coordinates");
  } catch (const RootSystemError& e) {
    fail(std::string("invalid root system: ") + e.what());
  }
  return c;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("malformed config file '" + path.string() + "': " + e.what());
  }
}

std::string git_blob_hash(std::string_view content) {
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || !EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) ||
      !EVP_DigestUpdate(ctx.get(), header.data(), header.size()) ||
      !EVP_DigestUpdate(ctx.get(), content.data(), content.size()) ||
      !EVP_DigestFinal_ex(ctx.get(), digest, &len))
    throw std::runtime_error("SHA-1 failed");
  std::string hex(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) std::snprintf(&hex[2 * i], 3, "%02x", digest[i]);
  return hex;
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + p.string() + "'");
}

template <class Path, class Sim>
std::vector<Path> run_paths(std::size_t count, std::size_t workers, Sim&& sim) {
  std::vector<Path> out(count);
  parallel_for(
      count,
      [&](std::size_t i) {
        try {
          out[i] = sim(i);
        } catch (const std::exception& e) {
          throw std::runtime_error("path " + std::to_string(i) + ": " + e.what());
        }
      },
      workers);
  return out;
}

}  // namespace

SimulateOutputs run_simulate(const RunConfig& config) {
  if (config.out.empty()) throw ConfigError("missing key 'out' for simulate");
  fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");

  RootSystem ho = config.system();
  bool rational = config.process == "dunkl" || config.process == "dunkl_radial" ||
                  config.process == "intrinsic";
  RootSystem model = rational ? rescale_to_dunkl(ho) : ho;

  SimConfig sim;
  sim.model = &model;
  sim.start = config.start.empty() ? Vector(model.rank()) : Vector(std::span(config.start));
  sim.dt = config.dt;
  sim.horizon = config.T;
  sim.path_count = config.paths;
  sim.master_seed = config.seed;
  sim.wall_floor = config.wall_floor > 0.0 ? config.wall_floor : default_wall_floor(config.dt);
  sim.record_stride = config.stride;
  sim.workers = config.workers;

  SimulateOutputs outs;
  outs.paths_csv = dir / "paths.csv";
  outs.sidecar = dir / "run.json";
  json files = json::object();
  auto emit = [&](const fs::path& p, const std::string& content) {
    write_file(p, content);
    files[p.filename().string()] = {{"git_blob_sha1", git_blob_hash(content)},
                                    {"bytes", content.size()}};
  };

  if (config.jump_process()) {
    JumpConfig jc;
    jc.radial = sim;
    jc.process = parse_jump_process(config.process);
    jc.rate_cap = config.rate_cap;
    jc.validate();
    auto paths = run_paths<SkewProductPath>(config.paths, config.workers,
                                            [&](std::size_t i) { return simulate_skew_path(jc, i); });
    std::ostringstream p, e;
    write_full_states_csv(p, paths, model);
    write_events_csv(e, paths);
    outs.events_csv = dir / "events.csv";
    emit(outs.paths_csv, p.str());
    emit(outs.events_csv, e.str());
  } else {
    sim.kind = parse_process_kind(config.process);
    sim.validate();
    auto paths = run_paths<RadialPath>(config.paths, config.workers,
                                       [&](std::size_t i) { return simulate_radial_path(sim, i); });
    std::ostringstream p;
    write_paths_csv(p, paths);
    emit(outs.paths_csv, p.str());
  }

  json side;
  side["config"] = config.echo();
  side["resolved"] = {{"wall_floor", sim.wall_floor},
                      {"start", std::vector<double>(sim.start.begin(), sim.start.end())},
                      {"steps", sim.steps()},
                      {"system_used", rational ? "dunkl_rescaled" : "as_given"}};
  side["seeds"] = {{"master", config.seed},
                   {"streams", "derive_seed(master, module, path_id)"}};
  side["files"] = files;
  write_file(outs.sidecar, side.dump(2) + "\n");
  return outs;
}

VerifyOutcome run_verify(const RunConfig& config) {
  // Registry self-audit: ids and anchors unique and non-empty.
  std::set<std::string> ids, anchors;
  for (const auto& r : verification_registry()) {
    if (r.id.empty() || r.anchor.empty() || !ids.insert(r.id).second ||
        !anchors.insert(r.anchor).second)
      throw std::logic_error("verification registry is inconsistent at '" + r.id + "'");
  }

  std::vector<std::string> selected = config.verify;
  if (selected.empty())
    for (const auto& r : verification_registry()) selected.push_back(r.id);

  RootSystem model = config.system();
  VerifyOptions opt;
  opt.seed = config.seed;
  opt.workers = config.workers;
  opt.budget_scale = config.budget_scale;

  VerifyOutcome out;
  json entries = json::array();
  out.all_pass = true;
  for (const auto& id : selected) {
    VerificationEntry e = run_entry(id, model, opt);
    if (!e.skipped) out.all_pass = out.all_pass && e.pass;
    entries.push_back(to_json(e));
  }
  bool audit = audit_anchors(entries);
  out.all_pass = out.all_pass && audit;
  out.report = {{"config_echo", config.echo()}, {"anchor_audit", audit}, {"entries", entries}};
  return out;
}

}  // namespace hop
