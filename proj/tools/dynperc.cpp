// Command-line driver: one subcommand per experiment.

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dynperc/dynperc.hpp"

namespace fs = std::filesystem;
using namespace dynperc;

namespace {

enum Exit { kOk = 0, kRunError = 1, kConfigError = 2, kOutputError = 3, kIdentityFailure = 4 };

struct Options {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  int workers = 1;
  bool force = false;
};

// Writes every artifact into a staging directory next to `out`, then renames
// it into place. Nothing is left behind when the run fails.
class Staging {
public:
  Staging(fs::path out, bool force) : out_(std::move(out)), force_(force) {
    if (fs::exists(out_) && !force_) throw std::runtime_error(out_.string() + ": already exists (use --force)");
    dir_ = out_;
    dir_ += ".partial-" + std::to_string(::getpid());
    fs::remove_all(dir_);
    if (out_.has_parent_path()) fs::create_directories(out_.parent_path());
    if (!fs::create_directory(dir_)) throw std::runtime_error(dir_.string() + ": cannot create");
  }
  ~Staging() {
    std::error_code ec;
    if (!committed_) fs::remove_all(dir_, ec);
  }
  fs::path file(const std::string& name) const { return dir_ / name; }
  void commit() {
    if (force_) fs::remove_all(out_);
    fs::rename(dir_, out_);
    committed_ = true;
  }

private:
  fs::path out_, dir_;
  bool force_;
  bool committed_ = false;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error(p.string() + ": write failed");
}

template <class Config>
int finish(const std::string& sub, const Options& opt, const Config& cfg, const std::vector<std::string>& warnings,
           const std::function<RunOutput()>& body, std::uint64_t seed) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const fs::path out = opt.out.empty() ? fs::path("out") / sub : fs::path(opt.out);
  std::optional<Staging> stage;
  try {
    stage.emplace(out, opt.force);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOutputError;
  }
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput res;
  try {
    res = body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunError;  // staging directory removed by the destructor
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto params = echo(cfg);
  nlohmann::ordered_json m;
  m["subcommand"] = sub;
  m["build"] = kBuildTag;
  nlohmann::ordered_json pj;
  for (const auto& [k, v] : params) pj[k] = v;
  m["params"] = pj;
  m["seed"] = seed;
  m["workers"] = opt.workers;
  m["wall_time_s"] = wall;
  m["samples"] = res.samples;
  m["rejections"] = res.rejected;
  std::vector<std::string> all_warnings = warnings;
  all_warnings.insert(all_warnings.end(), res.warnings.begin(), res.warnings.end());
  m["warnings"] = all_warnings;
  m["notes"] = res.notes;
  m["status"] = res.failed ? "identity failure" : "ok";
  std::vector<std::string> files;
  try {
    for (const auto& t : res.tables) {
      std::ostringstream os;
      write_csv(os, t, sub, params);
      write_file(stage->file(t.name + ".csv"), os.str());
      files.push_back(t.name + ".csv");
    }
    m["outputs"] = files;
    write_file(stage->file("manifest.json"), m.dump(2) + "\n");
    stage->commit();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOutputError;
  }
  std::cout << res.report;
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out.string() << " (" << files.size() << " tables)\n";
  return res.failed ? kIdentityFailure : kOk;
}

template <class Config>
int load(const Options& opt, Config& cfg, std::vector<std::string>& warnings) {
  try {
    if (!opt.config.empty()) {
      std::ifstream is(opt.config);
      if (!is) throw ConfigError({opt.config + ": cannot open"});
      warnings = parse_config(is, cfg, opt.config).warnings;
    } else {
      warnings = cfg.validate();
    }
  } catch (const ConfigError& e) {
    for (const auto& x : e.errors()) std::cerr << "config error: " << x << "\n";
    return kConfigError;
  }
  return kOk;
}

int run_simulation(const std::string& sub, const Options& opt) {
  ExperimentConfig cfg;
  std::vector<std::string> warnings;
  if (int rc = load(opt, cfg, warnings)) return rc;
  if (opt.seed) cfg.sim.seed = *opt.seed;
  if (opt.samples) cfg.sim.samples = *opt.samples;
  try {
    warnings = cfg.validate();
  } catch (const ParamError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const Executor exec{opt.workers};
  return finish(sub, opt, cfg, warnings, [&] { return run_experiment(sub, cfg, exec); }, cfg.sim.seed);
}

int run_oracle_cmd(const Options& opt) {
  OracleConfig cfg;
  std::vector<std::string> warnings;
  if (int rc = load(opt, cfg, warnings)) return rc;
  if (opt.seed) cfg.f_seed = *opt.seed;
  if (opt.samples) cfg.f_count = *opt.samples;
  try {
    cfg.validate();
  } catch (const ParamError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return finish("oracle", opt, cfg, warnings, [&] { return run_oracle(cfg); }, cfg.f_seed);
}

}  // namespace

const char* describe(const std::string& sub) {
  if (sub == "sweep") return "overlap, covariance and coincidence over the t grid";
  if (sub == "oracle") return "exact rational identities on small index sets";
  if (sub == "radius") return "effective radius tail, locality and bypass checks";
  if (sub == "animal") return "greedy lattice animal shape and radius moments";
  if (sub == "regime") return "correlation and overlap at multiples of t_hat";
  if (sub == "time-constant") return "E[D]/n and E|all geodesic edges|/n across n";
  if (sub == "variance-scaling") return "Var(D)/n across n";
  if (sub == "coincidence") return "how often chemical and truncated geodesic sets agree";
  return "";
}

int main(int argc, char** argv) {
  CLI::App app{"Dynamical first-passage percolation experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  int samples = 0;
  for (const auto& name : subcommands()) {
    auto* sc = app.add_subcommand(name, describe(name));
    sc->add_option("--config", opt.config, "key = value config file");
    sc->add_option("--seed", seed, "override the seed");
    sc->add_option("--samples", samples, "override the sample count");
    sc->add_option("--out", opt.out, "output directory (default out/<subcommand>)");
    sc->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sc->add_flag("--force", opt.force, "replace an existing output directory");
  }
  CLI11_PARSE(app, argc, argv);
  const auto* sc = app.get_subcommands().front();
  if (sc->count("--seed")) opt.seed = seed;
  if (sc->count("--samples")) opt.samples = samples;
  const std::string sub = sc->get_name();
  return sub == "oracle" ? run_oracle_cmd(opt) : run_simulation(sub, opt);
}
