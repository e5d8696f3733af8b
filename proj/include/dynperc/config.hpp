#ifndef DYNPERC_CONFIG_HPP
#define DYNPERC_CONFIG_HPP

#include <gmpxx.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "dynperc/lattice.hpp"

namespace dynperc {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s;
    for (const auto& x : e) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> errors_;
};

// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace detail {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  for (const auto& x : split_list(s)) out.push_back(parse_number<T>(x));
  return out;
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_floating_point_v<T>) return format_double(v);
  else return std::to_string(v);
}

template <class T>
std::string format_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_value(v[i]);
  return s;
}

inline mpq_class parse_rational(const std::string& s) {
  mpq_class q;
  if (s.empty() || q.set_str(s, 10) != 0) throw std::invalid_argument("not a rational: '" + s + "'");
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
  q.canonicalize();
  return q;
}

}  // namespace detail

// One config key: how to read it from text and how to write it back.
struct ConfigField {
  std::string key, doc;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <class T>
ConfigField field(std::string key, T& ref, std::string doc) {
  return {std::move(key), std::move(doc), [&ref](const std::string& s) { ref = detail::parse_number<T>(s); },
          [&ref] { return detail::format_value(ref); }};
}

template <class T>
ConfigField list_field(std::string key, std::vector<T>& ref, std::string doc) {
  return {std::move(key), std::move(doc), [&ref](const std::string& s) { ref = detail::parse_list<T>(s); },
          [&ref] { return detail::format_list(ref); }};
}

inline ConfigField rational_field(std::string key, mpq_class& ref, std::string doc) {
  return {std::move(key), std::move(doc), [&ref](const std::string& s) { ref = detail::parse_rational(s); },
          [&ref] { return ref.get_str(); }};
}

// Parameters for every simulation subcommand.
struct ExperimentConfig {
  SimulationParams sim;
  std::vector<int> n_list{32, 64, 128, 256};
  std::vector<double> betas{0.1, 1.0, 10.0};
  double t = 0.3;  // noise level for radius and coincidence
  int radius_side = 220;
  int radius_edges = 10000;
  int radius_per_sample = 900;
  int radius_spread = 30;  // edges drawn with lower endpoint in Λ_spread(0)
  int min_count = 30;      // survival fit uses levels with at least this many edges
  int locality_trials = 500;
  std::vector<int> locality_ell{1, 2, 3};
  int bypass_samples = 0;
  int bypass_bound = 0;  // 0: C_star
  std::vector<int> animal_N{1, 2, 3};
  std::vector<int> animal_L{4, 5, 6, 7, 8, 9, 10, 11, 12};
  double animal_q_block = 0.5, animal_q_edge = 0.5;
  std::vector<int> moment_n{16, 32, 64};
  int moment_samples = 20;

  std::vector<ConfigField> fields() {
    return {
        field("d", sim.d, "lattice dimension"),
        field("side", sim.side, "box half-width; 0 derives n*|x|_inf + ceil(sqrt n)"),
        field("p", sim.p, "open probability"),
        field("n", sim.n, "endpoint separation"),
        list_field("x_dir", sim.x_dir, "direction; empty means e_1"),
        field("M", sim.M, "truncation; 0 means floor((ln n)^2)"),
        field("C_star", sim.C_star, "radius constant; 0 means 8d"),
        field("seed", sim.seed, "master seed"),
        field("samples", sim.samples, "environment samples"),
        list_field("t_grid", sim.t_grid, "noise levels, from 0 to 1"),
        list_field("n_list", n_list, "n values for scaling tables"),
        list_field("betas", betas, "multiples of t_hat for the regime sweep"),
        field("t", t, "noise level for radius and coincidence"),
        field("radius_side", radius_side, "box half-width for radius sampling"),
        field("radius_edges", radius_edges, "edges in the radius tail"),
        field("radius_per_sample", radius_per_sample, "edges drawn per environment"),
        field("radius_spread", radius_spread, "edges drawn from Λ_spread(0)"),
        field("min_count", min_count, "minimum count for a survival level to enter the fit"),
        field("locality_trials", locality_trials, "trials per locality level"),
        list_field("locality_ell", locality_ell, "levels for the locality check"),
        field("bypass_samples", bypass_samples, "environments for the bypass check; 0 skips"),
        field("bypass_bound", bypass_bound, "bypass constant; 0 means C_star"),
        list_field("animal_N", animal_N, "block sizes"),
        list_field("animal_L", animal_L, "path lengths"),
        field("animal_q_block", animal_q_block, "block probability of the synthetic field"),
        field("animal_q_edge", animal_q_edge, "edge probability of the synthetic field"),
        list_field("moment_n", moment_n, "n values for the radius moment table"),
        field("moment_samples", moment_samples, "samples per n for the radius moment table"),
    };
  }
  std::vector<ConfigField> fields() const { return const_cast<ExperimentConfig*>(this)->fields(); }

  std::vector<std::string> validate() const {
    auto w = dynperc::validate(sim);
    auto positive = [](const char* key, long v) {
      if (v < 1) throw ParamError(std::string(key) + ": must be >= 1");
    };
    if (!(t >= 0 && t <= 1)) throw ParamError("t: must lie in [0,1]");
    positive("radius_side", radius_side);
    positive("radius_edges", radius_edges);
    positive("radius_per_sample", radius_per_sample);
    positive("radius_spread", radius_spread);
    positive("locality_trials", locality_trials);
    positive("moment_samples", moment_samples);
    if (radius_spread >= radius_side) throw ParamError("radius_spread: must be below radius_side");
    if (bypass_samples < 0) throw ParamError("bypass_samples: must be >= 0");
    if (bypass_bound < 0) throw ParamError("bypass_bound: must be >= 0");
    for (int v : n_list) positive("n_list", v);
    for (int v : locality_ell) positive("locality_ell", v);
    for (int v : animal_N) positive("animal_N", v);
    for (int v : animal_L) positive("animal_L", v);
    for (int v : moment_n) positive("moment_n", v);
    for (double b : betas)
      if (!(b > 0)) throw ParamError("betas: must be positive");
    if (!(animal_q_block >= 0 && animal_q_block <= 1)) throw ParamError("animal_q_block: must lie in [0,1]");
    if (!(animal_q_edge >= 0 && animal_q_edge <= 1)) throw ParamError("animal_q_edge: must lie in [0,1]");
    return w;
  }
};

// Oracle instance file.
struct OracleConfig {
  int E = 3;
  mpq_class p{3, 5};
  mpq_class ell = 1, L = 5;
  std::uint64_t f_seed = 1;
  int f_count = 5;
  std::vector<std::string> f_table_text;  // explicit table; overrides f_seed
  std::vector<int> nest;  // nested sizes; empty means E+1, E+2 capped at 12

  std::vector<ConfigField> fields() {
    return {
        field("E", E, "index set size, at most 12"),
        rational_field("p", p, "probability of ell, a rational such as 3/5"),
        rational_field("ell", ell, "low weight"),
        rational_field("L", L, "high weight"),
        field("f_seed", f_seed, "seed of the pseudorandom tables"),
        field("f_count", f_count, "number of pseudorandom tables"),
        {"f_table", "explicit table of 2^E rationals indexed by bitmask (bit e set: X_e = ell)",
         [this](const std::string& s) { f_table_text = detail::split_list(s); },
         [this] {
           std::string s;
           for (std::size_t i = 0; i < f_table_text.size(); ++i) s += (i ? "," : "") + f_table_text[i];
           return s;
         }},
        list_field("nest", nest, "sizes of nested index sets"),
    };
  }
  std::vector<ConfigField> fields() const { return const_cast<OracleConfig*>(this)->fields(); }

  std::vector<mpq_class> table() const {
    std::vector<mpq_class> f;
    for (const auto& s : f_table_text) f.push_back(detail::parse_rational(s));
    return f;
  }

  std::vector<std::string> validate() const {
    if (E < 0 || E > 12) throw ParamError("E: must lie in [0, 12]");
    if (!(p > 0 && p < 1)) throw ParamError("p: must lie strictly between 0 and 1");
    if (ell > L) throw ParamError("ell: must not exceed L");
    if (f_table_text.empty() && f_count < 1) throw ParamError("f_count: must be >= 1");
    if (!f_table_text.empty() && f_table_text.size() != (std::size_t{1} << E))
      throw ParamError("f_table: needs 2^E entries");
    for (int m : nest)
      if (m < E || m > 12) throw ParamError("nest: sizes must lie in [E, 12]");
    return {};
  }
};

struct ParsedConfig {
  std::vector<std::string> warnings;
  std::map<std::string, int> lines;  // key -> line where it was set
};

// Reads `key = value` lines; '#' starts a comment. Unknown keys, duplicates,
// malformed values and range violations are all collected and reported with
// their line numbers.
template <class Config>
ParsedConfig parse_config(std::istream& is, Config& cfg, const std::string& source = "<config>") {
  auto fs = cfg.fields();
  std::map<std::string, ConfigField*> by_key;
  for (auto& f : fs) by_key[f.key] = &f;
  ParsedConfig out;
  std::vector<std::string> errors;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto where = source + ":" + std::to_string(line) + ": ";
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (out.lines.count(key)) {
      errors.push_back(where + "key '" + key + "' already set on line " + std::to_string(out.lines[key]));
      continue;
    }
    out.lines[key] = line;
    try {
      it->second->set(value);
    } catch (const std::exception& e) {
      errors.push_back(where + key + ": " + e.what());
    }
  }
  if (errors.empty()) {
    try {
      out.warnings = cfg.validate();
    } catch (const ParamError& e) {
      const std::string msg = e.what();
      const std::string key = msg.substr(0, msg.find(':'));
      const auto at = out.lines.find(key);
      errors.push_back(source + (at != out.lines.end() ? ":" + std::to_string(at->second) : "") + ": " + msg);
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

template <class Config>
ParsedConfig load_config(const std::string& path, Config& cfg) {
  std::ifstream is(path);
  if (!is) throw ConfigError({path + ": cannot open"});
  return parse_config(is, cfg, path);
}

// Every key with its current value, in schema order.
template <class Config>
std::vector<std::pair<std::string, std::string>> echo(const Config& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : cfg.fields()) out.emplace_back(f.key, f.get());
  return out;
}

template <class Config>
std::string serialize(const Config& cfg) {
  std::string s;
  for (const auto& [k, v] : echo(cfg)) s += k + " = " + v + "\n";
  return s;
}

}  // namespace dynperc

#endif  // DYNPERC_CONFIG_HPP
