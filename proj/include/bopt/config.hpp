#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bopt/problems.hpp"
#include "bopt/solvers.hpp"
#include "bopt/trace_io.hpp"
#include "bopt/types.hpp"

namespace bopt {

/// Experiment description, parsed from a plain key = value file.
/// Solver settings apply to every solver; "<solver>.<key> = value" lines
/// override a single one (e.g. "pg.lambda = 0.001").
struct ExperimentConfig {
  Family family = Family::LpLs;
  std::vector<std::pair<int, int>> sizes = {{50, 500}};  ///< (m, n) pairs
  int num_seeds = 20;
  std::uint64_t base_seed = 1;
  double p = 1.2;
  double theta = 0.1;
  double sparsity = 0.1;
  std::vector<Method> solvers = {Method::AbpgVmaw, Method::Abpg, Method::Pg, Method::Pgl};
  std::string output_dir = "out";
  bool zero_time = false;      ///< write wall_ns as 0 for byte-reproducible traces
  bool save_matrices = false;  ///< persist A, b, x_star per instance in BOPT binary
  SolverConfig base;
  std::map<std::string, std::string> overrides;  ///< "solver.key" -> raw value

  /// Instance recipe for one (size, seed) cell. The instance seed is
  /// base_seed + pair_index * num_seeds + seed_index.
  InstanceSpec instance_spec(std::size_t pair_index, int seed_index) const {
    InstanceSpec spec;
    spec.family = family;
    spec.m = sizes[pair_index].first;
    spec.n = sizes[pair_index].second;
    spec.sparsity = sparsity;
    spec.seed = base_seed + static_cast<std::uint64_t>(pair_index) *
                                static_cast<std::uint64_t>(num_seeds) +
                static_cast<std::uint64_t>(seed_index);
    spec.p = p;
    spec.theta = theta;
    return spec;
  }

  SolverConfig solver_config(Method m) const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

inline bool apply_solver_key(SolverConfig& cfg, const std::string& key,
                             const std::string& value) {
  if (key == "lambda") cfg.lambda = std::stod(value);
  else if (key == "c1") cfg.c1 = std::stod(value);
  else if (key == "c2") cfg.c2 = std::stod(value);
  else if (key == "mu") cfg.mu = std::stod(value);
  else if (key == "eta") cfg.eta = std::stod(value);
  else if (key == "delta") cfg.delta = std::stod(value);
  else if (key == "shrink") cfg.shrink = std::stod(value);
  else if (key == "max_iters") cfg.max_iters = std::stoi(value);
  else if (key == "stop_tol") cfg.stop_tol = std::stod(value);
  else if (key == "diagnostics") cfg.diagnostics = parse_bool(value, key);
  else if (key == "max_bracket") cfg.max_bracket = std::stoi(value);
  else if (key == "max_bisect") cfg.max_bisect = std::stoi(value);
  else return false;
  return true;
}

}  // namespace detail

inline SolverConfig ExperimentConfig::solver_config(Method m) const {
  SolverConfig cfg = base;
  cfg.method = m;
  const std::string prefix = method_name(m) + ".";
  for (const auto& [key, value] : overrides) {
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string bare = key.substr(prefix.size());
    if (!detail::apply_solver_key(cfg, bare, value))
      throw ConfigError("config: unknown solver key '" + key + "'");
  }
  return cfg;
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.solvers.clear();
  bool solvers_given = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "family") {
      if (value == "lp_ls") cfg.family = Family::LpLs;
      else if (value == "nonneg_kl") cfg.family = Family::NonnegKl;
      else throw ConfigError("config: unknown family '" + value + "'");
    } else if (key == "sizes") {
      cfg.sizes.clear();
      for (const std::string& item : detail::split_list(value)) {
        const auto x = item.find('x');
        if (x == std::string::npos)
          throw ConfigError("config: sizes entries look like 100x1000, got '" + item + "'");
        cfg.sizes.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
      }
      if (cfg.sizes.empty()) throw ConfigError("config: sizes is empty");
    } else if (key == "num_seeds") {
      cfg.num_seeds = std::stoi(value);
      if (cfg.num_seeds < 1) throw ConfigError("config: num_seeds must be >= 1");
    } else if (key == "base_seed") {
      cfg.base_seed = std::stoull(value);
    } else if (key == "p") {
      cfg.p = std::stod(value);
    } else if (key == "theta") {
      cfg.theta = std::stod(value);
    } else if (key == "sparsity") {
      cfg.sparsity = std::stod(value);
    } else if (key == "solvers") {
      for (const std::string& item : detail::split_list(value))
        cfg.solvers.push_back(method_from_name(item));
      solvers_given = true;
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "timing") {
      if (value == "real") cfg.zero_time = false;
      else if (value == "zero") cfg.zero_time = true;
      else throw ConfigError("config: timing must be real or zero");
    } else if (key == "save_matrices") {
      cfg.save_matrices = detail::parse_bool(value, key);
    } else if (key.find('.') != std::string::npos) {
      method_from_name(key.substr(0, key.find('.')));  // validate the prefix
      cfg.overrides[key] = value;
    } else if (detail::apply_solver_key(cfg.base, key, value)) {
      // shared solver setting
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!solvers_given)
    cfg.solvers = {Method::AbpgVmaw, Method::Abpg, Method::Pg, Method::Pgl};
  if (cfg.solvers.empty()) throw ConfigError("config: solvers is empty");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "family = " << (cfg.family == Family::LpLs ? "lp_ls" : "nonneg_kl") << '\n';
  out << "sizes = ";
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (i) out << ", ";
    out << cfg.sizes[i].first << 'x' << cfg.sizes[i].second;
  }
  out << '\n';
  out << "num_seeds = " << cfg.num_seeds << '\n';
  out << "base_seed = " << cfg.base_seed << '\n';
  out << "p = " << format_double(cfg.p) << '\n';
  out << "theta = " << format_double(cfg.theta) << '\n';
  out << "sparsity = " << format_double(cfg.sparsity) << '\n';
  out << "solvers = ";
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i) {
    if (i) out << ", ";
    out << method_name(cfg.solvers[i]);
  }
  out << '\n';
  out << "output_dir = " << cfg.output_dir << '\n';
  out << "timing = " << (cfg.zero_time ? "zero" : "real") << '\n';
  out << "save_matrices = " << (cfg.save_matrices ? "true" : "false") << '\n';
  if (cfg.base.lambda) out << "lambda = " << format_double(*cfg.base.lambda) << '\n';
  out << "c1 = " << format_double(cfg.base.c1) << '\n';
  out << "c2 = " << format_double(cfg.base.c2) << '\n';
  out << "mu = " << format_double(cfg.base.mu) << '\n';
  out << "eta = " << format_double(cfg.base.eta) << '\n';
  out << "delta = " << format_double(cfg.base.delta) << '\n';
  out << "shrink = " << format_double(cfg.base.shrink) << '\n';
  out << "max_iters = " << cfg.base.max_iters << '\n';
  out << "stop_tol = " << format_double(cfg.base.stop_tol) << '\n';
  out << "diagnostics = " << (cfg.base.diagnostics ? "true" : "false") << '\n';
  out << "max_bracket = " << cfg.base.max_bracket << '\n';
  out << "max_bisect = " << cfg.base.max_bisect << '\n';
  for (const auto& [key, value] : cfg.overrides) out << key << " = " << value << '\n';
  return out.str();
}

}  // namespace bopt
