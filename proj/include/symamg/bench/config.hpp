#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Preconditioner request, e.g. "fsai", "lrcfsai:16", "amgr". The number
/// after the colon is the per-subsystem correction rank where that applies.
struct PrecondSpec {
  std::string name;
  index_t rank = 0;
  bool has_rank = false;  // true when the spec carried an explicit ":k"
};

struct BenchConfig {
  std::string problem = "mirrored";  // mirrored | repeated
  std::vector<index_t> sizes{32};    // cells per axis of the (block) cube
  std::vector<index_t> s_values{1};  // reflection depths (mirrored)
  std::vector<index_t> nb_values{2};  // ring lengths (repeated)
  real_t gamma = 1.5;
  std::vector<PrecondSpec> preconds{{"fsai", 0}};
  std::string method = "auto";  // auto | pcg | gmres
  real_t tol = 1e-8;
  index_t max_iterations = 2000;
  index_t restart = 0;
  index_t repetitions = 1;
  std::uint64_t seed = 42;
  real_t eig_tol = 1e-6;
  index_t fsai_power = 1;  // factor pattern from A (1) or A^2 (2)
  real_t amg_theta = 0.25;
  std::string amg_smoother = "jacobi";  // jacobi | fsai
  std::string amg_interp = "direct";    // direct | distance2
  index_t amg_n_smooth = 1;
  index_t amgr_mis_power = 2;
  index_t amgr_n_smooth = 1;
  index_t amgs_rank = 16;  // interface correction when "amgs" has no :k
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<index_t> parse_index_list(const std::string& s, const std::string& key) {
  std::vector<index_t> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(static_cast<index_t>(std::stol(item)));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad integer '" + item + "' for " + key);
    }
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

inline PrecondSpec parse_precond(const std::string& s) {
  const auto colon = s.find(':');
  PrecondSpec spec;
  spec.name = trim(s.substr(0, colon));
  if (colon != std::string::npos) {
    try {
      spec.rank = static_cast<index_t>(std::stol(s.substr(colon + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad rank in preconditioner '" + s + "'");
    }
    if (spec.rank < 0) throw std::invalid_argument("config: negative rank in '" + s + "'");
    spec.has_rank = true;
  }
  static const char* known[] = {"none", "fsai", "lrcfsai", "amg", "lrcamg", "amgs", "amgr"};
  if (std::none_of(std::begin(known), std::end(known),
                   [&](const char* k) { return spec.name == k; }))
    throw std::invalid_argument("config: unknown preconditioner '" + spec.name + "'");
  return spec;
}

}  // namespace detail

/// Parses "key = value" lines; '#' starts a comment, blank lines are
/// ignored. Unknown keys are an error so typos do not silently fall back to
/// defaults.
inline BenchConfig parse_config(std::istream& in) {
  BenchConfig cfg;
  std::string line;
  index_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (val.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty value");

    if (key == "problem") {
      if (val != "mirrored" && val != "repeated")
        throw std::invalid_argument("config: problem must be mirrored or repeated");
      cfg.problem = val;
    } else if (key == "n") {
      cfg.sizes = detail::parse_index_list(val, key);
    } else if (key == "s") {
      cfg.s_values = detail::parse_index_list(val, key);
    } else if (key == "n_b") {
      cfg.nb_values = detail::parse_index_list(val, key);
    } else if (key == "gamma") {
      cfg.gamma = std::stod(val);
    } else if (key == "preconds") {
      cfg.preconds.clear();
      for (const auto& item : detail::split_list(val))
        cfg.preconds.push_back(detail::parse_precond(item));
      if (cfg.preconds.empty()) throw std::invalid_argument("config: preconds is empty");
    } else if (key == "method") {
      if (val != "auto" && val != "pcg" && val != "gmres")
        throw std::invalid_argument("config: method must be auto, pcg or gmres");
      cfg.method = val;
    } else if (key == "tol") {
      cfg.tol = std::stod(val);
    } else if (key == "max_iterations") {
      cfg.max_iterations = static_cast<index_t>(std::stol(val));
    } else if (key == "restart") {
      cfg.restart = static_cast<index_t>(std::stol(val));
    } else if (key == "repetitions") {
      cfg.repetitions = std::max<index_t>(1, static_cast<index_t>(std::stol(val)));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(val));
    } else if (key == "eig_tol") {
      cfg.eig_tol = std::stod(val);
    } else if (key == "fsai_power") {
      cfg.fsai_power = static_cast<index_t>(std::stol(val));
      if (cfg.fsai_power != 1 && cfg.fsai_power != 2)
        throw std::invalid_argument("config: fsai_power must be 1 or 2");
    } else if (key == "amg_theta") {
      cfg.amg_theta = std::stod(val);
    } else if (key == "amg_smoother") {
      if (val != "jacobi" && val != "fsai")
        throw std::invalid_argument("config: amg_smoother must be jacobi or fsai");
      cfg.amg_smoother = val;
    } else if (key == "amg_interp") {
      if (val != "direct" && val != "distance2")
        throw std::invalid_argument("config: amg_interp must be direct or distance2");
      cfg.amg_interp = val;
    } else if (key == "amg_n_smooth") {
      cfg.amg_n_smooth = static_cast<index_t>(std::stol(val));
    } else if (key == "amgr_mis_power") {
      cfg.amgr_mis_power = static_cast<index_t>(std::stol(val));
    } else if (key == "amgr_n_smooth") {
      cfg.amgr_n_smooth = static_cast<index_t>(std::stol(val));
    } else if (key == "amgs_rank") {
      cfg.amgs_rank = static_cast<index_t>(std::stol(val));
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  return cfg;
}

inline BenchConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

inline BenchConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace symamg
