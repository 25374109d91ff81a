// config.cpp
#include "ci/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ci/errors.hpp"

namespace ci {

void RunConfig::validate() const {
  basis_spec().validate();
  if (d < 1) throw ConfigError("d must be >= 1");
  if (d > Z + N) throw ConfigError("d exceeds the particle count");
  if (beta < 1 || beta >= (1u << 16)) throw ConfigError("beta must be in [1, 65535]");
  if (storage != "single" && storage != "double")
    throw ConfigError("storage must be single or double");
  if (solver != "lobpcg" && solver != "lanczos")
    throw ConfigError("solver must be lobpcg or lanczos");
  if (k_want < 1) throw ConfigError("k must be >= 1");
  if (k_trial != 0 && k_trial < k_want) throw ConfigError("k_trial must be >= k");
  if (!(tol > 0)) throw ConfigError("tol must be positive");
  if (max_iter < 1) throw ConfigError("maxit must be >= 1");
  if (precond != "none" && precond != "tile")
    throw ConfigError("precond must be none or tile");
  if (precond_inner_iters < 1 || precond_inner_iters > 3)
    throw ConfigError("precond-inner-iters must be in [1, 3]");
  if (precond_direct_cutoff < 1) throw ConfigError("precond-direct-cutoff must be >= 1");
  if (guess != "random" && guess != "pad" && guess != "multilevel" &&
      guess.rfind("file:", 0) != 0)
    throw ConfigError("guess must be random, pad, multilevel or file:PATH");
  if (levels < 1) throw ConfigError("levels must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "z=" << c.Z << "\n";
  os << "n=" << c.N << "\n";
  os << "m2=" << c.M2 << "\n";
  os << "parity=" << c.parity << "\n";
  os << "nmax=" << c.nmax << "\n";
  os << "hw=" << num(c.hbar_omega) << "\n";
  os << "d=" << c.d << "\n";
  os << "beta=" << c.beta << "\n";
  os << "seed=" << c.seed << "\n";
  os << "offdiag-scale=" << num(c.offdiag_scale) << "\n";
  os << "elements=" << c.elements << "\n";
  os << "storage=" << c.storage << "\n";
  os << "solver=" << c.solver << "\n";
  os << "k=" << c.k_want << "\n";
  os << "k-trial=" << c.k_trial << "\n";
  os << "tol=" << num(c.tol) << "\n";
  os << "maxit=" << c.max_iter << "\n";
  os << "precond=" << c.precond << "\n";
  os << "precond-inner-iters=" << c.precond_inner_iters << "\n";
  os << "precond-direct-cutoff=" << c.precond_direct_cutoff << "\n";
  os << "guess=" << c.guess << "\n";
  os << "levels=" << c.levels << "\n";
  os << "history=" << c.history << "\n";
  os << "save-vectors=" << c.save_vectors << "\n";
  os << "threads=" << c.threads << "\n";
  return os.str();
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"z", [&](const std::string& v) { c.Z = std::stoi(v); }},
      {"n", [&](const std::string& v) { c.N = std::stoi(v); }},
      {"m2", [&](const std::string& v) { c.M2 = std::stoi(v); }},
      {"parity", [&](const std::string& v) { c.parity = std::stoi(v); }},
      {"nmax", [&](const std::string& v) { c.nmax = std::stoi(v); }},
      {"hw", [&](const std::string& v) { c.hbar_omega = std::stod(v); }},
      {"d", [&](const std::string& v) { c.d = std::stoi(v); }},
      {"beta", [&](const std::string& v) { c.beta = static_cast<std::uint32_t>(std::stoul(v)); }},
      {"seed", [&](const std::string& v) { c.seed = std::stoull(v); }},
      {"offdiag-scale", [&](const std::string& v) { c.offdiag_scale = std::stod(v); }},
      {"elements", [&](const std::string& v) { c.elements = v; }},
      {"storage", [&](const std::string& v) { c.storage = v; }},
      {"solver", [&](const std::string& v) { c.solver = v; }},
      {"k", [&](const std::string& v) { c.k_want = std::stoi(v); }},
      {"k-trial", [&](const std::string& v) { c.k_trial = std::stoi(v); }},
      {"tol", [&](const std::string& v) { c.tol = std::stod(v); }},
      {"maxit", [&](const std::string& v) { c.max_iter = std::stoi(v); }},
      {"precond", [&](const std::string& v) { c.precond = v; }},
      {"precond-inner-iters", [&](const std::string& v) { c.precond_inner_iters = std::stoi(v); }},
      {"precond-direct-cutoff", [&](const std::string& v) { c.precond_direct_cutoff = std::stoi(v); }},
      {"guess", [&](const std::string& v) { c.guess = v; }},
      {"levels", [&](const std::string& v) { c.levels = std::stoi(v); }},
      {"history", [&](const std::string& v) { c.history = v; }},
      {"save-vectors", [&](const std::string& v) { c.save_vectors = v; }},
      {"threads", [&](const std::string& v) { c.threads = std::stoi(v); }},
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t\r");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key " + key);
    try {
      it->second(value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

}  // namespace ci
