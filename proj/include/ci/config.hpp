// config.hpp -- run configuration: flat key=value serialization plus the
// validated bridge into module options.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ci/basis.hpp"

namespace ci {

struct RunConfig {
  // Basis
  int Z = 3;
  int N = 3;
  int M2 = 0;
  int parity = +1;
  int nmax = 2;
  double hbar_omega = 1.0;
  // Hamiltonian
  int d = 2;
  std::uint32_t beta = 2000;
  std::uint64_t seed = 1;
  double offdiag_scale = 0.1;
  std::string elements;       // coordinate file; empty = synthetic
  std::string storage = "single";  // or "double"
  // Solver
  std::string solver = "lobpcg";   // or "lanczos"
  int k_want = 8;
  int k_trial = 0;                 // 0 = ceil(1.5 * k_want)
  double tol = 1e-6;
  int max_iter = 500;
  std::string precond = "none";    // or "tile"
  int precond_inner_iters = 3;
  int precond_direct_cutoff = 64;
  std::string guess = "random";    // random | pad | multilevel | file:PATH
  int levels = 3;
  // Artifacts
  std::string history;        // CSV path; empty = stdout summary only
  std::string save_vectors;   // BVEC path
  int threads = 0;            // 0 = library default

  int trial_width() const { return k_trial > 0 ? k_trial : (3 * k_want + 1) / 2; }
  BasisSpec basis_spec() const {
    return BasisSpec{Z, N, M2, parity, nmax, hbar_omega};
  }
  void validate() const;  // throws ConfigError

  bool operator==(const RunConfig&) const = default;
};

// Flat `key=value` text, one pair per line, '#' comments.
std::string serialize_config(const RunConfig& config);
RunConfig parse_config(std::istream& is);
RunConfig parse_config_file(const std::string& path);

}  // namespace ci
