// lanczos.hpp -- Lanczos eigensolver with full reorthogonalization and the
// staggered convergence-check cadence, the comparison baseline.
#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ci/basis.hpp"
#include "ci/csb.hpp"
#include "ci/lobpcg.hpp"

namespace ci {

struct LanczosOptions {
  int k_want = 8;
  double tol = 1e-6;
  int max_iter = 500;
  // Checkpoint hook: step count, Lanczos basis (D x m), tridiagonal
  // coefficients.
  std::function<void(int, const Eigen::MatrixXd&, const std::vector<double>&,
                     const std::vector<double>&)>
      observer;
};

// Convergence is evaluated only on the staggered grid: every 10 steps up to
// 100, every 20 up to 200, then every 40.
bool lanczos_checkpoint(int m);

// Deterministic default start: the normalized all-ones vector on the lowest
// quanta stratum.
Eigen::VectorXd lanczos_default_start(const BasisTable& basis);

// Same residual convention and report schema as lobpcg_solve; each step
// reorthogonalizes the new vector against the whole basis. A breakdown
// restarts with a seeded random vector orthogonal to the current basis.
SolveReport lanczos_solve(const CsbMatrix& h, const Eigen::VectorXd& v0,
                          const LanczosOptions& options);

}  // namespace ci
