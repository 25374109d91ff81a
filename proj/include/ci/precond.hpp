// precond.hpp -- tile-partitioned block-diagonal preconditioner with
// per-column shifts and fused FOM inner solves.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ci/block_vectors.hpp"

namespace ci {

struct TileDiagonal;  // hamiltonian.hpp

struct PrecondConfig {
  int inner_iters = 3;            // FOM iteration cap, 1..3
  int small_block_cutoff = 64;    // direct dense solve at or below this size
  int engage_after = 3;           // no preconditioning for the first 3 iterates
  double relres_gate = 1e-1;      // idle while (lambda_1, x_1) is above this
  double near_converged_factor = 10.0;  // "nearly converged": relres <= 10*tol
  double far_threshold = 1e-2;          // "far from converged": relres > this
  // Per-column idle gate: once a column is this close to converged the
  // backed-off shift sits next to a tile-block eigenvalue and the solve only
  // amplifies directions already in the trial block, so the raw residual is
  // the better search direction.
  double column_floor_factor = 100.0;   // disengage column at relres <= 100*tol
};

struct ShiftPlan {
  std::vector<double> mu;     // one shift per column
  std::vector<bool> engage;   // per-column engagement
};

struct ShiftInputs {
  std::vector<double> theta;
  std::vector<double> res_norm;  // ||r_j||
  std::vector<double> x_norm;    // ||x_j||
  std::vector<double> relres;    // ||r_j|| / (norm_est ||x_j||)
};

// The conservative engagement rules: no preconditioning in the first
// engage_after iterates or while the first pair is far off; nearly converged
// columns get mu_i = theta_i - 2 ||r_i|| / ||x_i||; the first far-from-
// converged column (all earlier ones not far) propagates its predecessor's
// shift to every later column; mu_j = theta_j otherwise.
ShiftPlan choose_shifts(const ShiftInputs& in, int iteration, double tol,
                        const PrecondConfig& config);

// Approximately solve (H_tile - mu_j I) w_j = r_j per group block: dense LU
// at or below small_block_cutoff, otherwise up to inner_iters fused FOM
// steps. Columns with engage = false pass through unchanged.
BlockVectors apply_preconditioner(const TileDiagonal& tiles, const BlockVectors& r,
                                  const ShiftPlan& plan, const PrecondConfig& config);

// FOM iterate from the Krylov space K_iters(block - mu_j I, rhs_j), all
// right-hand sides advanced together so each Krylov step is one dense
// matrix-matrix product. Lucky breakdown returns the exact solution for the
// affected column; a zero right-hand side returns zero.
Eigen::MatrixXd fom_solve(const Eigen::MatrixXd& block, const std::vector<double>& mu,
                          const Eigen::MatrixXd& rhs, int iters);

}  // namespace ci
