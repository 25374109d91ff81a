// lobpcg.hpp -- locally optimal block preconditioned conjugate gradient
// eigensolver with Rayleigh-Ritz over span{X, W, P}.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ci/block_vectors.hpp"
#include "ci/csb.hpp"
#include "ci/hamiltonian.hpp"
#include "ci/precond.hpp"

namespace ci {

struct HistoryRow {
  int iteration;
  int column;
  double relres;
  double theta;
};

struct OperationCounters {
  std::uint64_t spmm_calls = 0;
  std::uint64_t spmv_equivalents = 0;  // spmm calls weighted by block width
  std::uint64_t precond_applications = 0;
  std::uint64_t orthogonalizations = 0;
};

struct SolveReport {
  std::vector<double> eigenvalues;  // ascending, k_want of them
  BlockVectors eigenvectors;        // width k_want
  BlockVectors trial_vectors;       // full trial block (LOBPCG only)
  std::vector<HistoryRow> history;
  OperationCounters counters;
  bool converged = false;           // false means MaxIterationsExceeded
  int iterations = 0;               // LOBPCG updates / Lanczos steps performed
  double norm_estimate = 0.0;       // largest |Ritz value| observed
};

// Per-iteration view handed to an optional observer (used by invariant
// tests); X has the trial width and Theta the matching Ritz values.
struct IterationView {
  int iteration;
  const BlockVectors& X;
  const std::vector<double>& theta;
  const std::vector<double>& relres;
};

struct LobpcgOptions {
  int k_want = 8;
  double tol = 1e-6;
  int max_iter = 500;
  const TileDiagonal* preconditioner = nullptr;  // null: unpreconditioned
  PrecondConfig precond_config;
  std::function<void(const IterationView&)> observer;
};

// X0 supplies the trial block (width k_trial >= k_want, columns linearly
// independent). Returns the best available pairs with converged = false when
// max_iter runs out; throws SubspaceCollapse when fewer than k_want
// independent directions survive orthonormalization.
SolveReport lobpcg_solve(const CsbMatrix& h, const BlockVectors& x0,
                         const LobpcgOptions& options);

struct SubspaceCoefficients {
  Eigen::MatrixXd g;  // basis_width x k_trial, columns = Ritz coefficients
  int x_width = 0;
  int w_width = 0;
  int p_width = 0;

  Eigen::MatrixXd g1() const { return g.topRows(x_width); }
  Eigen::MatrixXd g2() const { return g.middleRows(x_width, w_width); }
  Eigen::MatrixXd g3() const { return g.bottomRows(p_width); }
};

// Projected eigenproblem on an orthonormal basis Y with HY precomputed:
// Theta gets the k_trial smallest Ritz values. Throws IndefiniteGram when
// Y^T Y deviates from the identity.
std::pair<std::vector<double>, SubspaceCoefficients> rayleigh_ritz(
    const BlockVectors& y_basis, const BlockVectors& hy, int k_trial,
    int x_width = -1, int w_width = 0, int p_width = 0);

// Block projection against `against` (when given) followed by a
// rank-revealing factorization of the Gram panel; columns whose
// post-projection norm falls below drop_tol times their original norm are
// dropped. Output columns are orthonormal to ~1e-14.
BlockVectors orthonormalize(const BlockVectors& y, double drop_tol = 1e-8,
                            const BlockVectors* against = nullptr);

// Per-column ||H x_j - theta_j x_j|| / (norm_est * ||x_j||). When norm_est
// is not given, max|theta| is used.
std::vector<double> residual_norms(const CsbMatrix& h, const BlockVectors& x,
                                   const std::vector<double>& theta,
                                   std::optional<double> norm_est = std::nullopt);

// History CSV with the schema `iter,col,relres,theta`.
void write_history_csv(const SolveReport& report, std::ostream& os);

}  // namespace ci
