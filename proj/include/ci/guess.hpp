// guess.hpp -- LOBPCG starting blocks: zero-padded sub-space solutions, the
// solve-corrected variant (testing scale), multi-level recursion, and vector
// files for warm starts from related Hamiltonians.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ci/basis.hpp"
#include "ci/block_vectors.hpp"
#include "ci/hamiltonian.hpp"
#include "ci/lobpcg.hpp"

namespace ci {

// Rows [0, X1.dim) copied, the rest zero; orthonormality is preserved
// exactly.
BlockVectors pad_from_subspace(const BlockVectors& x1, std::uint32_t dim);

// Column j = [x1_j; -(H22 - theta_j I)^{-1} H21 x1_j], orthonormalized.
// Dense H, testing scale only. Throws SingularShift when theta_j hits the
// spectrum of H22.
BlockVectors corrected_guess(const BlockVectors& x1, const std::vector<double>& theta1,
                             const Eigen::MatrixXd& h_dense);

struct LevelReport {
  int nmax;
  std::uint32_t dim;
  int iterations;
  bool converged;
  double seconds;
};

struct MultilevelResult {
  BlockVectors guess;  // width k_trial, over the full space
  std::vector<LevelReport> levels;
};

// Assembles the problem for one truncation level.
using ProblemFactory = std::function<Problem(const BasisSpec&)>;

struct MultilevelOptions {
  int levels = 3;
  int k_want = 8;
  int k_trial = 12;
  double tol = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 1;
};

// Chain of LOBPCG runs at Nmax - 2(levels-1), ..., Nmax - 2, random guess at
// the smallest level, each solution zero-padded into the next space. The
// level solves run unpreconditioned so the resulting guess depends only on
// the seed. levels is clamped so the smallest Nmax stays non-negative;
// levels = 1 yields the plain random guess.
MultilevelResult multilevel_guess(const BasisSpec& spec, const MultilevelOptions& options,
                                  const ProblemFactory& factory);

// BVEC vector file: magic, dimension, width, column-major doubles
// (little-endian); lossless.
void save_vectors(const BlockVectors& x, const std::string& path);

// First k columns of the file, orthonormalized. Throws FormatError,
// DimensionMismatch.
BlockVectors load_guess_file(const std::string& path, std::uint32_t dim, std::uint32_t k);

}  // namespace ci
