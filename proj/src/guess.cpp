// guess.cpp
#include "ci/guess.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ci/errors.hpp"
#include "ci/rng.hpp"

namespace ci {

BlockVectors pad_from_subspace(const BlockVectors& x1, std::uint32_t dim) {
  if (x1.dim() > dim) throw DimensionMismatch("pad_from_subspace: source exceeds target");
  BlockVectors out(dim, x1.width());
  for (std::uint32_t i = 0; i < x1.dim(); ++i) {
    const double* src = x1.row(i);
    double* dst = out.row(i);
    for (std::uint32_t j = 0; j < x1.width(); ++j) dst[j] = src[j];
  }
  return out;
}

BlockVectors corrected_guess(const BlockVectors& x1, const std::vector<double>& theta1,
                             const Eigen::MatrixXd& h_dense) {
  const std::uint32_t d1 = x1.dim();
  const std::uint32_t d = static_cast<std::uint32_t>(h_dense.rows());
  if (d1 > d) throw DimensionMismatch("corrected_guess: sub-space exceeds target");
  if (theta1.size() != x1.width())
    throw DimensionMismatch("corrected_guess: one theta per column");
  const std::uint32_t d2 = d - d1;

  Eigen::MatrixXd h21 = h_dense.block(d1, 0, d2, d1);
  Eigen::MatrixXd h22 = h_dense.block(d1, d1, d2, d2);
  Eigen::MatrixXd x1m = x1.to_matrix();

  Eigen::MatrixXd out(d, x1.width());
  for (std::uint32_t j = 0; j < x1.width(); ++j) {
    Eigen::MatrixXd shifted =
        h22 - theta1[j] * Eigen::MatrixXd::Identity(d2, d2);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
    Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() <= 1e-14 * std::max(diag.maxCoeff(), 1e-300))
      throw SingularShift("theta_" + std::to_string(j) +
                          " lies in the spectrum of H22");
    out.col(j).head(d1) = x1m.col(j);
    out.col(j).tail(d2) = -lu.solve(h21 * x1m.col(j));
  }
  return orthonormalize(BlockVectors::from_matrix(out));
}

namespace {

// A level space can be narrower than the trial block; top the padded guess
// up with seeded random directions orthogonal to it.
BlockVectors widen_to(BlockVectors x, std::uint32_t k_trial, std::uint64_t seed) {
  if (x.width() >= k_trial) return x;
  BlockVectors extra = random_block(x.dim(), k_trial - x.width(), mix64(seed) + 1);
  extra = orthonormalize(extra, 1e-8, &x);
  return BlockVectors::hcat(x, extra);
}

}  // namespace

MultilevelResult multilevel_guess(const BasisSpec& spec, const MultilevelOptions& options,
                                  const ProblemFactory& factory) {
  spec.validate();
  int levels = std::max(1, options.levels);
  while (levels > 1 && spec.Nmax - 2 * (levels - 1) < 0) --levels;
  const std::uint32_t k_trial = static_cast<std::uint32_t>(options.k_trial);

  MultilevelResult result;
  if (levels == 1) {
    const BasisTable full = enumerate_many_body_basis(spec);
    result.guess =
        orthonormalize(random_block(full.dimension(), k_trial, options.seed));
    return result;
  }

  BlockVectors carried;  // trial block of the previous level
  for (int level = 0; level < levels - 1; ++level) {
    BasisSpec level_spec = spec;
    level_spec.Nmax = spec.Nmax - 2 * (levels - 1 - level);
    auto t0 = std::chrono::steady_clock::now();
    Problem problem = factory(level_spec);

    std::uint32_t width = std::min<std::uint32_t>(k_trial, problem.matrix.dim);
    BlockVectors x0;
    if (level == 0) {
      x0 = orthonormalize(random_block(problem.matrix.dim, width, options.seed));
    } else {
      x0 = widen_to(pad_from_subspace(carried, problem.matrix.dim), width,
                    options.seed + level);
    }
    if (x0.width() < static_cast<std::uint32_t>(options.k_want))
      throw SubspaceCollapse("level guess lost too many columns");

    LobpcgOptions lopt;
    lopt.k_want = options.k_want;
    lopt.tol = options.tol;
    lopt.max_iter = options.max_iter;
    SolveReport report = lobpcg_solve(problem.matrix, x0, lopt);
    carried = report.trial_vectors;

    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    result.levels.push_back({level_spec.Nmax, problem.matrix.dim, report.iterations,
                             report.converged, seconds});
  }

  const BasisTable full = enumerate_many_body_basis(spec);
  result.guess = widen_to(pad_from_subspace(carried, full.dimension()), k_trial,
                          options.seed + levels);
  return result;
}

void save_vectors(const BlockVectors& x, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os.write("BVEC", 4);
  std::uint64_t dim = x.dim();
  std::uint32_t width = x.width();
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  os.write(reinterpret_cast<const char*>(&width), sizeof width);
  // column-major payload
  for (std::uint32_t j = 0; j < width; ++j)
    for (std::uint32_t i = 0; i < x.dim(); ++i) {
      double v = x.at(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

BlockVectors load_guess_file(const std::string& path, std::uint32_t dim,
                             std::uint32_t k) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BVEC", 4) != 0)
    throw FormatError("bad magic; not a BVEC file: " + path);
  std::uint64_t file_dim = 0;
  std::uint32_t width = 0;
  is.read(reinterpret_cast<char*>(&file_dim), sizeof file_dim);
  is.read(reinterpret_cast<char*>(&width), sizeof width);
  if (!is) throw FormatError("truncated BVEC header: " + path);
  if (file_dim != dim)
    throw DimensionMismatch("vector file dimension " + std::to_string(file_dim) +
                            " != basis dimension " + std::to_string(dim));
  if (width < k)
    throw DimensionMismatch("vector file holds " + std::to_string(width) +
                            " columns, need " + std::to_string(k));
  BlockVectors out(dim, k);
  for (std::uint32_t j = 0; j < width && j < k; ++j)
    for (std::uint32_t i = 0; i < dim; ++i) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!is) throw FormatError("truncated BVEC payload: " + path);
      out.at(i, j) = v;
    }
  return orthonormalize(out);
}

}  // namespace ci
