// lanczos.cpp
#include "ci/lanczos.hpp"

#include <cmath>

#include "ci/errors.hpp"
#include "ci/rng.hpp"

namespace ci {

bool lanczos_checkpoint(int m) {
  if (m <= 100) return m % 10 == 0;
  if (m <= 200) return m % 20 == 0;
  return m % 40 == 0;
}

Eigen::VectorXd lanczos_default_start(const BasisTable& basis) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.dimension());
  const std::uint32_t end = basis.stratum_end(0);
  for (std::uint32_t i = 0; i < end; ++i) v(i) = 1.0;
  return v / v.norm();
}

SolveReport lanczos_solve(const CsbMatrix& h, const Eigen::VectorXd& v0,
                          const LanczosOptions& opt) {
  const std::uint32_t dim = h.dim;
  if (static_cast<std::uint32_t>(v0.size()) != dim)
    throw DimensionMismatch("lanczos: v0 dim != matrix dim");
  if (v0.norm() == 0.0) throw ConfigError("lanczos: v0 must be nonzero");
  if (opt.k_want < 1) throw ConfigError("lanczos: k_want must be >= 1");

  SolveReport report;
  const int max_steps = std::min<int>(opt.max_iter, static_cast<int>(dim));

  Eigen::MatrixXd basis(dim, max_steps + 1);
  basis.col(0) = v0 / v0.norm();
  std::vector<double> alpha, beta;  // beta[i] couples steps i and i+1

  BlockVectors work(dim, 1);
  auto apply_h = [&](const Eigen::VectorXd& v) {
    for (std::uint32_t i = 0; i < dim; ++i) work.at(i, 0) = v(i);
    ++report.counters.spmm_calls;
    ++report.counters.spmv_equivalents;
    BlockVectors u = spmm(h, work);
    Eigen::VectorXd out(dim);
    for (std::uint32_t i = 0; i < dim; ++i) out(i) = u.at(i, 0);
    return out;
  };

  Eigen::VectorXd ritz;
  Eigen::MatrixXd ritz_vecs;
  int factorized_steps = 0;

  auto factorize = [&](int m) {
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag(i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) sub(i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    ritz = es.eigenvalues();
    ritz_vecs = es.eigenvectors();
    factorized_steps = m;
  };

  std::uint64_t restart_counter = 0;
  for (int m = 1; m <= max_steps; ++m) {
    Eigen::VectorXd w = apply_h(basis.col(m - 1));
    double a = basis.col(m - 1).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(m - 1);
    if (m >= 2) w -= beta[m - 2] * basis.col(m - 2);
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd coeff = basis.leftCols(m).transpose() * w;
      w -= basis.leftCols(m) * coeff;
    }
    ++report.counters.orthogonalizations;

    double b = w.norm();
    double scale = std::max(std::fabs(a), 1.0);
    if (b <= 1e-13 * scale) {
      // Invariant subspace: restart with a random direction orthogonal to
      // the basis built so far.
      Eigen::VectorXd r(dim);
      for (std::uint32_t i = 0; i < dim; ++i)
        r(i) = symmetric_double(0x4C414E43ull + restart_counter, i, m);
      ++restart_counter;
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd coeff = basis.leftCols(m).transpose() * r;
        r -= basis.leftCols(m) * coeff;
      }
      if (r.norm() == 0.0) break;  // space exhausted
      w = r;
      b = 0.0;  // the tridiagonal decouples at a true invariant subspace
      basis.col(m) = w / w.norm();
      beta.push_back(b);
    } else {
      basis.col(m) = w / b;
      beta.push_back(b);
    }

    const bool last = m == max_steps;
    if (!lanczos_checkpoint(m) && !last) continue;

    factorize(m);
    report.norm_estimate = std::max(
        {report.norm_estimate, std::fabs(ritz(0)), std::fabs(ritz(m - 1))});
    const int k = std::min(opt.k_want, m);

    bool all_converged = k >= opt.k_want;
    for (int j = 0; j < k; ++j) {
      // Residual norm of a tridiagonal Ritz pair: |beta_m| times the bottom
      // eigenvector component; exact under full reorthogonalization.
      double res = std::fabs(beta[m - 1]) * std::fabs(ritz_vecs(m - 1, j));
      double relres = res / std::max(report.norm_estimate, 1e-300);
      report.history.push_back({m, j, relres, ritz(j)});
      if (relres > opt.tol) all_converged = false;
    }
    if (opt.observer) opt.observer(m, basis.leftCols(m), alpha, beta);
    report.iterations = m;

    if (all_converged) {
      report.converged = true;
      break;
    }
  }

  if (factorized_steps == 0) factorize(static_cast<int>(alpha.size()));
  const int k = std::min<int>(opt.k_want, factorized_steps);
  report.eigenvalues.assign(ritz.data(), ritz.data() + k);
  Eigen::MatrixXd x =
      basis.leftCols(factorized_steps) * ritz_vecs.leftCols(k);
  report.eigenvectors = BlockVectors::from_matrix(x);
  report.trial_vectors = report.eigenvectors;
  return report;
}

}  // namespace ci
