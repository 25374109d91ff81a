// precond.cpp
#include "ci/precond.hpp"

#include <cmath>
#include <iostream>
#include <map>

#include "ci/errors.hpp"
#include "ci/hamiltonian.hpp"

namespace ci {

ShiftPlan choose_shifts(const ShiftInputs& in, int iteration, double tol,
                        const PrecondConfig& config) {
  const std::size_t k = in.theta.size();
  ShiftPlan plan;
  plan.mu = in.theta;
  plan.engage.assign(k, true);

  if (iteration <= config.engage_after) {
    plan.engage.assign(k, false);
  } else if (!in.relres.empty() && in.relres[0] > config.relres_gate) {
    plan.engage.assign(k, false);
  } else {
    for (std::size_t j = 0; j < k; ++j)
      if (in.relres[j] <= config.column_floor_factor * tol) plan.engage[j] = false;
  }

  // mu_j = theta_j - 2 ||r_j|| / ||x_j||, clamped from above by the first
  // column's shift. Tile-block eigenvalues interlace above lambda_1, so a
  // shift held below theta_1 - 2||r_1|| keeps every shifted block away from
  // singularity; an unclamped interior shift would sit next to a block
  // eigenvalue and the solve would only amplify directions the trial block
  // already contains.
  for (std::size_t j = 0; j < k; ++j) {
    double backed = in.theta[j] - 2.0 * in.res_norm[j] / in.x_norm[j];
    plan.mu[j] = j == 0 ? backed : std::min(backed, plan.mu[0]);
  }

  // First far-from-converged column, with every earlier one not far: its
  // predecessor's shift carries to all later columns. When the first column
  // is itself far, its own shift carries; later shifts would sit deep inside
  // the tile spectra and the solves turn into noise amplifiers.
  std::size_t first_far = k;
  for (std::size_t i = 0; i < k; ++i)
    if (in.relres[i] > config.far_threshold) {
      first_far = i;
      break;
    }
  if (first_far < k) {
    const double carried = plan.mu[first_far > 0 ? first_far - 1 : 0];
    for (std::size_t t = first_far; t < k; ++t) plan.mu[t] = carried;
  }
  return plan;
}

namespace {

// Dense shifted solve with the singularity fallback: perturb the shift once,
// then pass the right-hand side through unchanged.
void direct_solve(const Eigen::MatrixXd& block, double mu, Eigen::MatrixXd& rhs_inout) {
  const int n = static_cast<int>(block.rows());
  auto try_solve = [&](double shift, Eigen::MatrixXd& out) {
    Eigen::MatrixXd a = block - shift * Eigen::MatrixXd::Identity(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    double scale = std::max(diag.maxCoeff(), 1e-300);
    if (diag.minCoeff() <= 1e-14 * scale) return false;
    out = lu.solve(rhs_inout);
    return true;
  };
  Eigen::MatrixXd solved;
  if (try_solve(mu, solved)) {
    rhs_inout = std::move(solved);
    return;
  }
  double perturbed = mu + 1e-8 * (1.0 + std::fabs(mu));
  if (try_solve(perturbed, solved)) {
    rhs_inout = std::move(solved);
    return;
  }
  std::cerr << "ci-eigen: singular shifted tile block; passing residual through\n";
}

}  // namespace

Eigen::MatrixXd fom_solve(const Eigen::MatrixXd& block, const std::vector<double>& mu,
                          const Eigen::MatrixXd& rhs, int iters) {
  if (iters < 1) throw ConfigError("fom_solve: iters must be >= 1");
  const int n = static_cast<int>(block.rows());
  const int k = static_cast<int>(rhs.cols());
  if (static_cast<int>(mu.size()) != k)
    throw DimensionMismatch("fom_solve: one shift per right-hand side");
  const int m_max = std::min(iters, n);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, k);
  std::vector<Eigen::MatrixXd> basis(k);    // n x (m+1) Arnoldi vectors
  std::vector<Eigen::MatrixXd> hess(k);     // (m+1) x m Hessenberg
  std::vector<double> beta(k);
  std::vector<int> steps(k, 0);
  std::vector<bool> active(k, false);

  for (int j = 0; j < k; ++j) {
    beta[j] = rhs.col(j).norm();
    if (beta[j] == 0.0) continue;  // zero right-hand side stays zero
    basis[j].resize(n, m_max + 1);
    hess[j] = Eigen::MatrixXd::Zero(m_max + 1, m_max);
    basis[j].col(0) = rhs.col(j) / beta[j];
    active[j] = true;
  }

  auto finish = [&](int j, int m) {
    Eigen::MatrixXd hm = hess[j].topLeftCorner(m, m);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
    e1(0) = beta[j];
    Eigen::VectorXd y = hm.partialPivLu().solve(e1);
    x.col(j) = basis[j].leftCols(m) * y;
    active[j] = false;
  };

  for (int m = 0; m < m_max; ++m) {
    std::vector<int> cols;
    for (int j = 0; j < k; ++j)
      if (active[j]) cols.push_back(j);
    if (cols.empty()) break;

    // One dense product advances every Krylov space at once.
    Eigen::MatrixXd vm(n, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) vm.col(c) = basis[cols[c]].col(m);
    Eigen::MatrixXd z = block * vm;

    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int j = cols[c];
      Eigen::VectorXd w = z.col(c) - mu[j] * vm.col(c);
      double scale = std::max(beta[j], w.norm());
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= m; ++i) {
          double hij = basis[j].col(i).dot(w);
          if (pass == 0) hess[j](i, m) = hij;
          else hess[j](i, m) += hij;
          w -= hij * basis[j].col(i);
        }
      }
      double norm = w.norm();
      steps[j] = m + 1;
      if (norm <= 1e-12 * std::max(scale, 1.0)) {
        hess[j](m + 1, m) = 0.0;
        finish(j, m + 1);  // lucky breakdown: Krylov space saturated, solve exact
        continue;
      }
      hess[j](m + 1, m) = norm;
      basis[j].col(m + 1) = w / norm;
    }
  }
  for (int j = 0; j < k; ++j)
    if (active[j]) finish(j, steps[j]);
  return x;
}

BlockVectors apply_preconditioner(const TileDiagonal& tiles, const BlockVectors& r,
                                  const ShiftPlan& plan, const PrecondConfig& config) {
  if (plan.mu.size() != r.width() || plan.engage.size() != r.width())
    throw DimensionMismatch("apply_preconditioner: plan width != residual width");
  if (tiles.group_count() > 0 && tiles.ranges.back().second != r.dim())
    throw DimensionMismatch("apply_preconditioner: tiles do not cover the basis");

  BlockVectors w = r;  // pass-through for disengaged columns
  std::vector<int> engaged;
  for (std::uint32_t j = 0; j < r.width(); ++j)
    if (plan.engage[j]) engaged.push_back(static_cast<int>(j));
  if (engaged.empty()) return w;

  const std::int64_t ng = tiles.group_count();
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t g = 0; g < ng; ++g) {
    const Eigen::MatrixXd& block = tiles.blocks[g];
    auto [s, e] = tiles.ranges[g];
    const int n = static_cast<int>(e - s);

    Eigen::MatrixXd rhs(n, engaged.size());
    for (int i = 0; i < n; ++i)
      for (std::size_t c = 0; c < engaged.size(); ++c)
        rhs(i, c) = r.at(s + i, engaged[c]);

    if (n <= config.small_block_cutoff) {
      // Columns sharing a shift share the factorization.
      std::map<double, std::vector<int>> by_shift;
      for (std::size_t c = 0; c < engaged.size(); ++c)
        by_shift[plan.mu[engaged[c]]].push_back(static_cast<int>(c));
      for (auto& [shift, cols] : by_shift) {
        Eigen::MatrixXd sub(n, cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) sub.col(c) = rhs.col(cols[c]);
        direct_solve(block, shift, sub);
        for (std::size_t c = 0; c < cols.size(); ++c) rhs.col(cols[c]) = sub.col(c);
      }
    } else {
      std::vector<double> mu(engaged.size());
      for (std::size_t c = 0; c < engaged.size(); ++c) mu[c] = plan.mu[engaged[c]];
      rhs = fom_solve(block, mu, rhs, config.inner_iters);
    }

    for (int i = 0; i < n; ++i)
      for (std::size_t c = 0; c < engaged.size(); ++c)
        w.at(s + i, engaged[c]) = rhs(i, c);
  }
  return w;
}

}  // namespace ci
