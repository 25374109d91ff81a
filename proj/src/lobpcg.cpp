// lobpcg.cpp
#include "ci/lobpcg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ci/errors.hpp"

namespace ci {

namespace {

constexpr double kTinyDiag = 1e-300;

// Pivoted Cholesky on a copy of the Gram matrix; returns the kept column
// set in input order. A column is dropped once its remaining diagonal falls
// below (drop_tol * original norm)^2.
std::vector<std::uint32_t> rank_revealing_select(Eigen::MatrixXd gram,
                                                 const std::vector<double>& orig_sq,
                                                 double drop_tol) {
  const int m = static_cast<int>(gram.rows());
  std::vector<bool> active(m, true);
  std::vector<std::uint32_t> kept;
  for (int step = 0; step < m; ++step) {
    int pivot = -1;
    double best = -1.0;
    for (int j = 0; j < m; ++j)
      if (active[j] && gram(j, j) > best) {
        best = gram(j, j);
        pivot = j;
      }
    if (pivot < 0) break;
    active[pivot] = false;
    const double threshold =
        std::max(drop_tol * drop_tol * orig_sq[pivot], kTinyDiag);
    if (!(gram(pivot, pivot) > threshold)) continue;  // dropped
    kept.push_back(static_cast<std::uint32_t>(pivot));
    const double d = gram(pivot, pivot);
    for (int a = 0; a < m; ++a) {
      if (!active[a]) continue;
      for (int b = 0; b < m; ++b) {
        if (!active[b] && b != a) continue;
        gram(a, b) -= gram(a, pivot) * gram(b, pivot) / d;
      }
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Y <- Y * R^{-1} for upper-triangular R (in-place right solve).
void right_solve_upper(BlockVectors& y, const Eigen::MatrixXd& r) {
  Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  y = linear_combination(y, rinv);
}

// One CholQR pass; returns false when the Gram factorization fails.
bool cholqr_pass(BlockVectors& y, Eigen::MatrixXd* r_out = nullptr) {
  Eigen::MatrixXd g = block_inner(y, y);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) return false;
  Eigen::MatrixXd r = llt.matrixU();
  right_solve_upper(y, r);
  if (r_out) *r_out = r;
  return true;
}

std::vector<double> column_norms_sq(const BlockVectors& y) {
  std::vector<double> out(y.width(), 0.0);
  Eigen::MatrixXd g = block_inner(y, y);
  for (std::uint32_t j = 0; j < y.width(); ++j) out[j] = g(j, j);
  return out;
}

void eig_sym(const Eigen::MatrixXd& a, Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) {
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw IndefiniteGram("projected eigensolver failed to converge");
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
}

}  // namespace

BlockVectors orthonormalize(const BlockVectors& y, double drop_tol,
                            const BlockVectors* against) {
  BlockVectors v = y;
  if (v.width() == 0) return v;
  const std::vector<double> orig_sq = column_norms_sq(y);

  if (against && against->width() > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::MatrixXd c = block_inner(*against, v);
      add_linear_combination(v, *against, -c);
    }
  }

  Eigen::MatrixXd gram = block_inner(v, v);
  std::vector<std::uint32_t> kept = rank_revealing_select(gram, orig_sq, drop_tol);
  while (!kept.empty()) {
    BlockVectors q = v.select_columns(kept);
    Eigen::MatrixXd sub(kept.size(), kept.size());
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = 0; b < kept.size(); ++b) sub(a, b) = gram(kept[a], kept[b]);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd r = llt.matrixU();
      right_solve_upper(q, r);
      cholqr_pass(q);  // second pass tightens to ~1e-15
      return q;
    }
    kept.pop_back();  // shed the weakest column and retry
  }
  return BlockVectors(y.dim(), 0);
}

std::pair<std::vector<double>, SubspaceCoefficients> rayleigh_ritz(
    const BlockVectors& y_basis, const BlockVectors& hy, int k_trial, int x_width,
    int w_width, int p_width) {
  const int m = static_cast<int>(y_basis.width());
  if (k_trial > m) throw DimensionMismatch("rayleigh_ritz: k_trial exceeds basis width");
  if (hy.width() != y_basis.width() || hy.dim() != y_basis.dim())
    throw DimensionMismatch("rayleigh_ritz: HY shape mismatch");

  Eigen::MatrixXd overlap = block_inner(y_basis, y_basis);
  double dev = (overlap - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (dev > 1e-6)
    throw IndefiniteGram("basis overlap deviates from identity by " + std::to_string(dev));

  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  eig_sym(block_inner(y_basis, hy), evals, evecs);

  SubspaceCoefficients coeff;
  coeff.g = evecs.leftCols(k_trial);
  coeff.x_width = x_width < 0 ? m : x_width;
  coeff.w_width = w_width;
  coeff.p_width = p_width;
  std::vector<double> theta(evals.data(), evals.data() + k_trial);
  return {std::move(theta), std::move(coeff)};
}

std::vector<double> residual_norms(const CsbMatrix& h, const BlockVectors& x,
                                   const std::vector<double>& theta,
                                   std::optional<double> norm_est) {
  if (x.width() != theta.size())
    throw DimensionMismatch("residual_norms: theta width mismatch");
  BlockVectors r = spmm(h, x);
  for (std::uint32_t i = 0; i < x.dim(); ++i) {
    double* rr = r.row(i);
    const double* xr = x.row(i);
    for (std::uint32_t j = 0; j < x.width(); ++j) rr[j] -= theta[j] * xr[j];
  }
  std::vector<double> rnorm = column_norms(r);
  std::vector<double> xnorm = column_norms(x);
  double est = norm_est.value_or(0.0);
  if (!(est > 0.0))
    for (double t : theta) est = std::max(est, std::fabs(t));
  std::vector<double> out(x.width());
  for (std::uint32_t j = 0; j < x.width(); ++j) {
    double denom = std::max(est * xnorm[j], kTinyDiag);
    out[j] = rnorm[j] / denom;
  }
  return out;
}

namespace {

struct Workspace {
  BlockVectors x, hx, p, hp;
  std::vector<double> theta;
};

// Project P out of X's span and re-orthonormalize, applying the identical
// column operations to HP so that HP = H * P stays exact.
void clean_p_block(Workspace& ws, double drop_tol) {
  if (ws.p.width() == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::MatrixXd c = block_inner(ws.x, ws.p);
    add_linear_combination(ws.p, ws.x, -c);
    add_linear_combination(ws.hp, ws.hx, -c);
  }
  Eigen::MatrixXd gram = block_inner(ws.p, ws.p);
  std::vector<double> orig_sq(ws.p.width());
  for (std::uint32_t j = 0; j < ws.p.width(); ++j) orig_sq[j] = gram(j, j);
  std::vector<std::uint32_t> kept = rank_revealing_select(gram, orig_sq, drop_tol);
  if (kept.empty()) {
    ws.p = BlockVectors(ws.x.dim(), 0);
    ws.hp = BlockVectors(ws.x.dim(), 0);
    return;
  }
  ws.p = ws.p.select_columns(kept);
  ws.hp = ws.hp.select_columns(kept);
  Eigen::MatrixXd sub(kept.size(), kept.size());
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = 0; b < kept.size(); ++b) sub(a, b) = gram(kept[a], kept[b]);
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    ws.p = BlockVectors(ws.x.dim(), 0);  // direction block beyond repair; drop it
    ws.hp = BlockVectors(ws.x.dim(), 0);
    return;
  }
  Eigen::MatrixXd r = llt.matrixU();
  Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  ws.p = linear_combination(ws.p, rinv);
  ws.hp = linear_combination(ws.hp, rinv);
}

}  // namespace

SolveReport lobpcg_solve(const CsbMatrix& h, const BlockVectors& x0,
                         const LobpcgOptions& opt) {
  if (x0.dim() != h.dim) throw DimensionMismatch("lobpcg: X0 dim != matrix dim");
  if (static_cast<int>(x0.width()) < opt.k_want)
    throw ConfigError("lobpcg: trial width below k_want");
  const int k_want = opt.k_want;
  const double drop_tol = 1e-8;

  SolveReport report;
  Workspace ws;

  ws.x = orthonormalize(x0, drop_tol);
  ++report.counters.orthogonalizations;
  if (static_cast<int>(ws.x.width()) < k_want)
    throw SubspaceCollapse("initial block has fewer than k_want independent columns");
  const int kt = static_cast<int>(ws.x.width());

  auto apply_h = [&](const BlockVectors& v) {
    ++report.counters.spmm_calls;
    report.counters.spmv_equivalents += v.width();
    return spmm(h, v);
  };

  ws.hx = apply_h(ws.x);
  {
    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
    eig_sym(block_inner(ws.x, ws.hx), evals, evecs);
    ws.theta.assign(evals.data(), evals.data() + kt);
    ws.x = linear_combination(ws.x, evecs);
    ws.hx = linear_combination(ws.hx, evecs);
  }
  report.norm_estimate =
      std::max(std::fabs(ws.theta.front()), std::fabs(ws.theta.back()));

  ws.p = BlockVectors(h.dim, 0);
  ws.hp = BlockVectors(h.dim, 0);

  for (int iter = 0;; ++iter) {
    // Residuals R = HX - X Theta; X columns have unit norm.
    BlockVectors r = ws.hx;
    for (std::uint32_t i = 0; i < h.dim; ++i) {
      double* rr = r.row(i);
      const double* xr = ws.x.row(i);
      for (int j = 0; j < kt; ++j) rr[j] -= ws.theta[j] * xr[j];
    }
    std::vector<double> res_norm = column_norms(r);
    std::vector<double> relres(kt);
    for (int j = 0; j < kt; ++j)
      relres[j] = res_norm[j] / std::max(report.norm_estimate, kTinyDiag);

    for (int j = 0; j < kt; ++j)
      report.history.push_back({iter, j, relres[j], ws.theta[j]});
    if (opt.observer) opt.observer({iter, ws.x, ws.theta, relres});

    bool all_converged = true;
    for (int j = 0; j < k_want; ++j) all_converged &= relres[j] <= opt.tol;
    report.iterations = iter;
    if (all_converged) {
      report.converged = true;
      break;
    }
    if (iter >= opt.max_iter) {
      report.converged = false;  // MaxIterationsExceeded: best so far returned
      break;
    }

    // Preconditioned residuals; converged columns are excluded from W
    // (soft locking keeps them in X).
    BlockVectors w_source;
    if (opt.preconditioner) {
      ShiftInputs inputs;
      inputs.theta = ws.theta;
      inputs.res_norm = res_norm;
      inputs.x_norm.assign(kt, 1.0);
      inputs.relres = relres;
      ShiftPlan plan = choose_shifts(inputs, iter + 1, opt.tol, opt.precond_config);
      bool engaged = std::any_of(plan.engage.begin(), plan.engage.end(),
                                 [](bool b) { return b; });
      w_source = apply_preconditioner(*opt.preconditioner, r, plan, opt.precond_config);
      if (engaged) ++report.counters.precond_applications;
    } else {
      w_source = r;
    }
    std::vector<std::uint32_t> active;
    for (int j = 0; j < kt; ++j)
      if (relres[j] > opt.tol) active.push_back(static_cast<std::uint32_t>(j));
    BlockVectors w = w_source.select_columns(active);

    BlockVectors xp = BlockVectors::hcat(ws.x, ws.p);
    w = orthonormalize(w, drop_tol, &xp);
    ++report.counters.orthogonalizations;
    if (w.width() == 0) {
      report.converged = false;  // no usable search direction remains
      break;
    }
    BlockVectors hw = apply_h(w);

    const int kw = static_cast<int>(w.width());
    BlockVectors y = BlockVectors::hcat(BlockVectors::hcat(ws.x, w), ws.p);
    BlockVectors hy = BlockVectors::hcat(BlockVectors::hcat(ws.hx, hw), ws.hp);

    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
    try {
      Eigen::MatrixXd overlap = block_inner(y, y);
      double dev =
          (overlap - Eigen::MatrixXd::Identity(y.width(), y.width())).cwiseAbs().maxCoeff();
      if (dev > 1e-8) throw IndefiniteGram("basis drift " + std::to_string(dev));
      eig_sym(block_inner(y, hy), evals, evecs);
    } catch (const IndefiniteGram&) {
      // Rescue: drop the P block and retry on [X W].
      ws.p = BlockVectors(h.dim, 0);
      ws.hp = BlockVectors(h.dim, 0);
      y = BlockVectors::hcat(ws.x, w);
      hy = BlockVectors::hcat(ws.hx, hw);
      eig_sym(block_inner(y, hy), evals, evecs);
    }
    const int m = static_cast<int>(y.width());
    const int kp_used = m - kt - kw;

    for (int j = 0; j < kt; ++j) ws.theta[j] = evals(j);
    report.norm_estimate = std::max(
        {report.norm_estimate, std::fabs(evals(0)), std::fabs(evals(m - 1))});

    Eigen::MatrixXd g = evecs.leftCols(kt);
    Eigen::MatrixXd g1 = g.topRows(kt);
    Eigen::MatrixXd g2 = g.middleRows(kt, kw);
    Eigen::MatrixXd g3 = g.bottomRows(kp_used);

    BlockVectors xn = linear_combination(ws.x, g1);
    add_linear_combination(xn, w, g2);
    BlockVectors hxn = linear_combination(ws.hx, g1);
    add_linear_combination(hxn, hw, g2);
    BlockVectors pn = linear_combination(w, g2);
    BlockVectors hpn = linear_combination(hw, g2);
    if (kp_used > 0) {
      add_linear_combination(xn, ws.p, g3);
      add_linear_combination(hxn, ws.hp, g3);
      add_linear_combination(pn, ws.p, g3);
      add_linear_combination(hpn, ws.hp, g3);
    }
    ws.x = std::move(xn);
    ws.hx = std::move(hxn);
    ws.p = std::move(pn);
    ws.hp = std::move(hpn);

    // Guard the X block against orthonormality drift.
    Eigen::MatrixXd xg = block_inner(ws.x, ws.x);
    if ((xg - Eigen::MatrixXd::Identity(kt, kt)).cwiseAbs().maxCoeff() > 1e-12) {
      Eigen::LLT<Eigen::MatrixXd> llt(xg);
      if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd rr = llt.matrixU();
        Eigen::MatrixXd rinv = rr.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(kt, kt));
        ws.x = linear_combination(ws.x, rinv);
        ws.hx = linear_combination(ws.hx, rinv);
        ++report.counters.orthogonalizations;
      }
    }

    clean_p_block(ws, drop_tol);
    ++report.counters.orthogonalizations;
  }

  std::vector<std::uint32_t> keep;
  for (int j = 0; j < k_want; ++j) keep.push_back(static_cast<std::uint32_t>(j));
  report.eigenvalues.assign(ws.theta.begin(), ws.theta.begin() + k_want);
  report.eigenvectors = ws.x.select_columns(keep);
  report.trial_vectors = std::move(ws.x);
  return report;
}

void write_history_csv(const SolveReport& report, std::ostream& os) {
  os << "iter,col,relres,theta\n";
  char buf[128];
  for (const HistoryRow& row : report.history) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", row.iteration, row.column,
                  row.relres, row.theta);
    os << buf;
  }
}

}  // namespace ci
