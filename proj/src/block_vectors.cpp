// block_vectors.cpp
#include "ci/block_vectors.hpp"

#include <cmath>

#include "ci/errors.hpp"
#include "ci/rng.hpp"

namespace ci {

BlockVectors BlockVectors::select_columns(const std::vector<std::uint32_t>& cols) const {
  BlockVectors out(dim_, static_cast<std::uint32_t>(cols.size()));
  for (std::uint32_t i = 0; i < dim_; ++i) {
    const double* src = row(i);
    double* dst = out.row(i);
    for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
  }
  return out;
}

BlockVectors BlockVectors::hcat(const BlockVectors& a, const BlockVectors& b) {
  if (a.width() == 0) return b;
  if (b.width() == 0) return a;
  if (a.dim() != b.dim()) throw DimensionMismatch("hcat: row counts differ");
  BlockVectors out(a.dim(), a.width() + b.width());
  for (std::uint32_t i = 0; i < a.dim(); ++i) {
    double* dst = out.row(i);
    const double* pa = a.row(i);
    const double* pb = b.row(i);
    for (std::uint32_t c = 0; c < a.width(); ++c) dst[c] = pa[c];
    for (std::uint32_t c = 0; c < b.width(); ++c) dst[a.width() + c] = pb[c];
  }
  return out;
}

Eigen::MatrixXd BlockVectors::to_matrix() const {
  Eigen::MatrixXd m(dim_, width_);
  for (std::uint32_t i = 0; i < dim_; ++i)
    for (std::uint32_t j = 0; j < width_; ++j) m(i, j) = at(i, j);
  return m;
}

BlockVectors BlockVectors::from_matrix(const Eigen::MatrixXd& m) {
  BlockVectors out(static_cast<std::uint32_t>(m.rows()),
                   static_cast<std::uint32_t>(m.cols()));
  for (std::uint32_t i = 0; i < out.dim(); ++i)
    for (std::uint32_t j = 0; j < out.width(); ++j) out.at(i, j) = m(i, j);
  return out;
}

namespace {

inline std::uint32_t panel_count(std::uint32_t dim) {
  return (dim + kPanelRows - 1) / kPanelRows;
}

void panel_gram(const BlockVectors& x, const BlockVectors& y, std::uint32_t panel,
                Eigen::MatrixXd& out) {
  const std::uint32_t lo = panel * kPanelRows;
  const std::uint32_t hi = std::min(x.dim(), lo + kPanelRows);
  out.setZero(x.width(), y.width());
  for (std::uint32_t i = lo; i < hi; ++i) {
    const double* xr = x.row(i);
    const double* yr = y.row(i);
    for (std::uint32_t a = 0; a < x.width(); ++a) {
      const double xa = xr[a];
      for (std::uint32_t b = 0; b < y.width(); ++b) out(a, b) += xa * yr[b];
    }
  }
}

}  // namespace

Eigen::MatrixXd block_inner(const BlockVectors& x, const BlockVectors& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("block_inner: row counts differ");
  const std::uint32_t np = panel_count(x.dim());
  std::vector<Eigen::MatrixXd> partial(np);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p)
    panel_gram(x, y, static_cast<std::uint32_t>(p), partial[p]);

  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(x.width(), y.width());
  for (std::uint32_t p = 0; p < np; ++p) result += partial[p];  // fixed panel order
  return result;
}

Eigen::MatrixXd block_inner_serial(const BlockVectors& x, const BlockVectors& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("block_inner: row counts differ");
  const std::uint32_t np = panel_count(x.dim());
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(x.width(), y.width());
  Eigen::MatrixXd partial;
  for (std::uint32_t p = 0; p < np; ++p) {
    panel_gram(x, y, p, partial);
    result += partial;
  }
  return result;
}

namespace {

inline void combine_rows(const BlockVectors& y, const Eigen::MatrixXd& g,
                         BlockVectors& out, std::uint32_t lo, std::uint32_t hi) {
  const std::uint32_t kin = y.width();
  const std::uint32_t kout = static_cast<std::uint32_t>(g.cols());
  for (std::uint32_t i = lo; i < hi; ++i) {
    const double* src = y.row(i);
    double* dst = out.row(i);
    for (std::uint32_t c = 0; c < kout; ++c) {
      double acc = 0.0;
      for (std::uint32_t t = 0; t < kin; ++t) acc += src[t] * g(t, c);
      dst[c] = acc;
    }
  }
}

}  // namespace

BlockVectors linear_combination(const BlockVectors& y, const Eigen::MatrixXd& g) {
  if (static_cast<std::uint32_t>(g.rows()) != y.width())
    throw DimensionMismatch("linear_combination: G rows != block width");
  BlockVectors out(y.dim(), static_cast<std::uint32_t>(g.cols()));
  const std::uint32_t np = panel_count(y.dim());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p) {
    const std::uint32_t lo = static_cast<std::uint32_t>(p) * kPanelRows;
    combine_rows(y, g, out, lo, std::min(y.dim(), lo + kPanelRows));
  }
  return out;
}

BlockVectors linear_combination_serial(const BlockVectors& y, const Eigen::MatrixXd& g) {
  if (static_cast<std::uint32_t>(g.rows()) != y.width())
    throw DimensionMismatch("linear_combination: G rows != block width");
  BlockVectors out(y.dim(), static_cast<std::uint32_t>(g.cols()));
  combine_rows(y, g, out, 0, y.dim());
  return out;
}

void add_linear_combination(BlockVectors& y, const BlockVectors& x,
                            const Eigen::MatrixXd& g) {
  if (x.dim() != y.dim()) throw DimensionMismatch("add_linear_combination: dims");
  if (static_cast<std::uint32_t>(g.rows()) != x.width() ||
      static_cast<std::uint32_t>(g.cols()) != y.width())
    throw DimensionMismatch("add_linear_combination: G shape");
  const std::uint32_t np = panel_count(y.dim());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p) {
    const std::uint32_t lo = static_cast<std::uint32_t>(p) * kPanelRows;
    const std::uint32_t hi = std::min(y.dim(), lo + kPanelRows);
    for (std::uint32_t i = lo; i < hi; ++i) {
      const double* src = x.row(i);
      double* dst = y.row(i);
      for (std::uint32_t c = 0; c < y.width(); ++c) {
        double acc = 0.0;
        for (std::uint32_t t = 0; t < x.width(); ++t) acc += src[t] * g(t, c);
        dst[c] += acc;
      }
    }
  }
}

BlockVectors random_block(std::uint32_t dim, std::uint32_t width, std::uint64_t seed) {
  BlockVectors out(dim, width);
  const std::uint32_t np = panel_count(dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p) {
    const std::uint32_t lo = static_cast<std::uint32_t>(p) * kPanelRows;
    const std::uint32_t hi = std::min(dim, lo + kPanelRows);
    for (std::uint32_t i = lo; i < hi; ++i)
      for (std::uint32_t j = 0; j < width; ++j)
        out.at(i, j) = symmetric_double(seed, i, j);
  }
  return out;
}

std::vector<double> column_norms(const BlockVectors& x) {
  Eigen::MatrixXd g = block_inner(x, x);
  std::vector<double> norms(x.width());
  for (std::uint32_t j = 0; j < x.width(); ++j) norms[j] = std::sqrt(g(j, j));
  return norms;
}

}  // namespace ci
