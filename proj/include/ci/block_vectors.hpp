// block_vectors.hpp -- dense D x k vector blocks and the tall-skinny kernels.
//
// Storage is row major: the k components of one basis state are adjacent,
// which is what the SpMM kernel and the collective-style copies want.
//
// The parallel kernels split rows into fixed panels (independent of the
// thread count) and reduce partial results in panel order, so results are
// bitwise identical for any number of workers. Serial reference versions
// walk the same panels sequentially and must agree bitwise.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ci {

class BlockVectors {
 public:
  BlockVectors() = default;
  BlockVectors(std::uint32_t dim, std::uint32_t width)
      : dim_(dim), width_(width), values_(static_cast<std::size_t>(dim) * width, 0.0) {}

  std::uint32_t dim() const { return dim_; }
  std::uint32_t width() const { return width_; }

  double* row(std::uint32_t i) { return values_.data() + static_cast<std::size_t>(i) * width_; }
  const double* row(std::uint32_t i) const {
    return values_.data() + static_cast<std::size_t>(i) * width_;
  }
  double& at(std::uint32_t i, std::uint32_t j) { return row(i)[j]; }
  double at(std::uint32_t i, std::uint32_t j) const { return row(i)[j]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  // Column selection (indices in ascending order).
  BlockVectors select_columns(const std::vector<std::uint32_t>& cols) const;
  // Horizontal concatenation.
  static BlockVectors hcat(const BlockVectors& a, const BlockVectors& b);

  Eigen::MatrixXd to_matrix() const;                    // D x k, column major copy
  static BlockVectors from_matrix(const Eigen::MatrixXd& m);

  bool operator==(const BlockVectors&) const = default;

 private:
  std::uint32_t dim_ = 0;
  std::uint32_t width_ = 0;
  std::vector<double> values_;
};

// Rows per panel in the deterministic reductions.
inline constexpr std::uint32_t kPanelRows = 256;

// X^T Y (k_x x k_y). Panel partial sums are reduced in panel order.
Eigen::MatrixXd block_inner(const BlockVectors& x, const BlockVectors& y);
Eigen::MatrixXd block_inner_serial(const BlockVectors& x, const BlockVectors& y);

// Y * G where G is (y.width x out_width).
BlockVectors linear_combination(const BlockVectors& y, const Eigen::MatrixXd& g);
BlockVectors linear_combination_serial(const BlockVectors& y, const Eigen::MatrixXd& g);

// Y += X * G, same shapes as above.
void add_linear_combination(BlockVectors& y, const BlockVectors& x, const Eigen::MatrixXd& g);

// Deterministic pseudo-random block: entries in [-1, 1) derived from
// (seed, row * width + col).
BlockVectors random_block(std::uint32_t dim, std::uint32_t width, std::uint64_t seed);

// Per-column Euclidean norms.
std::vector<double> column_norms(const BlockVectors& x);

}  // namespace ci
