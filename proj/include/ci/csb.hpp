// csb.hpp -- compressed-sparse-block storage of the lower triangle of a
// symmetric matrix, and the fused symmetric SpMM.
//
// The block grid follows a CsbLayout whose boundaries coincide with group
// boundaries, so every tile lies inside a single block. Entries are kept in
// coordinate form with 16-bit local offsets (beta < 2^16) and are sorted by
// (row, col) within each block.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ci/block_vectors.hpp"
#include "ci/grouping.hpp"

namespace ci {

enum class Precision { Single, Double };

struct CoordinateBlock {
  std::vector<std::uint16_t> rows;   // local row offsets
  std::vector<std::uint16_t> cols;   // local col offsets
  std::vector<float> values32;       // used when precision == Single
  std::vector<double> values64;      // used when precision == Double

  std::size_t size() const { return rows.size(); }
};

class CsbMatrix {
 public:
  CsbLayout layout;
  Precision precision = Precision::Single;
  std::uint32_t dim = 0;
  std::uint64_t nnz_lower = 0;
  // Structure metadata recorded at assembly, reported by matrix_stats.
  std::uint64_t groups = 0;
  std::uint64_t nonzero_tiles = 0;

  // Lower-triangle block grid, row major: block (I, J), J <= I, lives at
  // index I*(I+1)/2 + J.
  std::vector<CoordinateBlock> blocks;

  std::uint32_t block_count() const { return layout.block_count(); }
  CoordinateBlock& block(std::uint32_t i, std::uint32_t j) {
    return blocks[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
  }
  const CoordinateBlock& block(std::uint32_t i, std::uint32_t j) const {
    return blocks[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
  }
  double value(std::uint32_t block_index, std::size_t entry) const {
    const CoordinateBlock& b = blocks[block_index];
    return precision == Precision::Single
               ? static_cast<double>(b.values32[entry])
               : b.values64[entry];
  }
};

struct AssembleOptions {
  Precision precision = Precision::Single;
  // Audit that the provider is zero outside nonzero tiles; the tri-state
  // default enables the audit for dim <= 2000.
  enum class Verify { Auto, On, Off } verify = Verify::Auto;
};

// Element function: symmetric, zero outside the d-difference structure.
using ElementFn = std::function<double(std::uint32_t, std::uint32_t)>;

// Evaluate the provider over all lower-triangle state pairs inside nonzero
// tiles and store the nonzero results. Throws StructureViolation when the
// audit finds a nonzero outside the tile structure.
CsbMatrix assemble(const TileMap& tiles, const CsbLayout& layout,
                   const GroupPartition& partition, const ElementFn& element,
                   const AssembleOptions& options = {});

// U = (L + L^T - diag L) X: the full symmetric product from the stored lower
// triangle. Phase one walks block rows, phase two block columns, so no two
// workers touch the same output rows and per-row accumulation order is fixed
// regardless of the worker count. Accumulation is in double precision.
BlockVectors spmm(const CsbMatrix& h, const BlockVectors& x);
BlockVectors spmm_serial(const CsbMatrix& h, const BlockVectors& x);

struct MatrixStats {
  std::uint64_t dim = 0;
  std::uint64_t nnz_lower = 0;
  std::uint64_t element_pairs = 0;       // D(D+1)/2
  double element_sparsity = 0.0;
  std::uint64_t csb_blocks = 0;
  std::uint64_t groups = 0;
  std::uint64_t nonzero_tiles = 0;       // incl. diagonal tiles
  std::uint64_t tile_pairs_offdiag = 0;  // G(G-1)/2
  double tile_sparsity = 0.0;            // nonzero_tiles / tile_pairs_offdiag
};

MatrixStats matrix_stats(const CsbMatrix& h);

// Dense mirror for oracle comparisons; refuses dim > 5000.
Eigen::MatrixXd to_dense(const CsbMatrix& h);

// Binary dump/load: magic CSB1, little-endian; layout documented in the
// README. Throws FormatError on malformed input.
void save_csb(const CsbMatrix& h, const std::string& path);
CsbMatrix load_csb(const std::string& path);

}  // namespace ci
