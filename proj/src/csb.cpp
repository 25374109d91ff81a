// csb.cpp
#include "ci/csb.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ci/errors.hpp"

namespace ci {

namespace {

struct Entry {
  std::uint16_t r, c;
  double v;
};

void sort_and_store(std::vector<Entry>& entries, CoordinateBlock& block,
                    Precision precision) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  block.rows.reserve(entries.size());
  block.cols.reserve(entries.size());
  if (precision == Precision::Single)
    block.values32.reserve(entries.size());
  else
    block.values64.reserve(entries.size());
  for (const Entry& e : entries) {
    block.rows.push_back(e.r);
    block.cols.push_back(e.c);
    if (precision == Precision::Single)
      block.values32.push_back(static_cast<float>(e.v));
    else
      block.values64.push_back(e.v);
  }
}

}  // namespace

CsbMatrix assemble(const TileMap& tiles, const CsbLayout& layout,
                   const GroupPartition& partition, const ElementFn& element,
                   const AssembleOptions& options) {
  CsbMatrix h;
  h.layout = layout;
  h.precision = options.precision;
  h.dim = partition.dimension();
  h.groups = partition.group_count();
  h.nonzero_tiles = tiles.nonzero_tile_count();
  const std::uint32_t nb = layout.block_count();
  h.blocks.resize(static_cast<std::size_t>(nb) * (nb + 1) / 2);

  // Group ids per block row; a group never crosses a block boundary.
  std::vector<std::vector<std::uint32_t>> groups_in_block(nb);
  for (std::uint32_t g = 0; g < partition.group_count(); ++g)
    groups_in_block[layout.block_of_state(partition.group_ranges[g].first)].push_back(g);

  // Each worker owns whole block rows, so no two workers write one block.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(nb); ++bi) {
    const std::uint32_t block_row = static_cast<std::uint32_t>(bi);
    std::vector<std::vector<Entry>> staged(block_row + 1);
    for (std::uint32_t g : groups_in_block[block_row]) {
      auto [rs, re] = partition.group_ranges[g];
      for (std::uint32_t gc : tiles.cols_of_row[g]) {
        auto [cs, ce] = partition.group_ranges[gc];
        const std::uint32_t block_col = layout.block_of_state(cs);
        const std::uint32_t rbase = layout.block_boundaries[block_row];
        const std::uint32_t cbase = layout.block_boundaries[block_col];
        auto& stage = staged[block_col];
        for (std::uint32_t a = rs; a < re; ++a) {
          const std::uint32_t b_end = std::min(ce, a + 1);
          for (std::uint32_t b = cs; b < b_end; ++b) {
            double v = element(a, b);
            if (v != 0.0)
              stage.push_back({static_cast<std::uint16_t>(a - rbase),
                               static_cast<std::uint16_t>(b - cbase), v});
          }
        }
      }
    }
    for (std::uint32_t block_col = 0; block_col <= block_row; ++block_col)
      if (!staged[block_col].empty())
        sort_and_store(staged[block_col], h.block(block_row, block_col),
                       options.precision);
  }

  for (const CoordinateBlock& b : h.blocks) h.nnz_lower += b.size();

  const bool verify = options.verify == AssembleOptions::Verify::On ||
                      (options.verify == AssembleOptions::Verify::Auto && h.dim <= 2000);
  if (verify) {
    int violation = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(|| : violation)
    for (std::int64_t g = 0; g < static_cast<std::int64_t>(partition.group_count()); ++g) {
      auto [rs, re] = partition.group_ranges[static_cast<std::uint32_t>(g)];
      for (std::uint32_t gc = 0; gc <= static_cast<std::uint32_t>(g); ++gc) {
        if (tiles.is_nonzero(static_cast<std::uint32_t>(g), gc)) continue;
        auto [cs, ce] = partition.group_ranges[gc];
        for (std::uint32_t a = rs; a < re && !violation; ++a)
          for (std::uint32_t b = cs; b < std::min(ce, a + 1); ++b)
            if (element(a, b) != 0.0) violation = 1;
      }
    }
    if (violation)
      throw StructureViolation(
          "provider yields a nonzero outside the nonzero tiles; body rank d "
          "is inconsistent");
  }
  return h;
}

namespace {

template <typename Value>
inline void apply_block(const std::uint16_t* rows, const std::uint16_t* cols,
                        const Value* vals, std::size_t n, const double* x,
                        double* u, std::uint32_t k) {
  for (std::size_t e = 0; e < n; ++e) {
    const double v = static_cast<double>(vals[e]);
    const double* xr = x + static_cast<std::size_t>(cols[e]) * k;
    double* ur = u + static_cast<std::size_t>(rows[e]) * k;
    for (std::uint32_t t = 0; t < k; ++t) ur[t] += v * xr[t];
  }
}

template <typename Value>
inline void apply_block_transposed(const std::uint16_t* rows, const std::uint16_t* cols,
                                   const Value* vals, std::size_t n, bool strict,
                                   const double* x, double* u, std::uint32_t k) {
  for (std::size_t e = 0; e < n; ++e) {
    if (strict && rows[e] == cols[e]) continue;
    const double v = static_cast<double>(vals[e]);
    const double* xr = x + static_cast<std::size_t>(rows[e]) * k;
    double* ur = u + static_cast<std::size_t>(cols[e]) * k;
    for (std::uint32_t t = 0; t < k; ++t) ur[t] += v * xr[t];
  }
}

void spmm_block_rows(const CsbMatrix& h, const BlockVectors& x, BlockVectors& u,
                     std::uint32_t block_row) {
  const std::uint32_t k = x.width();
  const std::uint32_t rbase = h.layout.block_boundaries[block_row];
  double* urow = u.row(rbase);
  for (std::uint32_t j = 0; j <= block_row; ++j) {
    const CoordinateBlock& b = h.block(block_row, j);
    if (b.size() == 0) continue;
    const double* xcol = x.row(h.layout.block_boundaries[j]);
    if (h.precision == Precision::Single)
      apply_block(b.rows.data(), b.cols.data(), b.values32.data(), b.size(), xcol,
                  urow, k);
    else
      apply_block(b.rows.data(), b.cols.data(), b.values64.data(), b.size(), xcol,
                  urow, k);
  }
}

void spmm_block_cols(const CsbMatrix& h, const BlockVectors& x, BlockVectors& u,
                     std::uint32_t block_col) {
  const std::uint32_t k = x.width();
  const std::uint32_t cbase = h.layout.block_boundaries[block_col];
  double* ucol = u.row(cbase);
  for (std::uint32_t i = block_col; i < h.block_count(); ++i) {
    const CoordinateBlock& b = h.block(i, block_col);
    if (b.size() == 0) continue;
    const double* xrow = x.row(h.layout.block_boundaries[i]);
    const bool strict = i == block_col;  // skip the diagonal, applied in phase one
    if (h.precision == Precision::Single)
      apply_block_transposed(b.rows.data(), b.cols.data(), b.values32.data(), b.size(),
                             strict, xrow, ucol, k);
    else
      apply_block_transposed(b.rows.data(), b.cols.data(), b.values64.data(), b.size(),
                             strict, xrow, ucol, k);
  }
}

}  // namespace

BlockVectors spmm(const CsbMatrix& h, const BlockVectors& x) {
  if (x.dim() != h.dim) throw DimensionMismatch("spmm: vector dim != matrix dim");
  BlockVectors u(h.dim, x.width());
  const std::int64_t nb = h.block_count();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < nb; ++i)
    spmm_block_rows(h, x, u, static_cast<std::uint32_t>(i));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t j = 0; j < nb; ++j)
    spmm_block_cols(h, x, u, static_cast<std::uint32_t>(j));
  return u;
}

BlockVectors spmm_serial(const CsbMatrix& h, const BlockVectors& x) {
  if (x.dim() != h.dim) throw DimensionMismatch("spmm: vector dim != matrix dim");
  BlockVectors u(h.dim, x.width());
  for (std::uint32_t i = 0; i < h.block_count(); ++i) spmm_block_rows(h, x, u, i);
  for (std::uint32_t j = 0; j < h.block_count(); ++j) spmm_block_cols(h, x, u, j);
  return u;
}

MatrixStats matrix_stats(const CsbMatrix& h) {
  MatrixStats st;
  st.dim = h.dim;
  st.nnz_lower = h.nnz_lower;
  st.element_pairs = static_cast<std::uint64_t>(h.dim) * (h.dim + 1) / 2;
  st.element_sparsity =
      static_cast<double>(st.nnz_lower) / static_cast<double>(st.element_pairs);
  st.csb_blocks = h.block_count();
  st.groups = h.groups;
  st.nonzero_tiles = h.nonzero_tiles;
  st.tile_pairs_offdiag = h.groups * (h.groups - 1) / 2;
  if (st.tile_pairs_offdiag > 0)
    st.tile_sparsity = static_cast<double>(st.nonzero_tiles) /
                       static_cast<double>(st.tile_pairs_offdiag);
  return st;
}

Eigen::MatrixXd to_dense(const CsbMatrix& h) {
  if (h.dim > 5000) throw DimensionMismatch("to_dense is a test oracle; dim > 5000");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(h.dim, h.dim);
  for (std::uint32_t i = 0; i < h.block_count(); ++i) {
    for (std::uint32_t j = 0; j <= i; ++j) {
      const CoordinateBlock& b = h.block(i, j);
      const std::uint32_t rbase = h.layout.block_boundaries[i];
      const std::uint32_t cbase = h.layout.block_boundaries[j];
      const std::uint32_t bid = i * (i + 1) / 2 + j;
      for (std::size_t e = 0; e < b.size(); ++e) {
        double v = h.value(bid, e);
        m(rbase + b.rows[e], cbase + b.cols[e]) = v;
        m(cbase + b.cols[e], rbase + b.rows[e]) = v;
      }
    }
  }
  return m;
}

namespace {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated CSB file");
  return v;
}

}  // namespace

void save_csb(const CsbMatrix& h, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os.write("CSB1", 4);
  write_raw<std::uint32_t>(os, h.precision == Precision::Single ? 0u : 1u);
  write_raw<std::uint64_t>(os, h.dim);
  write_raw<std::uint32_t>(os, h.layout.beta);
  write_raw<std::uint32_t>(os, h.block_count());
  write_raw<std::uint64_t>(os, h.nnz_lower);
  write_raw<std::uint64_t>(os, h.groups);
  write_raw<std::uint64_t>(os, h.nonzero_tiles);
  for (std::uint32_t b : h.layout.block_boundaries) write_raw<std::uint32_t>(os, b);
  for (std::uint32_t i = 0; i < h.block_count(); ++i) {
    for (std::uint32_t j = 0; j <= i; ++j) {
      const CoordinateBlock& b = h.block(i, j);
      write_raw<std::uint64_t>(os, b.size());
      for (std::size_t e = 0; e < b.size(); ++e) {
        write_raw<std::uint16_t>(os, b.rows[e]);
        write_raw<std::uint16_t>(os, b.cols[e]);
        if (h.precision == Precision::Single)
          write_raw<float>(os, b.values32[e]);
        else
          write_raw<double>(os, b.values64[e]);
      }
    }
  }
}

CsbMatrix load_csb(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "CSB1", 4) != 0)
    throw FormatError("bad magic; not a CSB1 file: " + path);

  CsbMatrix h;
  const std::uint32_t prec = read_raw<std::uint32_t>(is);
  if (prec > 1) throw FormatError("bad precision tag");
  h.precision = prec == 0 ? Precision::Single : Precision::Double;
  h.dim = static_cast<std::uint32_t>(read_raw<std::uint64_t>(is));
  h.layout.beta = read_raw<std::uint32_t>(is);
  const std::uint32_t nb = read_raw<std::uint32_t>(is);
  const std::uint64_t nnz = read_raw<std::uint64_t>(is);
  h.groups = read_raw<std::uint64_t>(is);
  h.nonzero_tiles = read_raw<std::uint64_t>(is);
  h.layout.block_boundaries.resize(nb + 1);
  for (auto& b : h.layout.block_boundaries) b = read_raw<std::uint32_t>(is);
  if (h.layout.block_boundaries.front() != 0 || h.layout.block_boundaries.back() != h.dim)
    throw FormatError("inconsistent block boundaries");

  h.blocks.resize(static_cast<std::size_t>(nb) * (nb + 1) / 2);
  for (std::uint32_t i = 0; i < nb; ++i) {
    for (std::uint32_t j = 0; j <= i; ++j) {
      CoordinateBlock& b = h.block(i, j);
      const std::uint64_t n = read_raw<std::uint64_t>(is);
      b.rows.resize(n);
      b.cols.resize(n);
      if (h.precision == Precision::Single)
        b.values32.resize(n);
      else
        b.values64.resize(n);
      for (std::uint64_t e = 0; e < n; ++e) {
        b.rows[e] = read_raw<std::uint16_t>(is);
        b.cols[e] = read_raw<std::uint16_t>(is);
        if (h.precision == Precision::Single)
          b.values32[e] = read_raw<float>(is);
        else
          b.values64[e] = read_raw<double>(is);
      }
      h.nnz_lower += n;
    }
  }
  if (h.nnz_lower != nnz) throw FormatError("entry count disagrees with header");
  return h;
}

}  // namespace ci
