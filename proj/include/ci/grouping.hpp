// grouping.hpp -- orbital-occupation groups, tile sparsity, CSB block layout.
#pragma once

#include <cstdint>
#include <vector>

#include "ci/basis.hpp"

namespace ci {

// Per-particle-slot mj window used by split groups; a whole orbital has
// lo = -j2, hi = +j2.
struct MjWindow {
  std::uint16_t orbital;
  std::int16_t mj2_lo;
  std::int16_t mj2_hi;

  bool operator==(const MjWindow&) const = default;
};

struct GroupKey {
  std::vector<std::uint16_t> proton_orbitals;   // sorted, with repeats
  std::vector<std::uint16_t> neutron_orbitals;  // sorted, with repeats
  // Present only for groups produced by split_groups.
  std::vector<MjWindow> proton_windows;
  std::vector<MjWindow> neutron_windows;

  bool operator==(const GroupKey&) const = default;
};

class GroupPartition {
 public:
  std::vector<std::uint32_t> group_of_state;          // state -> group id
  std::vector<std::pair<std::uint32_t, std::uint32_t>> group_ranges;  // [start,end)
  std::vector<GroupKey> group_keys;
  std::vector<std::uint32_t> unsplittable;  // groups flagged by split_groups

  std::uint32_t group_count() const { return static_cast<std::uint32_t>(group_ranges.size()); }
  std::uint32_t group_size(std::uint32_t g) const {
    return group_ranges[g].second - group_ranges[g].first;
  }
  std::uint32_t max_group_size() const;
  std::uint32_t dimension() const {
    return group_ranges.empty() ? 0 : group_ranges.back().second;
  }
};

struct TileMap {
  int d = 2;  // interaction body rank
  // For each row group, the sorted column groups g' <= g with a potentially
  // nonzero tile.
  std::vector<std::vector<std::uint32_t>> cols_of_row;

  std::uint64_t nonzero_tile_count() const;
  bool is_nonzero(std::uint32_t row_group, std::uint32_t col_group) const;
};

struct CsbLayout {
  std::uint32_t beta = 2000;
  // boundaries[0] = 0 < ... < boundaries[n_blocks] = D.
  std::vector<std::uint32_t> block_boundaries;

  std::uint32_t block_count() const {
    return static_cast<std::uint32_t>(block_boundaries.size()) - 1;
  }
  std::uint32_t block_of_state(std::uint32_t state) const;
  std::uint32_t block_extent(std::uint32_t b) const {
    return block_boundaries[b + 1] - block_boundaries[b];
  }
};

// Partition the canonical basis into maximal runs of identical orbital
// occupations.
GroupPartition group_states(const BasisTable& basis);

// Refine oversized groups by cutting per-slot mj windows; groups that cannot
// be reduced are kept whole and flagged in `unsplittable`.
GroupPartition split_groups(const GroupPartition& partition, const BasisTable& basis,
                            std::uint32_t max_group_size);

// Difference between two group keys: orbital moves summed over species.
int group_difference(const GroupKey& a, const GroupKey& b);

// Tiles (g, g') with group keys differing in at most d orbitals.
TileMap determine_nonzero_tiles(const GroupPartition& partition, int d);

// Aggregate consecutive groups into blocks of <= beta states, cutting at
// every quanta-stratum boundary. Throws BetaTooSmall / BetaTooLarge.
CsbLayout plan_csb_blocks(const GroupPartition& partition, const BasisTable& basis,
                          std::uint32_t beta);

// Structural element count: lower-triangle state pairs (a >= b) whose
// Slater-Condon distance is <= d. Walks only the nonzero tiles.
std::uint64_t count_structural_nonzeros(const BasisTable& basis,
                                        const GroupPartition& partition,
                                        const TileMap& tiles);

struct StructureStats {
  std::uint64_t dimension = 0;
  std::uint64_t groups = 0;
  std::uint64_t nonzero_tiles = 0;          // lower triangle incl. diagonal
  std::uint64_t tile_pairs_offdiag = 0;     // G(G-1)/2
  std::uint64_t nonzero_elements = 0;       // lower triangle incl. diagonal
  std::uint64_t element_pairs = 0;          // D(D+1)/2
  double tile_sparsity = 0.0;               // nonzero_tiles / tile_pairs_offdiag
  double element_sparsity = 0.0;            // nonzero_elements / element_pairs
  std::uint64_t csb_blocks = 0;
  std::uint64_t max_group = 0;
  double mean_group = 0.0;
  double mean_block = 0.0;
};

StructureStats structure_stats(const BasisTable& basis, const GroupPartition& partition,
                               const TileMap& tiles, const CsbLayout& layout);

}  // namespace ci
