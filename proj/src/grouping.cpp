// grouping.cpp
#include "ci/grouping.hpp"

#include <algorithm>
#include <limits>

#include "ci/errors.hpp"

namespace ci {

std::uint32_t GroupPartition::max_group_size() const {
  std::uint32_t m = 0;
  for (auto [s, e] : group_ranges) m = std::max(m, e - s);
  return m;
}

namespace {

std::vector<std::uint16_t> orbital_key_of(const BasisTable& basis,
                                          const std::vector<std::uint16_t>& occ) {
  std::vector<std::uint16_t> key(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) key[i] = basis.orbital_of_sp[occ[i]];
  return key;
}

std::vector<MjWindow> full_windows(const BasisTable& basis,
                                   const std::vector<std::uint16_t>& orbitals) {
  std::vector<MjWindow> w(orbitals.size());
  for (std::size_t i = 0; i < orbitals.size(); ++i) {
    int j2 = basis.orbitals[orbitals[i]].j2;
    w[i] = {orbitals[i], static_cast<std::int16_t>(-j2), static_cast<std::int16_t>(j2)};
  }
  return w;
}

}  // namespace

GroupPartition group_states(const BasisTable& basis) {
  GroupPartition part;
  part.group_of_state.resize(basis.dimension());

  std::vector<std::uint16_t> current_p, current_n;
  for (std::uint32_t i = 0; i < basis.dimension(); ++i) {
    auto pk = orbital_key_of(basis, basis.states[i].proton_occ);
    auto nk = orbital_key_of(basis, basis.states[i].neutron_occ);
    if (part.group_ranges.empty() || pk != current_p || nk != current_n) {
      part.group_ranges.emplace_back(i, i);
      GroupKey key;
      key.proton_orbitals = pk;
      key.neutron_orbitals = nk;
      part.group_keys.push_back(std::move(key));
      current_p = std::move(pk);
      current_n = std::move(nk);
    }
    part.group_ranges.back().second = i + 1;
    part.group_of_state[i] = part.group_count() - 1;
  }
  return part;
}

namespace {

// Split one contiguous range of states recursively; within a group the basis
// order is lexicographic over (proton, neutron) sp-index lists, so cutting
// the first slot that varies keeps both halves contiguous.
void split_range(const BasisTable& basis, std::uint32_t start, std::uint32_t end,
                 GroupKey key, std::uint32_t max_size,
                 std::vector<std::pair<std::uint32_t, std::uint32_t>>& ranges,
                 std::vector<GroupKey>& keys, std::vector<bool>& flagged) {
  const std::uint32_t size = end - start;
  if (size <= max_size) {
    ranges.emplace_back(start, end);
    keys.push_back(std::move(key));
    flagged.push_back(false);
    return;
  }

  const int z = static_cast<int>(basis.states[start].proton_occ.size());
  const int a = z + static_cast<int>(basis.states[start].neutron_occ.size());
  auto slot_index = [&](std::uint32_t state, int slot) -> std::uint16_t {
    const ManyBodyState& s = basis.states[state];
    return slot < z ? s.proton_occ[slot] : s.neutron_occ[slot - z];
  };

  int cut_slot = -1;
  for (int slot = 0; slot < a && cut_slot < 0; ++slot) {
    std::uint16_t first = slot_index(start, slot);
    for (std::uint32_t i = start + 1; i < end; ++i)
      if (slot_index(i, slot) != first) {
        cut_slot = slot;
        break;
      }
  }
  if (cut_slot < 0) {  // identical index lists cannot happen; defensive
    ranges.emplace_back(start, end);
    keys.push_back(std::move(key));
    flagged.push_back(true);
    return;
  }

  // Values of the cut slot ascend with the state index; pick the value cut
  // that best balances the two halves.
  std::uint32_t best_mid = 0;
  std::uint32_t best_score = std::numeric_limits<std::uint32_t>::max();
  for (std::uint32_t i = start + 1; i < end; ++i) {
    if (slot_index(i, cut_slot) == slot_index(i - 1, cut_slot)) continue;
    std::uint32_t lo = i - start, hi = end - i;
    std::uint32_t score = lo > hi ? lo - hi : hi - lo;
    if (score < best_score) {
      best_score = score;
      best_mid = i;
    }
  }

  auto windows_of = [&](std::uint32_t lo_state, std::uint32_t hi_state) {
    GroupKey k = key;
    if (k.proton_windows.empty()) {
      k.proton_windows = full_windows(basis, k.proton_orbitals);
      k.neutron_windows = full_windows(basis, k.neutron_orbitals);
    }
    MjWindow& w = cut_slot < z ? k.proton_windows[cut_slot]
                               : k.neutron_windows[cut_slot - z];
    w.mj2_lo = static_cast<std::int16_t>(basis.sp_states[slot_index(lo_state, cut_slot)].mj2);
    w.mj2_hi = static_cast<std::int16_t>(basis.sp_states[slot_index(hi_state, cut_slot)].mj2);
    return k;
  };

  split_range(basis, start, best_mid, windows_of(start, best_mid - 1), max_size,
              ranges, keys, flagged);
  split_range(basis, best_mid, end, windows_of(best_mid, end - 1), max_size,
              ranges, keys, flagged);
}

}  // namespace

GroupPartition split_groups(const GroupPartition& partition, const BasisTable& basis,
                            std::uint32_t max_group_size) {
  if (max_group_size < 1) throw ConfigError("max_group_size must be >= 1");

  GroupPartition out;
  std::vector<bool> flagged;
  for (std::uint32_t g = 0; g < partition.group_count(); ++g) {
    auto [s, e] = partition.group_ranges[g];
    split_range(basis, s, e, partition.group_keys[g], max_group_size,
                out.group_ranges, out.group_keys, flagged);
  }
  out.group_of_state.resize(partition.group_of_state.size());
  for (std::uint32_t g = 0; g < out.group_count(); ++g) {
    auto [s, e] = out.group_ranges[g];
    for (std::uint32_t i = s; i < e; ++i) out.group_of_state[i] = g;
    if (flagged[g]) out.unsplittable.push_back(g);
  }
  return out;
}

int group_difference(const GroupKey& a, const GroupKey& b) {
  auto moved = [](const std::vector<std::uint16_t>& x,
                  const std::vector<std::uint16_t>& y) {
    std::size_t i = 0, j = 0, common = 0;
    while (i < x.size() && j < y.size()) {
      if (x[i] == y[j]) ++common, ++i, ++j;
      else if (x[i] < y[j]) ++i;
      else ++j;
    }
    return static_cast<int>(x.size() - common);
  };
  return moved(a.proton_orbitals, b.proton_orbitals) +
         moved(a.neutron_orbitals, b.neutron_orbitals);
}

TileMap determine_nonzero_tiles(const GroupPartition& partition, int d) {
  if (d < 1) throw ConfigError("body rank d must be >= 1");
  const std::uint32_t n = partition.group_count();
  TileMap tiles;
  tiles.d = d;
  tiles.cols_of_row.resize(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t g = 0; g < static_cast<std::int64_t>(n); ++g) {
    auto& cols = tiles.cols_of_row[static_cast<std::uint32_t>(g)];
    for (std::uint32_t h = 0; h <= static_cast<std::uint32_t>(g); ++h)
      if (group_difference(partition.group_keys[g], partition.group_keys[h]) <= d)
        cols.push_back(h);
  }
  return tiles;
}

std::uint64_t TileMap::nonzero_tile_count() const {
  std::uint64_t n = 0;
  for (const auto& cols : cols_of_row) n += cols.size();
  return n;
}

bool TileMap::is_nonzero(std::uint32_t row_group, std::uint32_t col_group) const {
  if (col_group > row_group) std::swap(row_group, col_group);
  const auto& cols = cols_of_row[row_group];
  return std::binary_search(cols.begin(), cols.end(), col_group);
}

std::uint32_t CsbLayout::block_of_state(std::uint32_t state) const {
  auto it = std::upper_bound(block_boundaries.begin(), block_boundaries.end(), state);
  return static_cast<std::uint32_t>(it - block_boundaries.begin()) - 1;
}

CsbLayout plan_csb_blocks(const GroupPartition& partition, const BasisTable& basis,
                          std::uint32_t beta) {
  if (beta >= (1u << 16)) throw BetaTooLarge("beta must stay below 2^16");
  std::uint32_t max_group = partition.max_group_size();
  if (beta < max_group)
    throw BetaTooSmall("beta " + std::to_string(beta) + " below max group size " +
                       std::to_string(max_group) + "; split groups first");

  CsbLayout layout;
  layout.beta = beta;
  layout.block_boundaries.push_back(0);
  const auto& strata = basis.quanta_boundaries;
  for (std::uint32_t g = 0; g < partition.group_count(); ++g) {
    auto [s, e] = partition.group_ranges[g];
    bool stratum_start =
        std::binary_search(strata.begin(), strata.end(), s) && s != 0;
    std::uint32_t block_start = layout.block_boundaries.back();
    if (s > block_start && (stratum_start || e - block_start > beta))
      layout.block_boundaries.push_back(s);
  }
  layout.block_boundaries.push_back(partition.dimension());
  return layout;
}

std::uint64_t count_structural_nonzeros(const BasisTable& basis,
                                        const GroupPartition& partition,
                                        const TileMap& tiles) {
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : total)
  for (std::int64_t g = 0; g < static_cast<std::int64_t>(partition.group_count()); ++g) {
    auto [rs, re] = partition.group_ranges[static_cast<std::uint32_t>(g)];
    for (std::uint32_t h : tiles.cols_of_row[static_cast<std::uint32_t>(g)]) {
      auto [cs, ce] = partition.group_ranges[h];
      for (std::uint32_t a = rs; a < re; ++a) {
        std::uint32_t b_end = std::min(ce, a + 1);  // lower triangle only
        for (std::uint32_t b = cs; b < b_end; ++b)
          if (structurally_coupled(basis, a, b, tiles.d)) ++total;
      }
    }
  }
  return total;
}

StructureStats structure_stats(const BasisTable& basis, const GroupPartition& partition,
                               const TileMap& tiles, const CsbLayout& layout) {
  StructureStats st;
  st.dimension = basis.dimension();
  st.groups = partition.group_count();
  st.nonzero_tiles = tiles.nonzero_tile_count();
  st.tile_pairs_offdiag = st.groups * (st.groups - 1) / 2;
  st.nonzero_elements = count_structural_nonzeros(basis, partition, tiles);
  st.element_pairs = st.dimension * (st.dimension + 1) / 2;
  if (st.tile_pairs_offdiag > 0)
    st.tile_sparsity = static_cast<double>(st.nonzero_tiles) /
                       static_cast<double>(st.tile_pairs_offdiag);
  st.element_sparsity = static_cast<double>(st.nonzero_elements) /
                        static_cast<double>(st.element_pairs);
  st.csb_blocks = layout.block_count();
  st.max_group = partition.max_group_size();
  st.mean_group = static_cast<double>(st.dimension) / static_cast<double>(st.groups);
  st.mean_block = static_cast<double>(st.dimension) / static_cast<double>(st.csb_blocks);
  return st;
}

}  // namespace ci
