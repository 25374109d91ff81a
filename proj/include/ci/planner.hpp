// planner.hpp -- balanced-column-major processor placement on the triangular
// block grid and the per-phase communication volumes of the distributed
// SpMM scheme. Planning and analysis only; nothing is executed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ci {

struct CellAssignment {
  int block_row;  // matrix block (lower triangle, row >= col)
  int block_col;
  int grid_row;   // placement; transposed placement joins the mirrored groups
  int grid_col;
  int processor;
};

struct GridAssignment {
  int n_d = 1;
  std::vector<CellAssignment> cells;          // one per lower-triangle cell
  std::vector<std::vector<int>> row_groups;   // processors per grid row
  std::vector<std::vector<int>> col_groups;   // processors per grid column

  int processor_count() const { return n_d * (n_d + 1) / 2; }
  int group_cap() const { return (n_d + 1) / 2; }
};

// Deterministic constraint-satisfying placement: diagonal cells stay on the
// diagonal; every off-diagonal cell is placed straight or transposed so that
// no grid row or column exceeds (n_d + 1) / 2 processors. Throws
// EvenGridOrder.
GridAssignment bcm_map(int n_d);

struct PhaseVolume {
  std::uint64_t moved = 0;      // elements crossing between processors
  std::uint64_t assembled = 0;  // elements logically collected (incl. local)
};

struct CommPlan {
  int n_d = 1;
  std::uint64_t dim = 0;
  std::uint64_t width = 0;
  bool fused = false;
  std::vector<std::uint64_t> segment_sizes;  // balanced 1-D split of dim
  PhaseVolume gather;      // vector segments onto diagonal processors
  PhaseVolume broadcast;   // segments along row and column groups
  PhaseVolume reduce;      // partial products back to the diagonal
  PhaseVolume scatter;     // results across column-group members
  std::vector<int> broadcast_receives;  // per processor; 2 off-diagonal, 0 diagonal
  std::uint64_t total_moved = 0;
};

// Volumes for the four collective steps at block width k. With fused = true
// the column-group gather+broadcast collapses into an allgather and the
// column-group reduce+scatter into a reduce-scatter.
CommPlan communication_plan(const GridAssignment& assign, std::uint64_t dim,
                            std::uint64_t width, bool fused = false);

std::string to_json(const GridAssignment& assign, const CommPlan& plan);

}  // namespace ci
