// planner.cpp
#include "ci/planner.hpp"

#include <algorithm>
#include <sstream>

#include "ci/errors.hpp"

namespace ci {

namespace {

struct PlacementState {
  std::vector<int> row_count;
  std::vector<int> col_count;
  int cap;
};

// Column-major over the lower-triangle cells; each off-diagonal cell may sit
// straight (i, j) or transposed (j, i). Greedy choice -- feasible placement
// with the shorter row group, ties to the smaller grid row -- with
// backtracking behind it, since the row and column groups must pack to
// exactly (n_d + 1) / 2 each.
bool place(std::vector<CellAssignment>& cells, std::size_t index, PlacementState& st) {
  if (index == cells.size()) return true;
  CellAssignment& cell = cells[index];
  const int i = cell.block_row, j = cell.block_col;

  if (i == j) {
    if (st.row_count[i] >= st.cap || st.col_count[i] >= st.cap) return false;
    cell.grid_row = i;
    cell.grid_col = i;
    ++st.row_count[i];
    ++st.col_count[i];
    if (place(cells, index + 1, st)) return true;
    --st.row_count[i];
    --st.col_count[i];
    return false;
  }

  std::vector<std::pair<int, int>> options;  // (grid_row, grid_col)
  if (st.row_count[i] < st.cap && st.col_count[j] < st.cap) options.emplace_back(i, j);
  if (st.row_count[j] < st.cap && st.col_count[i] < st.cap) options.emplace_back(j, i);
  std::sort(options.begin(), options.end(), [&](auto a, auto b) {
    if (st.row_count[a.first] != st.row_count[b.first])
      return st.row_count[a.first] < st.row_count[b.first];
    return a.first < b.first;
  });
  for (auto [r, c] : options) {
    cell.grid_row = r;
    cell.grid_col = c;
    ++st.row_count[r];
    ++st.col_count[c];
    if (place(cells, index + 1, st)) return true;
    --st.row_count[r];
    --st.col_count[c];
  }
  return false;
}

}  // namespace

GridAssignment bcm_map(int n_d) {
  if (n_d < 1 || n_d % 2 == 0)
    throw EvenGridOrder("grid order must be odd and positive, got " +
                        std::to_string(n_d));
  GridAssignment assign;
  assign.n_d = n_d;
  int proc = 0;
  for (int j = 0; j < n_d; ++j)  // column major, as the name says
    for (int i = j; i < n_d; ++i)
      assign.cells.push_back({i, j, -1, -1, proc++});

  PlacementState st{std::vector<int>(n_d, 0), std::vector<int>(n_d, 0),
                    assign.group_cap()};
  if (!place(assign.cells, 0, st))
    throw Error("BCM placement failed for n_d = " + std::to_string(n_d));

  assign.row_groups.resize(n_d);
  assign.col_groups.resize(n_d);
  for (const CellAssignment& c : assign.cells) {
    assign.row_groups[c.grid_row].push_back(c.processor);
    assign.col_groups[c.grid_col].push_back(c.processor);
  }
  return assign;
}

CommPlan communication_plan(const GridAssignment& assign, std::uint64_t dim,
                            std::uint64_t width, bool fused) {
  const int n = assign.n_d;
  CommPlan plan;
  plan.n_d = n;
  plan.dim = dim;
  plan.width = width;
  plan.fused = fused;

  plan.segment_sizes.resize(n);
  for (int i = 0; i < n; ++i)
    plan.segment_sizes[i] = dim / n + (static_cast<std::uint64_t>(i) < dim % n ? 1 : 0);

  // The diagonal processor's own share of a segment split across its column
  // group never crosses the network.
  auto diag_share = [&](int c) {
    std::uint64_t g = assign.col_groups[c].size();
    return plan.segment_sizes[c] / g + (plan.segment_sizes[c] % g > 0 ? 1 : 0);
  };

  for (int c = 0; c < n; ++c) {
    const std::uint64_t seg = plan.segment_sizes[c] * width;
    const std::uint64_t rg = assign.row_groups[c].size();
    const std::uint64_t cg = assign.col_groups[c].size();
    const std::uint64_t own = std::min(seg, diag_share(c) * width);

    plan.gather.assembled += seg;
    plan.scatter.assembled += seg;
    if (fused) {
      // allgather within the column group replaces gather + column
      // broadcast; reduce-scatter replaces column reduce + scatter.
      plan.gather.moved += (cg - 1) * seg;
      plan.broadcast.moved += (rg - 1) * seg;
      plan.reduce.moved += (rg - 1) * seg + (cg - 1) * seg;
      plan.scatter.moved += 0;
    } else {
      plan.gather.moved += seg - own;
      plan.broadcast.moved += (rg - 1) * seg + (cg - 1) * seg;
      plan.reduce.moved += (rg - 1) * seg + (cg - 1) * seg;
      plan.scatter.moved += seg - own;
    }
  }
  plan.broadcast.assembled = plan.broadcast.moved;
  plan.reduce.assembled = plan.reduce.moved;
  plan.total_moved = plan.gather.moved + plan.broadcast.moved + plan.reduce.moved +
                     plan.scatter.moved;

  plan.broadcast_receives.assign(assign.processor_count(), 0);
  for (const CellAssignment& c : assign.cells)
    plan.broadcast_receives[c.processor] = c.block_row == c.block_col ? 0 : 2;
  return plan;
}

std::string to_json(const GridAssignment& assign, const CommPlan& plan) {
  std::ostringstream os;
  os << "{\n  \"schema\": 1,\n";
  os << "  \"nd\": " << assign.n_d << ",\n";
  os << "  \"processors\": " << assign.processor_count() << ",\n";
  os << "  \"group_cap\": " << assign.group_cap() << ",\n";
  os << "  \"cells\": [";
  for (std::size_t i = 0; i < assign.cells.size(); ++i) {
    const CellAssignment& c = assign.cells[i];
    os << (i ? ", " : "") << "{\"block\": [" << c.block_row << ", " << c.block_col
       << "], \"grid\": [" << c.grid_row << ", " << c.grid_col
       << "], \"proc\": " << c.processor << "}";
  }
  os << "],\n";
  os << "  \"dim\": " << plan.dim << ",\n  \"k\": " << plan.width << ",\n";
  os << "  \"fused\": " << (plan.fused ? "true" : "false") << ",\n";
  auto phase = [&](const char* name, const PhaseVolume& v, bool comma = true) {
    os << "  \"" << name << "\": {\"moved\": " << v.moved
       << ", \"assembled\": " << v.assembled << "}" << (comma ? ",\n" : "\n");
  };
  phase("gather", plan.gather);
  phase("broadcast", plan.broadcast);
  phase("reduce", plan.reduce);
  phase("scatter", plan.scatter);
  os << "  \"total_moved\": " << plan.total_moved << "\n}\n";
  return os.str();
}

}  // namespace ci
