// hamiltonian.cpp
#include "ci/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ci/errors.hpp"
#include "ci/rng.hpp"

namespace ci {

namespace {

// Same orbital occupations for both species (the Eq.-style group relation),
// computed directly from the states.
bool same_orbital_group(const BasisTable& b, std::uint32_t i, std::uint32_t j) {
  auto same = [&](const std::vector<std::uint16_t>& x, const std::vector<std::uint16_t>& y) {
    for (std::size_t t = 0; t < x.size(); ++t)
      if (b.orbital_of_sp[x[t]] != b.orbital_of_sp[y[t]]) return false;
    return true;
  };
  const ManyBodyState& a = b.states[i];
  const ManyBodyState& c = b.states[j];
  return same(a.proton_occ, c.proton_occ) && same(a.neutron_occ, c.neutron_occ);
}

// Synthetic-interaction texture. Configurations in the same group interact
// strongly, cross-group couplings are weaker, and the diagonal varies within
// a stratum by less than half the stratum gap; this keeps the low
// eigenvectors concentrated in the low-quanta strata while giving the
// tile-diagonal blocks real content.
constexpr double kDiagJitter = 0.8;
constexpr double kInGroupWeight = 2.0;
constexpr double kCrossGroupWeight = 0.5;

}  // namespace

ElementProvider synthetic_provider(const BasisTable& basis, std::uint64_t seed,
                                   double offdiag_scale, int d) {
  if (!(offdiag_scale > 0)) throw ConfigError("offdiag_scale must be positive");
  ElementProvider p;
  p.d = d;
  p.seed = seed;
  p.offdiag_scale = offdiag_scale;
  p.origin = "synthetic(seed=" + std::to_string(seed) + ")";
  const BasisTable* b = &basis;
  const double hw = basis.spec.hbar_omega;
  p.element = [b, seed, offdiag_scale, d, hw](std::uint32_t i, std::uint32_t j) {
    if (i == j)
      return (b->states[i].total_quanta + kDiagJitter * symmetric_double(seed, i, i)) * hw;
    if (!structurally_coupled(*b, i, j, d)) return 0.0;
    double w = same_orbital_group(*b, i, j) ? kInGroupWeight : kCrossGroupWeight;
    return offdiag_scale * w * symmetric_double(seed, std::min(i, j), std::max(i, j));
  };
  return p;
}

ElementProvider structural_provider(const BasisTable& basis, int d) {
  ElementProvider p;
  p.d = d;
  p.origin = "structural";
  const BasisTable* b = &basis;
  p.element = [b, d](std::uint32_t i, std::uint32_t j) {
    return structurally_coupled(*b, i, j, d) ? 1.0 : 0.0;
  };
  return p;
}

namespace {

inline std::uint64_t pair_key(std::uint32_t i, std::uint32_t j) {
  return (static_cast<std::uint64_t>(std::min(i, j)) << 32) | std::max(i, j);
}

}  // namespace

ElementProvider load_coordinate_file(const std::string& path, const BasisTable& basis,
                                     int d) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open: " + path);

  auto table = std::make_shared<std::unordered_map<std::uint64_t, double>>();
  std::string line;
  std::size_t lineno = 0;
  bool have_dim = false;
  std::uint64_t dim = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;  // blank
    if (first == "dim") {
      if (!(ss >> dim)) throw FormatError(path + ":" + std::to_string(lineno) +
                                          ": malformed dim header");
      have_dim = true;
      continue;
    }
    if (!have_dim)
      throw FormatError(path + ": `dim D` header must precede entries");
    std::uint64_t i, j;
    double v;
    std::istringstream entry(line);
    if (!(entry >> i >> j >> v))
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected `i j value`");
    if (i >= dim || j >= dim)
      throw FormatError(path + ":" + std::to_string(lineno) + ": index out of range");
    std::uint64_t key = pair_key(static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(j));
    auto [it, inserted] = table->emplace(key, v);
    if (!inserted) {
      double prev = it->second;
      double scale = std::max({std::fabs(prev), std::fabs(v), 1e-300});
      if (std::fabs(prev - v) > 1e-6 * scale)
        throw AsymmetryError(path + ":" + std::to_string(lineno) +
                             ": duplicate entry disagrees with earlier value");
    }
  }
  if (!have_dim) throw FormatError(path + ": missing `dim D` header");
  if (dim != basis.dimension())
    throw DimensionMismatch("coordinate file dimension " + std::to_string(dim) +
                            " != basis dimension " + std::to_string(basis.dimension()));

  ElementProvider p;
  p.d = d;
  p.origin = path;
  p.element = [table](std::uint32_t i, std::uint32_t j) {
    auto it = table->find(pair_key(i, j));
    return it == table->end() ? 0.0 : it->second;
  };
  return p;
}

void save_coordinate_file(const CsbMatrix& h, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os << "# coordinate dump, lower triangle\n";
  os << "dim " << h.dim << "\n";
  char buf[64];
  for (std::uint32_t i = 0; i < h.block_count(); ++i) {
    for (std::uint32_t j = 0; j <= i; ++j) {
      const CoordinateBlock& b = h.block(i, j);
      const std::uint32_t rbase = h.layout.block_boundaries[i];
      const std::uint32_t cbase = h.layout.block_boundaries[j];
      const std::uint32_t bid = i * (i + 1) / 2 + j;
      for (std::size_t e = 0; e < b.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%.17g", h.value(bid, e));
        os << rbase + b.rows[e] << ' ' << cbase + b.cols[e] << ' ' << buf << "\n";
      }
    }
  }
}

CsbMatrix sub_hamiltonian(const ElementProvider& provider, const BasisTable& basis_full,
                          const BasisTable& basis_small, std::uint32_t beta,
                          Precision precision) {
  const BasisSpec& f = basis_full.spec;
  const BasisSpec& s = basis_small.spec;
  if (f.Z != s.Z || f.N != s.N || f.M2 != s.M2 || f.parity != s.parity)
    throw SpecMismatch("sub-basis must share Z, N, M2 and parity");
  if (s.Nmax > f.Nmax || (f.Nmax - s.Nmax) % 2 != 0)
    throw SpecMismatch("sub-basis Nmax must be Nmax - 2m");
  if (basis_full.leading_dimension(s.Nmax) != basis_small.dimension())
    throw SpecMismatch("sub-basis is not the leading block of the full basis");

  GroupPartition part = group_states(basis_small);
  if (part.max_group_size() > beta) part = split_groups(part, basis_small, beta);
  TileMap tiles = determine_nonzero_tiles(part, provider.d);
  CsbLayout layout = plan_csb_blocks(part, basis_small, beta);
  AssembleOptions opts;
  opts.precision = precision;
  return assemble(tiles, layout, part, provider.element, opts);
}

TileDiagonal extract_tile_diagonal(const CsbMatrix& h, const GroupPartition& partition) {
  TileDiagonal tiles;
  tiles.ranges = partition.group_ranges;
  tiles.blocks.resize(partition.group_count());
  for (std::uint32_t g = 0; g < partition.group_count(); ++g) {
    auto [s, e] = partition.group_ranges[g];
    tiles.blocks[g] = Eigen::MatrixXd::Zero(e - s, e - s);
  }
  // Diagonal tiles live inside diagonal CSB blocks.
  for (std::uint32_t i = 0; i < h.block_count(); ++i) {
    const CoordinateBlock& b = h.block(i, i);
    const std::uint32_t base = h.layout.block_boundaries[i];
    const std::uint32_t bid = i * (i + 1) / 2 + i;
    for (std::size_t e = 0; e < b.size(); ++e) {
      const std::uint32_t r = base + b.rows[e];
      const std::uint32_t c = base + b.cols[e];
      const std::uint32_t g = partition.group_of_state[r];
      if (partition.group_of_state[c] != g) continue;
      const std::uint32_t s = partition.group_ranges[g].first;
      const double v = h.value(bid, e);
      tiles.blocks[g](r - s, c - s) = v;
      tiles.blocks[g](c - s, r - s) = v;
    }
  }
  return tiles;
}

Problem build_synthetic_problem(const BasisSpec& spec, std::uint64_t seed,
                                double offdiag_scale, int d, std::uint32_t beta,
                                Precision precision) {
  Problem p;
  p.basis = std::make_shared<BasisTable>(enumerate_many_body_basis(spec));
  p.partition = group_states(*p.basis);
  if (p.partition.max_group_size() > beta)
    p.partition = split_groups(p.partition, *p.basis, beta);
  p.tiles = determine_nonzero_tiles(p.partition, d);
  p.layout = plan_csb_blocks(p.partition, *p.basis, beta);
  p.provider = synthetic_provider(*p.basis, seed, offdiag_scale, d);
  // Keep the basis alive inside the provider closure as well.
  auto keep = p.basis;
  auto fn = p.provider.element;
  p.provider.element = [keep, fn](std::uint32_t i, std::uint32_t j) { return fn(i, j); };
  AssembleOptions opts;
  opts.precision = precision;
  p.matrix = assemble(p.tiles, p.layout, p.partition, p.provider.element, opts);
  return p;
}

}  // namespace ci
