// hamiltonian.hpp -- matrix-element sources and the tile-diagonal blocks.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ci/basis.hpp"
#include "ci/csb.hpp"
#include "ci/grouping.hpp"

namespace ci {

// A symmetric element source over a fixed basis. The callable must return 0
// for pairs the d-body structure cannot couple. Holds a pointer to the basis
// it was built over; the basis must outlive the provider.
struct ElementProvider {
  ElementFn element;
  int d = 2;
  std::uint64_t seed = 0;
  double offdiag_scale = 0.0;
  std::string origin;
};

// Deterministic synthetic Hamiltonian with u(.) in [-1, 1) from
// hash3 (rng.hpp):
//   diagonal   (quanta(a) + 0.8 u(seed, a, a)) * hbar_omega
//   coupled    offdiag_scale * w * u(seed, min, max),
//              w = 2 inside an orbital-occupation group, 0.5 across groups
// and exactly zero on structurally uncoupled pairs. The basis must outlive
// the provider.
ElementProvider synthetic_provider(const BasisTable& basis, std::uint64_t seed,
                                   double offdiag_scale, int d);

// All-ones provider over the coupled pairs; reproduces the structural
// nonzero counts when assembled.
ElementProvider structural_provider(const BasisTable& basis, int d);

// Text coordinate file: '#' comments, a `dim D` header, then `i j value`
// with 0-based indices. Missing entries are zero; symmetry is enforced by
// keying on (min, max). Throws FormatError, DimensionMismatch,
// AsymmetryError.
ElementProvider load_coordinate_file(const std::string& path, const BasisTable& basis,
                                     int d = 2);
void save_coordinate_file(const CsbMatrix& h, const std::string& path);

// Assemble the Hamiltonian over the leading sub-basis (smaller Nmax, same
// Z/N/M2/parity); equals the leading principal submatrix of the full
// assembly. Throws SpecMismatch.
CsbMatrix sub_hamiltonian(const ElementProvider& provider, const BasisTable& basis_full,
                          const BasisTable& basis_small, std::uint32_t beta,
                          Precision precision = Precision::Single);

// Dense per-group diagonal blocks of H, double precision.
struct TileDiagonal {
  std::vector<Eigen::MatrixXd> blocks;                       // one per group
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;  // group [start,end)

  std::uint32_t group_count() const { return static_cast<std::uint32_t>(blocks.size()); }
};

TileDiagonal extract_tile_diagonal(const CsbMatrix& h, const GroupPartition& partition);

// Convenience bundle: basis -> partition -> tiles -> layout -> matrix.
// The basis sits behind a shared_ptr so provider closures stay valid when
// the bundle moves.
struct Problem {
  std::shared_ptr<BasisTable> basis;
  GroupPartition partition;
  TileMap tiles;
  CsbLayout layout;
  CsbMatrix matrix;
  ElementProvider provider;
};

// Builds the full pipeline for a spec; splits groups first when some group
// exceeds beta.
Problem build_synthetic_problem(const BasisSpec& spec, std::uint64_t seed,
                                double offdiag_scale, int d, std::uint32_t beta,
                                Precision precision = Precision::Single);

}  // namespace ci
