// basis.hpp -- harmonic-oscillator single-particle states and the M-scheme
// many-body basis under the Nmax truncation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ci {

// Angular momenta are stored doubled (j2 = 2j, mj2 = 2mj, M2 = 2M) so that
// every quantum number is an exact integer.
struct SingleParticleState {
  int n;    // radial quantum number
  int l;    // orbital angular momentum
  int j2;   // 2j, odd, j = l +/- 1/2
  int mj2;  // 2mj, odd, -j2 .. j2

  int quanta() const { return 2 * n + l; }
  int parity() const { return (l % 2 == 0) ? +1 : -1; }

  bool operator==(const SingleParticleState&) const = default;
};

// The (n, l, j) multiplet; holds j2 + 1 states.
struct Orbital {
  int n;
  int l;
  int j2;

  int quanta() const { return 2 * n + l; }
  int multiplicity() const { return j2 + 1; }

  bool operator==(const Orbital&) const = default;
};

struct BasisSpec {
  int Z = 0;               // proton count
  int N = 0;               // neutron count
  int M2 = 0;              // doubled total angular momentum projection
  int parity = +1;         // +1 or -1
  int Nmax = 0;            // truncation above the Pauli-minimal quanta
  double hbar_omega = 1.0; // energy scale for diagonal elements

  void validate() const;  // throws ConfigError
  bool operator==(const BasisSpec&) const = default;
};

struct ManyBodyState {
  std::vector<std::uint16_t> proton_occ;   // strictly increasing sp indices
  std::vector<std::uint16_t> neutron_occ;  // strictly increasing sp indices
  int total_quanta = 0;

  bool operator==(const ManyBodyState&) const = default;
};

class BasisTable {
 public:
  BasisSpec spec;
  std::vector<SingleParticleState> sp_states;
  std::vector<Orbital> orbitals;
  std::vector<std::uint16_t> orbital_of_sp;  // sp index -> orbital index
  std::vector<ManyBodyState> states;

  // Strata of constant total_quanta, ascending; starts[i] is the first state
  // of stratum i, and starts.size() == quanta.size().
  std::vector<std::uint32_t> quanta_boundaries;
  std::vector<int> stratum_quanta;

  std::uint32_t dimension() const { return static_cast<std::uint32_t>(states.size()); }
  std::uint32_t stratum_end(std::size_t s) const {
    return s + 1 < quanta_boundaries.size() ? quanta_boundaries[s + 1] : dimension();
  }
  // Dimension of the sub-basis truncated at Nmax_small (same spec otherwise).
  std::uint32_t leading_dimension(int nmax_small) const;
};

// All (n, l, j, mj) states with 2n + l <= shell_cutoff, ordered shell by
// shell, then by j ascending, then mj ascending.
std::vector<SingleParticleState> enumerate_single_particle_states(int shell_cutoff);

// Orbitals in the matching order (shell, then j ascending).
std::vector<Orbital> enumerate_orbitals(int shell_cutoff);

// Minimal total oscillator quanta for (Z, N) under Pauli exclusion.
int compute_N0(int Z, int N);

// Enumerate the many-body basis in canonical order: total quanta ascending;
// within a stratum states sharing orbital occupations are kept adjacent
// (proton occupation key before neutron), and within such a run states are
// ordered by proton then neutron sp-index lists. Throws EmptyBasis when no
// state satisfies (M2, parity, Nmax).
BasisTable enumerate_many_body_basis(const BasisSpec& spec);

// Number of single-particle states the two species differ in, i.e. the
// Slater-Condon distance: |A \ B| summed over protons and neutrons.
int state_difference(const ManyBodyState& a, const ManyBodyState& b);

// Whether a d-body rotationally invariant interaction can couple states a
// and b. Pairs within Slater-Condon distance d qualify, except that a
// two-particle move is a single two-body matrix element and is zero unless
// the departing and arriving pairs admit a common total angular momentum at
// the pair projection: max(|j_i-j_j|, |j_k-j_l|, |m_i+m_j|) <= min(j_i+j_j,
// j_k+j_l).
bool structurally_coupled(const BasisTable& basis, std::uint32_t a, std::uint32_t b,
                          int d);

// Text dump: '#' header lines, the sp-state list, then one line per state
// `quanta | proton sp-indices | neutron sp-indices`.
void dump_basis(const BasisTable& basis, std::ostream& os);

// Nucleus shorthand such as "6Li" -> (Z=3, N=3). Throws ConfigError.
void parse_nucleus(const std::string& name, int& Z, int& N);

}  // namespace ci
