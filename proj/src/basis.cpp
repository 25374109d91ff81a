// basis.cpp
#include "ci/basis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "ci/errors.hpp"

namespace ci {

void BasisSpec::validate() const {
  if (Z < 0 || N < 0) throw ConfigError("Z and N must be non-negative");
  if (Z + N < 1) throw ConfigError("at least one nucleon required");
  if (parity != +1 && parity != -1) throw ConfigError("parity must be +1 or -1");
  if (Nmax < 0) throw ConfigError("Nmax must be non-negative");
  if (((M2 % 2) + 2) % 2 != (Z + N) % 2)
    throw ConfigError("M2 must have the parity of A = Z + N");
  if (!(hbar_omega > 0)) throw ConfigError("hbar_omega must be positive");
}

std::vector<Orbital> enumerate_orbitals(int shell_cutoff) {
  std::vector<Orbital> orbitals;
  for (int shell = 0; shell <= shell_cutoff; ++shell) {
    std::vector<Orbital> in_shell;
    for (int l = shell % 2; l <= shell; l += 2) {
      int n = (shell - l) / 2;
      if (l > 0) in_shell.push_back({n, l, 2 * l - 1});
      in_shell.push_back({n, l, 2 * l + 1});
    }
    std::sort(in_shell.begin(), in_shell.end(),
              [](const Orbital& a, const Orbital& b) { return a.j2 < b.j2; });
    orbitals.insert(orbitals.end(), in_shell.begin(), in_shell.end());
  }
  return orbitals;
}

std::vector<SingleParticleState> enumerate_single_particle_states(int shell_cutoff) {
  std::vector<SingleParticleState> states;
  for (const Orbital& orb : enumerate_orbitals(shell_cutoff))
    for (int mj2 = -orb.j2; mj2 <= orb.j2; mj2 += 2)
      states.push_back({orb.n, orb.l, orb.j2, mj2});
  return states;
}

namespace {

// Quanta of the c-th particle (1-based) added in a greedy shell filling.
int greedy_particle_shell(int c) {
  int shell = 0, filled = 0;
  for (;;) {
    filled += (shell + 1) * (shell + 2);
    if (c <= filled) return shell;
    ++shell;
  }
}

int species_minimal_quanta(int count) {
  int total = 0;
  for (int c = 1; c <= count; ++c) total += greedy_particle_shell(c);
  return total;
}

// One species' Slater determinants, bucketed for the proton-neutron join.
struct SpeciesConfig {
  std::vector<std::uint16_t> occ;
  int quanta;
  int mj2;
  int parity;
};

void enumerate_species(const std::vector<SingleParticleState>& sp, int count,
                       int budget, std::vector<SpeciesConfig>& out) {
  const int n_sp = static_cast<int>(sp.size());
  // suffix_min[i][r] = least quanta of r states chosen from index i onward;
  // sp quanta are nondecreasing with index, so the cheapest choice is i..i+r-1.
  std::vector<std::uint16_t> occ;
  occ.reserve(count);

  auto min_rest = [&](int from, int r) {
    int q = 0;
    for (int t = 0; t < r; ++t) q += sp[from + t].quanta();
    return q;
  };

  struct Frame {
    int next;
    int quanta;
    int mj2;
    int parity;
  };

  // Depth-first over strictly increasing index lists.
  std::vector<Frame> stack;
  auto recurse = [&](auto&& self, int next, int quanta, int mj2, int parity) -> void {
    int picked = static_cast<int>(occ.size());
    if (picked == count) {
      out.push_back({occ, quanta, mj2, parity});
      return;
    }
    int remaining = count - picked;
    for (int i = next; i + remaining <= n_sp; ++i) {
      int q = quanta + sp[i].quanta();
      if (q + min_rest(i + 1, remaining - 1) > budget) break;  // quanta nondecreasing
      occ.push_back(static_cast<std::uint16_t>(i));
      self(self, i + 1, q, mj2 + sp[i].mj2, parity * sp[i].parity());
      occ.pop_back();
    }
  };
  recurse(recurse, 0, 0, 0, +1);
}

}  // namespace

int compute_N0(int Z, int N) {
  return species_minimal_quanta(Z) + species_minimal_quanta(N);
}

BasisTable enumerate_many_body_basis(const BasisSpec& spec) {
  spec.validate();

  const int n0 = compute_N0(spec.Z, spec.N);
  const int budget = n0 + spec.Nmax;

  // The Nmax budget bounds the quanta any single nucleon can carry: the rest
  // of its species plus the other species must still reach their minimum.
  int cutoff = 0;
  if (spec.Z > 0)
    cutoff = std::max(cutoff, budget - compute_N0(spec.Z - 1, spec.N));
  if (spec.N > 0)
    cutoff = std::max(cutoff, budget - compute_N0(spec.Z, spec.N - 1));

  BasisTable table;
  table.spec = spec;
  table.sp_states = enumerate_single_particle_states(cutoff);
  table.orbitals = enumerate_orbitals(cutoff);
  table.orbital_of_sp.resize(table.sp_states.size());
  {
    std::size_t s = 0;
    for (std::size_t o = 0; o < table.orbitals.size(); ++o)
      for (int m = 0; m < table.orbitals[o].multiplicity(); ++m)
        table.orbital_of_sp[s++] = static_cast<std::uint16_t>(o);
  }

  std::vector<SpeciesConfig> protons, neutrons;
  enumerate_species(table.sp_states, spec.Z,
                    budget - species_minimal_quanta(spec.N), protons);
  enumerate_species(table.sp_states, spec.N,
                    budget - species_minimal_quanta(spec.Z), neutrons);

  // Bucket the neutron configurations by (quanta, mj2, parity).
  std::map<std::tuple<int, int, int>, std::vector<const SpeciesConfig*>> buckets;
  for (const SpeciesConfig& nc : neutrons)
    buckets[{nc.quanta, nc.mj2, nc.parity}].push_back(&nc);

  std::vector<ManyBodyState> states;
  for (const SpeciesConfig& pc : protons) {
    for (int qn = 0; pc.quanta + qn <= budget; ++qn) {
      auto it = buckets.find({qn, spec.M2 - pc.mj2, spec.parity * pc.parity});
      if (it == buckets.end()) continue;
      for (const SpeciesConfig* nc : it->second)
        states.push_back({pc.occ, nc->occ, pc.quanta + qn});
    }
  }
  if (states.empty())
    throw EmptyBasis("no many-body state satisfies (M2, parity, Nmax)");

  // Canonical order: quanta stratum, then orbital-occupation key (protons
  // before neutrons) so that groups of states differing only in mj are
  // adjacent, then plain lexicographic order of the sp-index lists.
  auto orbital_key = [&](const std::vector<std::uint16_t>& occ) {
    std::vector<std::uint16_t> key(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) key[i] = table.orbital_of_sp[occ[i]];
    return key;  // sorted: orbital index is nondecreasing with sp index
  };
  struct SortKey {
    int quanta;
    std::vector<std::uint16_t> p_orb, n_orb;
    const ManyBodyState* state;
  };
  std::vector<SortKey> keys;
  keys.reserve(states.size());
  for (const ManyBodyState& s : states)
    keys.push_back({s.total_quanta, orbital_key(s.proton_occ),
                    orbital_key(s.neutron_occ), &s});
  std::sort(keys.begin(), keys.end(), [](const SortKey& a, const SortKey& b) {
    if (a.quanta != b.quanta) return a.quanta < b.quanta;
    if (a.p_orb != b.p_orb) return a.p_orb < b.p_orb;
    if (a.n_orb != b.n_orb) return a.n_orb < b.n_orb;
    if (a.state->proton_occ != b.state->proton_occ)
      return a.state->proton_occ < b.state->proton_occ;
    return a.state->neutron_occ < b.state->neutron_occ;
  });

  table.states.reserve(states.size());
  for (const SortKey& k : keys) table.states.push_back(*k.state);

  for (std::uint32_t i = 0; i < table.states.size(); ++i) {
    int q = table.states[i].total_quanta;
    if (table.stratum_quanta.empty() || table.stratum_quanta.back() != q) {
      table.stratum_quanta.push_back(q);
      table.quanta_boundaries.push_back(i);
    }
  }
  return table;
}

std::uint32_t BasisTable::leading_dimension(int nmax_small) const {
  const int limit = compute_N0(spec.Z, spec.N) + nmax_small;
  std::uint32_t dim = 0;
  for (std::size_t s = 0; s < stratum_quanta.size(); ++s)
    if (stratum_quanta[s] <= limit) dim = stratum_end(s);
  return dim;
}

int state_difference(const ManyBodyState& a, const ManyBodyState& b) {
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
  return moved(a.proton_occ, b.proton_occ) + moved(a.neutron_occ, b.neutron_occ);
}

namespace {

// Indices occupied in x but not in y.
void moved_indices(const std::vector<std::uint16_t>& x,
                   const std::vector<std::uint16_t>& y,
                   std::vector<std::uint16_t>& out) {
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) ++i, ++j;
    else if (x[i] < y[j]) out.push_back(x[i++]);
    else ++j;
  }
  while (i < x.size()) out.push_back(x[i++]);
}

}  // namespace

bool structurally_coupled(const BasisTable& basis, std::uint32_t a, std::uint32_t b,
                          int d) {
  const ManyBodyState& sa = basis.states[a];
  const ManyBodyState& sb = basis.states[b];
  const int diff = state_difference(sa, sb);
  if (diff > d) return false;
  if (diff != 2 || d != 2) return true;

  // The moved pair, drawn from either species.
  std::vector<std::uint16_t> from, to;
  moved_indices(sa.proton_occ, sb.proton_occ, from);
  moved_indices(sa.neutron_occ, sb.neutron_occ, from);
  moved_indices(sb.proton_occ, sa.proton_occ, to);
  moved_indices(sb.neutron_occ, sa.neutron_occ, to);
  const SingleParticleState& i = basis.sp_states[from[0]];
  const SingleParticleState& j = basis.sp_states[from[1]];
  const SingleParticleState& k = basis.sp_states[to[0]];
  const SingleParticleState& l = basis.sp_states[to[1]];
  int lo = std::max({std::abs(i.j2 - j.j2), std::abs(k.j2 - l.j2),
                     std::abs(i.mj2 + j.mj2)});
  int hi = std::min(i.j2 + j.j2, k.j2 + l.j2);
  return lo <= hi;
}

void dump_basis(const BasisTable& basis, std::ostream& os) {
  const BasisSpec& s = basis.spec;
  os << "# ci-eigen basis dump\n";
  os << "# Z=" << s.Z << " N=" << s.N << " M2=" << s.M2 << " parity=" << s.parity
     << " Nmax=" << s.Nmax << "\n";
  os << "# dimension " << basis.dimension() << "\n";
  os << "# single-particle states: index n l j2 mj2\n";
  for (std::size_t i = 0; i < basis.sp_states.size(); ++i) {
    const SingleParticleState& sp = basis.sp_states[i];
    os << "sp " << i << ' ' << sp.n << ' ' << sp.l << ' ' << sp.j2 << ' '
       << sp.mj2 << "\n";
  }
  os << "# many-body states: quanta | proton sp-indices | neutron sp-indices\n";
  for (const ManyBodyState& st : basis.states) {
    os << st.total_quanta << " |";
    for (auto i : st.proton_occ) os << ' ' << i;
    os << " |";
    for (auto i : st.neutron_occ) os << ' ' << i;
    os << "\n";
  }
}

void parse_nucleus(const std::string& name, int& Z, int& N) {
  static const std::map<std::string, int> element_z = {
      {"H", 1},  {"He", 2}, {"Li", 3}, {"Be", 4}, {"B", 5},  {"C", 6},
      {"N", 7},  {"O", 8},  {"F", 9},  {"Ne", 10}, {"Na", 11}, {"Mg", 12},
      {"Al", 13}, {"Si", 14}, {"P", 15}, {"S", 16}, {"Cl", 17}, {"Ar", 18},
      {"K", 19}, {"Ca", 20}};
  std::size_t i = 0;
  while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) ++i;
  if (i == 0 || i == name.size())
    throw ConfigError("nucleus must look like '6Li': " + name);
  int a = std::stoi(name.substr(0, i));
  auto it = element_z.find(name.substr(i));
  if (it == element_z.end()) throw ConfigError("unknown element in: " + name);
  Z = it->second;
  N = a - Z;
  if (N < 0) throw ConfigError("mass number below Z in: " + name);
}

}  // namespace ci
