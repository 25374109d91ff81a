// ci_eigen.cpp -- command-line driver: basis inspection, structure stats,
// matrix assembly, eigensolves, solver comparisons, and grid planning.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "ci/basis.hpp"
#include "ci/config.hpp"
#include "ci/csb.hpp"
#include "ci/errors.hpp"
#include "ci/guess.hpp"
#include "ci/hamiltonian.hpp"
#include "ci/lanczos.hpp"
#include "ci/lobpcg.hpp"
#include "ci/planner.hpp"
#include "ci/precond.hpp"

namespace {

using ci::RunConfig;

void apply_threads(const RunConfig& config) {
  int threads = config.threads;
  if (threads == 0) {
    if (const char* env = std::getenv("CI_EIGEN_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

// Registers the options shared by every subcommand that builds a problem.
void add_problem_options(CLI::App* cmd, RunConfig& config, std::string& nucleus) {
  cmd->add_option("--nucleus", nucleus, "nucleus shorthand, e.g. 6Li (sets Z and N)");
  cmd->add_option("--z,-Z", config.Z, "proton count");
  cmd->add_option("--n,-N", config.N, "neutron count");
  cmd->add_option("--m2", config.M2, "doubled angular momentum projection 2M");
  cmd->add_option("--parity", config.parity, "parity, +1 or -1");
  cmd->add_option("--nmax", config.nmax, "Nmax truncation");
  cmd->add_option("--hw", config.hbar_omega, "oscillator energy scale");
  cmd->add_option("--d-body", config.d, "interaction body rank (2 or 3)");
  cmd->add_option("--beta", config.beta, "CSB block size bound");
  cmd->add_option("--seed", config.seed, "synthetic-interaction seed");
  cmd->add_option("--offdiag-scale", config.offdiag_scale, "off-diagonal scale");
  cmd->add_option("--elements", config.elements, "coordinate element file");
  cmd->add_option("--storage", config.storage, "matrix storage: single or double");
  cmd->add_option("--threads", config.threads, "worker thread cap (0 = default)");
  cmd->set_config("--config");
}

void resolve_nucleus(const std::string& nucleus, RunConfig& config) {
  if (!nucleus.empty()) ci::parse_nucleus(nucleus, config.Z, config.N);
}

ci::Problem build_problem(const RunConfig& config) {
  config.validate();
  if (config.elements.empty())
    return ci::build_synthetic_problem(config.basis_spec(), config.seed,
                                       config.offdiag_scale, config.d, config.beta,
                                       config.storage == "single"
                                           ? ci::Precision::Single
                                           : ci::Precision::Double);
  ci::Problem p;
  p.basis = std::make_shared<ci::BasisTable>(
      ci::enumerate_many_body_basis(config.basis_spec()));
  p.partition = ci::group_states(*p.basis);
  if (p.partition.max_group_size() > config.beta)
    p.partition = ci::split_groups(p.partition, *p.basis, config.beta);
  p.tiles = ci::determine_nonzero_tiles(p.partition, config.d);
  p.layout = ci::plan_csb_blocks(p.partition, *p.basis, config.beta);
  p.provider = ci::load_coordinate_file(config.elements, *p.basis, config.d);
  ci::AssembleOptions opts;
  opts.precision =
      config.storage == "single" ? ci::Precision::Single : ci::Precision::Double;
  p.matrix = ci::assemble(p.tiles, p.layout, p.partition, p.provider.element, opts);
  return p;
}

nlohmann::ordered_json stats_json(const ci::StructureStats& st) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["dimension"] = st.dimension;
  j["groups"] = st.groups;
  j["nonzero_tiles"] = st.nonzero_tiles;
  j["nonzero_elements"] = st.nonzero_elements;
  j["tile_sparsity"] = st.tile_sparsity;
  j["element_sparsity"] = st.element_sparsity;
  j["csb_blocks"] = st.csb_blocks;
  j["max_group"] = st.max_group;
  j["mean_group"] = st.mean_group;
  // companion values so each published ratio can be checked in its own
  // convention: tile_sparsity divides the inclusive tile count by the
  // off-diagonal pair count
  j["tile_pairs_offdiag"] = st.tile_pairs_offdiag;
  j["element_pairs"] = st.element_pairs;
  j["mean_block"] = st.mean_block;
  return j;
}

struct GuessResult {
  ci::BlockVectors block;
  std::vector<ci::LevelReport> levels;
};

GuessResult make_guess(const RunConfig& config, const ci::Problem& problem) {
  const std::uint32_t dim = problem.matrix.dim;
  const int k_trial = config.trial_width();
  GuessResult out;
  if (config.guess == "random") {
    out.block = ci::orthonormalize(ci::random_block(dim, k_trial, config.seed));
    return out;
  }
  if (config.guess.rfind("file:", 0) == 0) {
    out.block = ci::load_guess_file(config.guess.substr(5), dim, k_trial);
    return out;
  }
  ci::MultilevelOptions mo;
  mo.levels = config.guess == "pad" ? 2 : config.levels;
  mo.k_want = config.k_want;
  mo.k_trial = k_trial;
  mo.tol = config.tol;
  mo.max_iter = config.max_iter;
  mo.seed = config.seed;
  RunConfig level_config = config;
  auto factory = [&level_config](const ci::BasisSpec& spec) {
    RunConfig c = level_config;
    c.nmax = spec.Nmax;
    return build_problem(c);
  };
  ci::MultilevelResult ml = ci::multilevel_guess(problem.basis->spec, mo, factory);
  out.block = std::move(ml.guess);
  out.levels = std::move(ml.levels);
  return out;
}

ci::SolveReport run_solver(const RunConfig& config, const ci::Problem& problem,
                           const ci::BlockVectors& guess,
                           const ci::TileDiagonal* tiles) {
  if (config.solver == "lobpcg") {
    ci::LobpcgOptions opt;
    opt.k_want = config.k_want;
    opt.tol = config.tol;
    opt.max_iter = config.max_iter;
    opt.preconditioner = tiles;
    opt.precond_config.inner_iters = config.precond_inner_iters;
    opt.precond_config.small_block_cutoff = config.precond_direct_cutoff;
    return ci::lobpcg_solve(problem.matrix, guess, opt);
  }
  // Lanczos takes a single start vector: the leading guess column, or the
  // deterministic default for random starts.
  ci::LanczosOptions opt;
  opt.k_want = config.k_want;
  opt.tol = config.tol;
  opt.max_iter = config.max_iter;
  Eigen::VectorXd v0;
  if (config.guess == "random") {
    v0 = ci::lanczos_default_start(*problem.basis);
  } else {
    v0.resize(problem.matrix.dim);
    for (std::uint32_t i = 0; i < problem.matrix.dim; ++i) v0(i) = guess.at(i, 0);
  }
  return ci::lanczos_solve(problem.matrix, v0, opt);
}

int cmd_basis(const RunConfig& config, const std::string& dump_path) {
  ci::BasisTable basis = ci::enumerate_many_body_basis(config.basis_spec());
  ci::GroupPartition part = ci::group_states(basis);
  std::cout << "dimension " << basis.dimension() << "\n";
  std::cout << "groups " << part.group_count() << "\n";
  std::cout << "strata";
  for (std::size_t s = 0; s < basis.stratum_quanta.size(); ++s)
    std::cout << " " << basis.stratum_quanta[s] << ":"
              << basis.stratum_end(s) - basis.quanta_boundaries[s];
  std::cout << "\n";
  if (!dump_path.empty()) {
    std::ofstream os(dump_path);
    if (!os) throw ci::FormatError("cannot open for writing: " + dump_path);
    ci::dump_basis(basis, os);
  }
  return 0;
}

int cmd_stats(const RunConfig& config) {
  ci::BasisTable basis = ci::enumerate_many_body_basis(config.basis_spec());
  ci::GroupPartition part = ci::group_states(basis);
  if (part.max_group_size() > config.beta)
    part = ci::split_groups(part, basis, config.beta);
  ci::TileMap tiles = ci::determine_nonzero_tiles(part, config.d);
  ci::CsbLayout layout = ci::plan_csb_blocks(part, basis, config.beta);
  ci::StructureStats st = ci::structure_stats(basis, part, tiles, layout);
  std::cout << stats_json(st).dump(2) << "\n";
  return 0;
}

int cmd_assemble(const RunConfig& config, const std::string& out_path) {
  ci::Problem problem = build_problem(config);
  if (!out_path.empty()) ci::save_csb(problem.matrix, out_path);
  ci::MatrixStats st = ci::matrix_stats(problem.matrix);
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["dimension"] = st.dim;
  j["nnz_lower"] = st.nnz_lower;
  j["element_sparsity"] = st.element_sparsity;
  j["csb_blocks"] = st.csb_blocks;
  j["groups"] = st.groups;
  j["nonzero_tiles"] = st.nonzero_tiles;
  j["tile_sparsity"] = st.tile_sparsity;
  if (!out_path.empty()) j["written"] = out_path;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_solve(const RunConfig& config) {
  ci::Problem problem = build_problem(config);
  GuessResult guess = make_guess(config, problem);

  ci::TileDiagonal tiles;
  const ci::TileDiagonal* tiles_ptr = nullptr;
  if (config.precond == "tile") {
    tiles = ci::extract_tile_diagonal(problem.matrix, problem.partition);
    tiles_ptr = &tiles;
  }

  ci::SolveReport report = run_solver(config, problem, guess.block, tiles_ptr);

  for (const ci::LevelReport& level : guess.levels)
    std::cout << "level nmax=" << level.nmax << " dim=" << level.dim
              << " iterations=" << level.iterations << " time=" << level.seconds
              << "s\n";
  std::cout << "solver " << config.solver << " iterations " << report.iterations
            << (report.converged ? "" : " (NOT converged)") << "\n";
  std::cout << "spmm_calls " << report.counters.spmm_calls << " spmv_equivalents "
            << report.counters.spmv_equivalents << " precond_applications "
            << report.counters.precond_applications << " orthogonalizations "
            << report.counters.orthogonalizations << "\n";
  char buf[64];
  for (std::size_t j = 0; j < report.eigenvalues.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.12f", report.eigenvalues[j]);
    std::cout << "eigenvalue " << j << " " << buf << "\n";
  }

  if (!config.history.empty()) {
    std::ofstream os(config.history, std::ios::binary);
    if (!os) throw ci::FormatError("cannot open for writing: " + config.history);
    ci::write_history_csv(report, os);
  }
  if (!config.save_vectors.empty())
    ci::save_vectors(report.eigenvectors, config.save_vectors);
  return report.converged ? 0 : 2;
}

int cmd_compare(const RunConfig& base, const std::string& seeds_arg) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(seeds_arg);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw ci::ConfigError("--seeds needs a comma-separated list");

  std::cout << "seed  neither  guess-only  precond-only  precond+guess  ordering\n";
  std::size_t satisfied = 0;
  for (std::uint64_t seed : seeds) {
    RunConfig config = base;
    config.seed = seed;
    config.solver = "lobpcg";
    ci::Problem problem = build_problem(config);
    ci::TileDiagonal tiles =
        ci::extract_tile_diagonal(problem.matrix, problem.partition);

    RunConfig with_guess = config;
    with_guess.guess = "pad";
    ci::BlockVectors random_x0 = ci::orthonormalize(
        ci::random_block(problem.matrix.dim, config.trial_width(), seed));
    ci::BlockVectors padded = make_guess(with_guess, problem).block;

    auto iterations = [&](const ci::BlockVectors& x0, const ci::TileDiagonal* t) {
      ci::SolveReport r = run_solver(config, problem, x0, t);
      return r.converged ? r.iterations : -r.iterations;
    };
    int neither = iterations(random_x0, nullptr);
    int guess_only = iterations(padded, nullptr);
    int precond_only = iterations(random_x0, &tiles);
    int both = iterations(padded, &tiles);
    bool ok = both < guess_only && both < precond_only && precond_only < neither;
    satisfied += ok;
    std::printf("%4llu  %7d  %10d  %12d  %13d  %s\n",
                static_cast<unsigned long long>(seed), neither, guess_only,
                precond_only, both, ok ? "ok" : "violated");
  }
  std::cout << satisfied << "/" << seeds.size() << " seeds satisfy the ordering\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configuration-interaction eigensolver workbench"};
  app.require_subcommand(1);

  RunConfig config;
  std::string nucleus;
  std::string dump_path, out_path, seeds_arg = "1,2,3,4,5";
  int nd = 5;
  std::uint64_t plan_dim = 800, plan_k = 12;
  bool fused = false;

  CLI::App* basis_cmd = app.add_subcommand("basis", "enumerate the many-body basis");
  add_problem_options(basis_cmd, config, nucleus);
  basis_cmd->add_option("--dump", dump_path, "write the basis as text");

  CLI::App* stats_cmd = app.add_subcommand("stats", "structure statistics as JSON");
  add_problem_options(stats_cmd, config, nucleus);

  CLI::App* assemble_cmd =
      app.add_subcommand("assemble", "assemble the Hamiltonian, optionally dump CSB1");
  add_problem_options(assemble_cmd, config, nucleus);
  assemble_cmd->add_option("--out", out_path, "CSB1 output path");

  CLI::App* solve_cmd = app.add_subcommand("solve", "compute the lowest eigenpairs");
  add_problem_options(solve_cmd, config, nucleus);
  solve_cmd->add_option("--solver", config.solver, "lobpcg or lanczos");
  solve_cmd->add_option("--k", config.k_want, "eigenpairs wanted");
  solve_cmd->add_option("--k-trial", config.k_trial, "trial block width (0 = 1.5k)");
  solve_cmd->add_option("--tol", config.tol, "relative residual tolerance");
  solve_cmd->add_option("--maxit", config.max_iter, "iteration cap");
  solve_cmd->add_option("--precond", config.precond, "none or tile");
  solve_cmd->add_option("--precond-inner-iters", config.precond_inner_iters,
                        "FOM iterations, 1..3");
  solve_cmd->add_option("--precond-direct-cutoff", config.precond_direct_cutoff,
                        "dense direct solve at or below this block size");
  solve_cmd->add_option("--guess", config.guess,
                        "random | pad | multilevel | file:PATH");
  solve_cmd->add_option("--levels", config.levels, "multilevel depth");
  solve_cmd->add_option("--history", config.history, "convergence CSV path");
  solve_cmd->add_option("--save-vectors", config.save_vectors, "BVEC output path");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "preconditioner/guess iteration comparison");
  add_problem_options(compare_cmd, config, nucleus);
  compare_cmd->add_option("--seeds", seeds_arg, "comma-separated seed list");
  compare_cmd->add_option("--k", config.k_want, "eigenpairs wanted");
  compare_cmd->add_option("--tol", config.tol, "relative residual tolerance");
  compare_cmd->add_option("--maxit", config.max_iter, "iteration cap");

  CLI::App* plan_cmd = app.add_subcommand("plan-grid", "BCM grid and volume plan");
  plan_cmd->add_option("--nd", nd, "odd grid order");
  plan_cmd->add_option("--dim", plan_dim, "vector dimension D");
  plan_cmd->add_option("--k", plan_k, "block width k");
  plan_cmd->add_flag("--fused", fused, "fuse column-group collectives");

  try {
    app.parse(argc, argv);
    resolve_nucleus(nucleus, config);
    apply_threads(config);

    if (basis_cmd->parsed()) return cmd_basis(config, dump_path);
    if (stats_cmd->parsed()) return cmd_stats(config);
    if (assemble_cmd->parsed()) return cmd_assemble(config, out_path);
    if (solve_cmd->parsed()) return cmd_solve(config);
    if (compare_cmd->parsed()) return cmd_compare(config, seeds_arg);
    if (plan_cmd->parsed()) {
      ci::GridAssignment assign = ci::bcm_map(nd);
      std::cout << ci::to_json(assign,
                               ci::communication_plan(assign, plan_dim, plan_k, fused));
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ci::Error& e) {
    std::cerr << "ci-eigen: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ci-eigen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
