// nldp: Monte Carlo and finite-difference solvers for exterior-value
// Dirichlet problems of jump-diffusion operators.

#include <iostream>

#include <CLI11.hpp>

#include "nldp/commands.hpp"
#include "nldp/parallel.hpp"

namespace {

struct Flags {
  nldp::CommandOptions opts;
  std::string points;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double h = 0.0;
  double alpha = 0.0;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.opts.config_path, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.opts.out_path, "Output CSV; the manifest goes to <out>.manifest.json")->required();
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--workers", f.opts.workers, "Parallel workers (default: NLDP_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
}

void add_paths(CLI::App* cmd, Flags& f) {
  cmd->add_option("--paths", f.paths, "Paths per point")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", f.dt, "Base time step")->check(CLI::PositiveNumber);
  cmd->add_option("--points", f.points, "Evaluation points 'x1,y1;x2,y2'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exterior-value Dirichlet solvers for jump-diffusion operators"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  Flags f;
  f.opts.workers = nldp::default_workers(1);

  auto* solve = app.add_subcommand("solve", "Monte Carlo solution at points");
  add_common(solve, f);
  add_paths(solve, f);

  auto* verify = app.add_subcommand("verify", "Statistical identity and scaling checks");
  add_common(verify, f);
  add_paths(verify, f);
  verify->add_option("--alpha", f.alpha, "Resolvent parameter")->check(CLI::PositiveNumber);
  verify->add_option("--which", f.opts.which, "prop23|resolvent_identity|exit_scaling|kato_decay|alpha_decay")
      ->required()
      ->check(CLI::IsMember({"prop23", "resolvent_identity", "exit_scaling", "kato_decay", "alpha_decay"}));

  auto* oracle = app.add_subcommand("oracle", "Finite-difference solution on a lattice");
  add_common(oracle, f);
  oracle->add_option("--h", f.h, "Mesh width")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Monte Carlo against the refined finite-difference oracle");
  add_common(compare, f);
  add_paths(compare, f);
  compare->add_option("--h", f.h, "Mesh width of the coarse oracle")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nldp::kExitValidation;
  }

  auto* cmd = app.get_subcommands().front();
  auto given = [cmd](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
  if (given("--points")) f.opts.points = f.points;
  if (given("--paths")) f.opts.paths = f.paths;
  if (given("--seed")) f.opts.seed = f.seed;
  if (given("--dt")) f.opts.dt = f.dt;
  if (given("--h")) f.opts.h = f.h;
  if (given("--alpha")) f.opts.alpha = f.alpha;

  if (cmd == solve) return nldp::cmd_solve(f.opts, std::cerr);
  if (cmd == verify) return nldp::cmd_verify(f.opts, std::cerr);
  if (cmd == oracle) return nldp::cmd_oracle(f.opts, std::cerr);
  return nldp::cmd_compare(f.opts, std::cerr);
}
