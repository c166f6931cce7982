// ffthom: FFT-based unit-cell homogenization of linear conduction.
//
//   ffthom solve       --config run.json [--method cg] [--tol 1e-6] ...
//   ffthom sweep-omega --config run.json
//   ffthom scaling     --config run.json
//   ffthom verify      --config run.json [--seed 7] [--inject-fault]
//
// Exit codes: 0 success, 2 config error, 3 not converged, 4 verification
// failure, 1 anything else.

#include "ffthom/config.hpp"
#include "ffthom/errors.hpp"
#include "ffthom/experiments.hpp"
#include "ffthom/verification.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> method;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  bool allow_large = false;
  bool record_iterates = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides output.directory)");
  cmd->add_option("--method", o.method, "Solver for `solve`")
      ->check(CLI::IsMember({"cg", "ffth", "bicg"}));
  cmd->add_option("--tol", o.tol, "Relative residual tolerance");
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap");
  cmd->add_option("--seed", o.seed, "Seed for random instances");
  cmd->add_flag("--allow-large", o.allow_large, "Permit more than 96 nodes per axis in 3D");
  cmd->add_flag("--record-iterates", o.record_iterates, "Keep iterate snapshots in memory");
}

ffthom::RunConfig resolve(const Overrides& o) {
  ffthom::RunConfig cfg = ffthom::load_config(o.config_path);
  if (o.out) cfg.output.directory = *o.out;
  if (o.method) cfg.solver.method = ffthom::parse_method(*o.method);
  if (o.tol) cfg.solver.tol = *o.tol;
  if (o.max_iter) cfg.solver.max_iter = *o.max_iter;
  if (o.seed) cfg.seed = *o.seed;
  if (o.allow_large) cfg.allow_large = true;
  if (o.record_iterates) cfg.solver.record_iterates = true;
  ffthom::validate_config(cfg);
  return cfg;
}

int cmd_solve(const ffthom::RunConfig& cfg) {
  const ffthom::SolveOutcome out = ffthom::run_solve(cfg);
  std::cout << ffthom::to_string(cfg.solver.method) << ": " << out.result.iterations
            << " iterations, residual " << out.result.residual_history.back()
            << (out.result.converged ? " (converged)" : " (NOT converged)") << ", "
            << out.result.wall_time << " s\n";
  if (out.effective) std::cout << "effective tensor:\n" << out.effective->effective << '\n';
  std::cout << "wrote " << (std::filesystem::path(cfg.output.directory) / "result.json").string()
            << '\n';
  return out.exit_code;
}

int report_record(const ffthom::ExperimentRecord& record, const ffthom::RunConfig& cfg,
                  const std::string& stem) {
  record.save(cfg.output.directory, stem);
  record.write_csv(std::cout);
  for (const auto& status : record.column("status")) {
    if (status != "ok") return ffthom::kExitNotConverged;
  }
  return ffthom::kExitOk;
}

int cmd_verify(const ffthom::RunConfig& cfg, bool inject_fault) {
  const ffthom::VerifyReport report =
      ffthom::run_verify({.seed = cfg.seed, .inject_fault = inject_fault});
  std::filesystem::create_directories(cfg.output.directory);
  auto doc = report.to_json();
  doc["seed"] = cfg.seed;
  doc["inject_fault"] = inject_fault;
  std::ofstream(std::filesystem::path(cfg.output.directory) / "verify.json") << doc.dump(2)
                                                                             << '\n';
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
              << " threshold=" << c.threshold;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
  }
  return report.all_passed() ? ffthom::kExitOk : ffthom::kExitVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFT-based homogenization of periodic conduction problems"};
  app.require_subcommand(1);

  Overrides o;
  bool inject_fault = false;
  auto* solve = app.add_subcommand("solve", "Solve one cell problem, write result.json");
  auto* sweep = app.add_subcommand("sweep-omega", "CG vs FFTH iterations over omega, sweep.csv");
  auto* scaling = app.add_subcommand("scaling", "Timing over grid sizes, scaling.csv");
  auto* verify = app.add_subcommand("verify", "Run the invariant suite, verify.json");
  for (auto* cmd : {solve, sweep, scaling, verify}) add_common(cmd, o);
  verify->add_flag("--inject-fault", inject_fault, "Negate one Green operator block");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ffthom::kExitConfigError;
  }

  try {
    const ffthom::RunConfig cfg = resolve(o);
    if (*solve) return cmd_solve(cfg);
    if (*sweep) return report_record(ffthom::run_sweep_omega(cfg), cfg, "sweep");
    if (*scaling) return report_record(ffthom::run_scaling(cfg), cfg, "scaling");
    if (*verify) return cmd_verify(cfg, inject_fault);
  } catch (const ffthom::FormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ffthom::kExitConfigError;
  } catch (const ffthom::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ffthom::kExitConfigError;
  } catch (const ffthom::NotConverged& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return ffthom::kExitNotConverged;
  } catch (const ffthom::BreakdownDetected& e) {
    std::cerr << "solver breakdown: " << e.what() << '\n';
    return ffthom::kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ffthom::kExitFailure;
  }
  return ffthom::kExitFailure;
}
