#include "ffthom/config.hpp"
#include "ffthom/errors.hpp"
#include "ffthom/experiments.hpp"
#include "ffthom/random_instances.hpp"
#include "ffthom/verification.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ffthom;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_doc() {
  return json::parse(R"({
    "grid": {"d": 3, "n": 8, "Y": 0.5},
    "microstructure": {"type": "sphere", "rho": 10},
    "reference": {"omega": 0.5},
    "load": [1, 0, 0],
    "solver": {"method": "cg", "tol": 1e-8, "max_iter": 500}
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ffthom_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FFTHOM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_json(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "run.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST(Config, ParsesDefaultsAndOverrides) {
  const RunConfig cfg = parse_config(small_doc());
  EXPECT_EQ(cfg.grid.dim, 3);
  EXPECT_EQ(cfg.grid.n, (std::vector<int>{8, 8, 8}));
  EXPECT_EQ(*cfg.microstructure.contrast, 10.0);
  EXPECT_EQ(*cfg.reference.omega, 0.5);
  EXPECT_FALSE(cfg.reference.lambda.has_value());
  EXPECT_EQ(cfg.solver.max_iter, 500);
  const SolverConfig sc = solver_config(cfg);
  EXPECT_EQ(sc.method, Method::cg);
  EXPECT_DOUBLE_EQ(sc.tol, 1e-8);
}

TEST(Config, RoundTripThroughJson) {
  json doc = small_doc();
  doc["microstructure"]["matrix"] = {{2, 0.1, 0}, {0.1, 1, 0}, {0, 0, 1}};
  doc["microstructure"]["radius"] = 0.3;
  doc["sweep"] = {{"omega", {0.4, 0.6}}, {"rho", {10, 100}}};
  doc["scaling"] = {{"n", {4, 8}}, {"repeats", 2}};
  doc["output"] = {{"directory", "somewhere"}, {"dump_field", true}};
  doc["seed"] = 42;
  const RunConfig a = parse_config(doc);
  const RunConfig b = parse_config(to_json(a));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(Config, RoundTripLambdaAndVoxel) {
  json doc = small_doc();
  doc["reference"] = {{"lambda", 3.0}};
  doc["microstructure"] = {{"type", "voxel"},
                           {"path", "cell.vox"},
                           {"phases", {{"0", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                                       {"3", {{5, 0, 0}, {0, 5, 0}, {0, 0, 5}}}}}};
  const RunConfig a = parse_config(doc);
  EXPECT_EQ(a.microstructure.kind, MicrostructureKind::voxel);
  EXPECT_EQ(a.microstructure.phases.size(), 2u);
  EXPECT_TRUE(a == parse_config(to_json(a)));
}

TEST(Config, ReferenceNeedsExactlyOneParameter) {
  json both = small_doc();
  both["reference"] = {{"omega", 0.5}, {"lambda", 2.0}};
  EXPECT_NE(error_of(both).find("config.reference"), std::string::npos);
  json neither = small_doc();
  neither["reference"] = json::object();
  EXPECT_NE(error_of(neither).find("exactly one"), std::string::npos);
}

TEST(Config, ErrorsCarryFieldPath) {
  json doc = small_doc();
  doc["solver"]["tolerance"] = 1e-6;
  EXPECT_NE(error_of(doc).find("config.solver.tolerance"), std::string::npos);

  doc = small_doc();
  doc["solver"]["method"] = "gmres";
  EXPECT_NE(error_of(doc).find("config.solver.method"), std::string::npos);

  doc = small_doc();
  doc["grid"]["n"] = {8, 8};
  EXPECT_NE(error_of(doc).find("config.grid.n"), std::string::npos);

  doc = small_doc();
  doc["load"] = {0, 0, 0};
  EXPECT_NE(error_of(doc).find("config.load"), std::string::npos);

  doc = small_doc();
  doc["microstructure"]["matrix"] = {{1, 2, 0}, {2, 1, 0}, {0, 0, 1}};
  EXPECT_NE(error_of(doc).find("config.microstructure.matrix"), std::string::npos);

  doc = small_doc();
  doc["reference"] = {{"omega", 1.5}};
  EXPECT_NE(error_of(doc).find("config.reference.omega"), std::string::npos);
}

TEST(Config, LargeGridsNeedExplicitOptIn) {
  json doc = small_doc();
  doc["grid"]["n"] = 128;
  EXPECT_THROW(parse_config(doc), FormatError);
  doc["allow_large"] = true;
  EXPECT_NO_THROW(parse_config(doc));
  doc = small_doc();
  doc["grid"] = {{"d", 2}, {"n", 256}, {"Y", 0.5}};
  doc["load"] = {1, 0};
  EXPECT_NO_THROW(parse_config(doc));
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_config("/nonexistent/run.json"), FormatError);
  const fs::path dir = scratch("badjson");
  std::ofstream(dir / "bad.json") << "{ \"grid\": ";
  EXPECT_THROW(load_config((dir / "bad.json").string()), FormatError);
}

TEST(Record, RowLengthAndColumns) {
  ExperimentRecord r({"a", "b"});
  r.add_row({"1", "2.5"});
  EXPECT_THROW(r.add_row({"1"}), InvalidArgument);
  EXPECT_EQ(r.numeric_column("b"), std::vector<double>{2.5});
  EXPECT_THROW(r.column("c"), InvalidArgument);
  std::ostringstream out;
  r.write_csv(out);
  EXPECT_EQ(out.str(), "a,b\n1,2.5\n");
}

TEST(Record, SavesCsvAndMetadata) {
  const fs::path dir = scratch("record");
  ExperimentRecord r({"x"});
  r.add_row({"3"});
  r.metadata()["seed"] = 9;
  r.save(dir, "demo");
  EXPECT_TRUE(fs::exists(dir / "demo.csv"));
  std::ifstream meta(dir / "demo.meta.json");
  EXPECT_EQ(json::parse(meta)["seed"], 9);
}

TEST(FieldIo, RoundTripIsExact) {
  Rng rng(301);
  const RealField f = random_field(make_grid(3, {3, 2, 4}, {0.5, 0.5, 0.5}), rng);
  std::stringstream io;
  write_field(io, f);
  const RealField back = read_field(io);
  ASSERT_EQ(back.grid(), f.grid());
  EXPECT_DOUBLE_EQ(norm(back - f), 0.0);
  std::istringstream truncated("2\n2 2\n1 2 3\n");
  EXPECT_THROW(read_field(truncated), FormatError);
}

TEST(ConfigHash, StableAndSensitive) {
  const RunConfig a = parse_config(small_doc());
  RunConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.solver.tol = 1e-9;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunSolve, WritesResultJson) {
  const fs::path dir = scratch("solve");
  RunConfig cfg = parse_config(small_doc());
  cfg.output.directory = dir.string();
  cfg.output.dump_field = true;
  cfg.output.effective_tensor = true;
  const SolveOutcome out = run_solve(cfg);
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_TRUE(out.result.converged);
  std::ifstream in(dir / "result.json");
  const json doc = json::parse(in);
  EXPECT_EQ(doc["method"], "cg");
  EXPECT_EQ(doc["iterations"], out.result.iterations);
  EXPECT_DOUBLE_EQ(doc["lambda"].get<double>(), 5.5);
  EXPECT_TRUE(doc.contains("effective_tensor"));
  EXPECT_TRUE(doc["metadata"].contains("config_hash"));
  std::ifstream field(dir / "field.txt");
  EXPECT_DOUBLE_EQ(norm(read_field(field) - out.result.solution), 0.0);
}

TEST(RunSolve, HomogeneousNeedsNoIterations) {
  const fs::path dir = scratch("homog");
  json doc = small_doc();
  doc["microstructure"] = {{"type", "sphere"}, {"rho", 1}, {"radius", 0}};
  doc["microstructure"]["matrix"] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}};
  doc["reference"] = {{"lambda", 2.0}};
  RunConfig cfg = parse_config(doc);
  cfg.output.directory = dir.string();
  for (Method m : {Method::ffth, Method::cg, Method::bicg}) {
    cfg.solver.method = m;
    const SolveOutcome out = run_solve(cfg);
    EXPECT_EQ(out.result.iterations, 0) << to_string(m);
    EXPECT_LE(out.result.residual_history.front(), 1e-14);
  }
}

TEST(RunSolve, VoxelInput) {
  const fs::path dir = scratch("voxel");
  {
    std::ofstream vox(dir / "cell.vox");
    vox << "2\n4 4\n";
    for (int i = 0; i < 16; ++i) vox << (i % 4 < 2 ? 0 : 1) << '\n';
  }
  const json doc = {
      {"grid", {{"d", 2}, {"n", 4}, {"Y", 0.5}}},
      {"microstructure",
       {{"type", "voxel"},
        {"path", (dir / "cell.vox").string()},
        {"phases", {{"0", {{1, 0}, {0, 1}}}, {"1", {{10, 0}, {0, 10}}}}}}},
      {"reference", {{"lambda", 5.5}}},
      {"load", {0, 1}},
      {"output", {{"directory", dir.string()}, {"effective_tensor", true}}}};
  const SolveOutcome out = run_solve(parse_config(doc));
  ASSERT_TRUE(out.effective.has_value());
  // layers normal to axis 1, half and half
  EXPECT_NEAR(out.effective->effective(1, 1), 1.0 / (0.5 / 1.0 + 0.5 / 10.0), 1e-6);
  EXPECT_NEAR(out.effective->effective(0, 0), 5.5, 1e-6);

  json missing = doc;
  missing["microstructure"]["path"] = (dir / "absent.vox").string();
  EXPECT_THROW(run_solve(parse_config(missing)), FormatError);
}

TEST(Sweep, ColumnsAndDeterminism) {
  json doc = small_doc();
  doc["solver"]["max_iter"] = 5000;
  doc["sweep"] = {{"omega", {0.5, 0.7}}, {"rho", {10}}};
  const RunConfig cfg = parse_config(doc);
  const ExperimentRecord a = run_sweep_omega(cfg);
  const ExperimentRecord b = run_sweep_omega(cfg);
  EXPECT_EQ(a.columns(),
            (std::vector<std::string>{"omega", "rho", "lambda", "iters_cg", "iters_ffth", "ratio",
                                      "status"}));
  EXPECT_EQ(a.rows(), b.rows());
  for (const auto& s : a.column("status")) EXPECT_EQ(s, "ok");
  const auto cg = a.numeric_column("iters_cg");
  EXPECT_LE(std::abs(cg[0] - cg[1]), 1.0);
  EXPECT_DOUBLE_EQ(a.numeric_column("lambda")[0], 5.5);
}

TEST(Sweep, UnitContrastWithIsotropicMatrix) {
  json doc = small_doc();
  doc["microstructure"]["matrix"] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  doc["sweep"] = {{"omega", {0.5}}, {"rho", {1}}};
  const ExperimentRecord r = run_sweep_omega(parse_config(doc));
  EXPECT_LE(r.numeric_column("iters_cg")[0], 1.0);
  EXPECT_LE(r.numeric_column("iters_ffth")[0], 1.0);
}

TEST(Scaling, DegenerateSingleNodeRow) {
  json doc = small_doc();
  doc["scaling"] = {{"n", {1, 4}}, {"repeats", 1}};
  const ExperimentRecord r = run_scaling(parse_config(doc));
  ASSERT_EQ(r.rows().size(), 2u);
  EXPECT_DOUBLE_EQ(r.numeric_column("unknowns")[0], 3.0);
  EXPECT_EQ(r.column("status")[0], "ok");
  EXPECT_DOUBLE_EQ(r.numeric_column("unknowns")[1], 192.0);
}

TEST(Verify, PassesAndCatchesInjectedFault) {
  const VerifyReport good = run_verify({.seed = 3, .inject_fault = false});
  EXPECT_TRUE(good.all_passed());
  EXPECT_GE(good.checks.size(), 10u);
  const VerifyReport bad = run_verify({.seed = 3, .inject_fault = true});
  EXPECT_FALSE(bad.all_passed());
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  json doc = small_doc();
  doc["output"] = {{"directory", dir.string()}};
  const fs::path cfg = write_json(dir, doc);
  EXPECT_EQ(run_cli("solve --config " + cfg.string()), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "result.json"));
  EXPECT_EQ(run_cli("solve --config " + cfg.string() + " --method ffth --max-iter 2"),
            kExitNotConverged);
  EXPECT_EQ(run_cli("verify --config " + cfg.string()), kExitOk);
  EXPECT_EQ(run_cli("verify --config " + cfg.string() + " --inject-fault"),
            kExitVerificationFailure);
  EXPECT_TRUE(fs::exists(dir / "verify.json"));
  EXPECT_EQ(run_cli("solve --config " + (dir / "missing.json").string()), kExitConfigError);
  EXPECT_EQ(run_cli("solve --config " + cfg.string() + " --tol -1"), kExitConfigError);

  json bad = doc;
  bad["reference"] = {{"omega", 0.5}, {"lambda", 2.0}};
  const fs::path bad_dir = scratch("cli_bad");
  EXPECT_EQ(run_cli("solve --config " + write_json(bad_dir, bad).string()), kExitConfigError);
}

TEST(Cli, SweepWritesCsv) {
  const fs::path dir = scratch("cli_sweep");
  json doc = small_doc();
  doc["sweep"] = {{"omega", {0.5}}, {"rho", {10}}};
  doc["output"] = {{"directory", dir.string()}};
  const fs::path cfg = write_json(dir, doc);
  EXPECT_EQ(run_cli("sweep-omega --config " + cfg.string()), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "sweep.meta.json"));
}
