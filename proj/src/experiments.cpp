#include "ffthom/experiments.hpp"

#include "ffthom/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#ifndef FFTHOM_VERSION
#define FFTHOM_VERSION "unknown"
#endif

namespace ffthom {

using nlohmann::json;

std::string code_version() { return FFTHOM_VERSION; }

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json provenance(const RunConfig& config) {
  return {{"config_hash", config_hash(config)},
          {"timestamp", utc_timestamp()},
          {"code_version", code_version()},
          {"seed", config.seed}};
}

json tensor_json(const Tensor& t) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------

Problem build_problem(const RunConfig& config) {
  validate_config(config);
  const auto& ms = config.microstructure;
  const int d = config.grid.dim;

  std::optional<ConductivityField> conductivity;
  if (ms.kind == MicrostructureKind::sphere) {
    const GridSpec grid = make_grid(d, config.grid.n, config.grid.half_widths);
    const Tensor matrix = ms.matrix ? *ms.matrix : default_matrix_tensor(d);
    const Tensor inclusion =
        ms.inclusion ? *ms.inclusion : Tensor(*ms.contrast * Tensor::Identity(d, d));
    const double radius = ms.radius ? *ms.radius : quarter_fraction_radius(grid);
    conductivity = build_sphere_microstructure(grid, radius, inclusion, matrix);
    conductivity->with_template(ms.contrast, 1);
  } else {
    std::ifstream in(ms.voxel_path);
    if (!in) throw FormatError("config.microstructure.path: cannot open '" + ms.voxel_path + "'");
    try {
      conductivity = load_voxel_phases(in, ms.phases, config.grid.half_widths);
    } catch (const Error& e) {
      throw FormatError(std::string("config.microstructure.path: ") + e.what());
    }
    if (conductivity->grid().dim() != d) {
      throw FormatError("config.grid.d: voxel file has dimension " +
                        std::to_string(conductivity->grid().dim()));
    }
  }

  const ReferenceMedium reference = config.reference.omega
                                        ? reference_lambda(*ms.contrast, *config.reference.omega)
                                        : reference_from_lambda(*config.reference.lambda);
  GreenOperator green(conductivity->grid(), reference.lambda);
  return Problem{std::move(*conductivity), std::move(green), reference, config.load};
}

// ---------------------------------------------------------------------------

ExperimentRecord::ExperimentRecord(std::vector<std::string> columns)
    : columns_(std::move(columns)) {}

void ExperimentRecord::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size()) {
    throw InvalidArgument("experiment row has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

std::vector<std::string> ExperimentRecord::column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw InvalidArgument("no column named '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - columns_.begin());
  std::vector<std::string> out;
  for (const auto& row : rows_) out.push_back(row[idx]);
  return out;
}

std::vector<double> ExperimentRecord::numeric_column(const std::string& name) const {
  std::vector<double> out;
  for (const auto& s : column(name)) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

void ExperimentRecord::write_csv(std::ostream& out) const {
  auto write_line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (i) out << ',';
      if (quote) {
        out << '"';
        for (char c : cells[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      } else {
        out << cells[i];
      }
    }
    out << '\n';
  };
  write_line(columns_);
  for (const auto& row : rows_) write_line(row);
}

void ExperimentRecord::save(const std::filesystem::path& directory, const std::string& stem) const {
  std::filesystem::create_directories(directory);
  std::ofstream csv(directory / (stem + ".csv"));
  write_csv(csv);
  std::ofstream meta(directory / (stem + ".meta.json"));
  meta << metadata_.dump(2) << '\n';
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------

json result_json(const SolveOutcome& outcome, const RunConfig& config) {
  const SolveResult& r = outcome.result;
  json doc;
  doc["method"] = to_string(config.solver.method);
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  doc["tol"] = config.solver.tol;
  doc["residual_history"] = r.residual_history;
  doc["wall_time"] = r.wall_time;
  doc["lambda"] = outcome.reference.lambda;
  if (outcome.reference.omega) doc["omega"] = *outcome.reference.omega;
  doc["load"] = to_std(config.load);
  doc["mean_field"] = to_std(mean_value(r.solution));
  if (outcome.effective) {
    const EffectiveTensor& eff = *outcome.effective;
    doc["effective_tensor"] = tensor_json(eff.effective);
    doc["voigt_bound"] = tensor_json(eff.bounds.voigt);
    doc["reuss_bound"] = tensor_json(eff.bounds.reuss);
    json cols = json::array();
    for (const auto& c : eff.columns) {
      cols.push_back({{"iterations", c.iterations},
                      {"final_residual", c.final_residual},
                      {"wall_time", c.wall_time},
                      {"converged", c.converged}});
    }
    doc["column_solves"] = cols;
  }
  doc["metadata"] = provenance(config);
  return doc;
}

SolveOutcome run_solve(const RunConfig& config) {
  const Problem problem = build_problem(config);
  const SolverConfig sc = solver_config(config);

  SolveOutcome outcome{.result = solve(problem.conductivity, problem.green, problem.load, sc),
                       .effective = std::nullopt,
                       .reference = problem.reference};
  outcome.exit_code = outcome.result.converged ? kExitOk : kExitNotConverged;
  if (config.output.effective_tensor && outcome.result.converged) {
    try {
      outcome.effective = effective_tensor(problem.conductivity, problem.green, sc);
    } catch (const NotConverged&) {
      outcome.exit_code = kExitNotConverged;
    }
  }

  const std::filesystem::path dir = config.output.directory;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "result.json") << result_json(outcome, config).dump(2) << '\n';
  if (config.output.dump_field) {
    std::ofstream out(dir / "field.txt");
    write_field(out, outcome.result.solution);
  }
  return outcome;
}

namespace {

struct SweepRow {
  std::vector<std::string> cells;
};

SweepRow sweep_row(RunConfig cfg, double contrast, double omega) {
  cfg.microstructure.contrast = contrast;
  cfg.reference.omega = omega;
  cfg.reference.lambda.reset();
  const double lambda = reference_lambda(contrast, omega).lambda;

  std::string status = "ok";
  std::string iters_cg = "nan";
  std::string iters_ffth = "nan";
  std::string ratio = "nan";
  try {
    const Problem problem = build_problem(cfg);
    SolverConfig sc = solver_config(cfg);
    sc.record_iterates = false;
    sc.method = Method::cg;
    const SolveResult cg = solve(problem.conductivity, problem.green, problem.load, sc);
    sc.method = Method::ffth;
    const SolveResult ffth = solve(problem.conductivity, problem.green, problem.load, sc);
    iters_cg = std::to_string(cg.iterations);
    iters_ffth = std::to_string(ffth.iterations);
    ratio = ffth.iterations > 0
                ? format_number(static_cast<double>(cg.iterations) / ffth.iterations)
                : (cg.iterations == 0 ? "1" : "inf");
    if (!cg.converged || !ffth.converged) {
      status = std::string("not_converged:") + (!cg.converged ? "cg" : "") +
               (!cg.converged && !ffth.converged ? "+" : "") + (!ffth.converged ? "ffth" : "");
    }
  } catch (const std::exception& e) {
    status = std::string("error: ") + e.what();
  }
  return {{format_number(omega), format_number(contrast), format_number(lambda), iters_cg,
           iters_ffth, ratio, status}};
}

}  // namespace

ExperimentRecord run_sweep_omega(const RunConfig& config) {
  validate_config(config);
  ExperimentRecord record({"omega", "rho", "lambda", "iters_cg", "iters_ffth", "ratio", "status"});
  record.metadata() = provenance(config);

  std::vector<std::pair<double, double>> jobs;
  for (double rho : config.sweep.contrasts) {
    for (double omega : config.sweep.omegas) jobs.emplace_back(rho, omega);
  }
  // Rows run concurrently in batches and are written in job order.
  const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < jobs.size(); start += batch) {
    std::vector<std::future<SweepRow>> pending;
    for (std::size_t i = start; i < std::min(jobs.size(), start + batch); ++i) {
      pending.push_back(std::async(std::launch::async, sweep_row, config, jobs[i].first,
                                   jobs[i].second));
    }
    for (auto& f : pending) record.add_row(f.get().cells);
  }
  return record;
}

ExperimentRecord run_scaling(const RunConfig& config) {
  validate_config(config);
  ExperimentRecord record({"n", "unknowns", "iters_cg", "iters_ffth", "time_cg", "time_ffth",
                           "time_per_iter_cg", "time_per_iter_ffth", "per_iter_ratio",
                           "status"});
  record.metadata() = provenance(config);
  record.metadata()["timing"] = "best of " + std::to_string(config.scaling.repeats) +
                                " runs, solver loop only";

  struct Row {
    int n = 0;
    std::optional<Problem> problem;
    std::string status = "ok";
    int iters[2] = {0, 0};
    double best[2] = {std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  };
  std::vector<Row> rows;
  for (int n : config.scaling.n) {
    Row row;
    row.n = n;
    RunConfig cfg = config;
    cfg.grid.n.assign(cfg.grid.dim, n);
    try {
      row.problem.emplace(build_problem(cfg));
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    rows.push_back(std::move(row));
  }

  // Sequential timing, one round over all sizes per repeat, so a transient
  // slowdown of the host does not hit every sample of one size.
  SolverConfig sc = solver_config(config);
  sc.record_iterates = false;
  const Method methods[2] = {Method::cg, Method::ffth};
  for (int rep = 0; rep < config.scaling.repeats; ++rep) {
    for (Row& row : rows) {
      if (!row.problem || row.status.rfind("error", 0) == 0) continue;
      const Problem& p = *row.problem;
      for (int k = 0; k < 2; ++k) {
        sc.method = methods[k];
        try {
          const SolveResult r = solve(p.conductivity, p.green, p.load, sc);
          row.iters[k] = r.iterations;
          row.best[k] = std::min(row.best[k], r.wall_time);
          if (!r.converged) row.status = "not_converged:" + to_string(methods[k]);
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
          break;
        }
      }
    }
  }

  const int d = config.grid.dim;
  for (const Row& row : rows) {
    std::size_t unknowns = static_cast<std::size_t>(d);
    for (int a = 0; a < d; ++a) unknowns *= static_cast<std::size_t>(row.n);
    const double per_cg = row.best[0] / std::max(row.iters[0], 1);
    const double per_ffth = row.best[1] / std::max(row.iters[1], 1);
    record.add_row({std::to_string(row.n), std::to_string(unknowns), std::to_string(row.iters[0]),
                    std::to_string(row.iters[1]), format_number(row.best[0]),
                    format_number(row.best[1]), format_number(per_cg), format_number(per_ffth),
                    format_number(per_cg / per_ffth), row.status});
  }
  return record;
}

// ---------------------------------------------------------------------------

void write_field(std::ostream& out, const RealField& field) {
  const GridSpec& grid = field.grid();
  out << grid.dim() << '\n';
  for (int a = 0; a < grid.dim(); ++a) out << grid.size(a) << (a + 1 < grid.dim() ? ' ' : '\n');
  char buf[40];
  for (double v : field.values()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

RealField read_field(std::istream& in, const std::vector<double>& half_widths) {
  int dim = 0;
  if (!(in >> dim) || (dim != 2 && dim != 3)) throw FormatError("field file: bad dimension");
  std::vector<int> n(dim);
  for (int a = 0; a < dim; ++a) {
    if (!(in >> n[a]) || n[a] < 1) throw FormatError("field file: bad node counts");
  }
  const GridSpec grid =
      make_grid(dim, n, half_widths.empty() ? std::vector<double>(dim, 0.5) : half_widths);
  std::vector<double> values(grid.num_dofs());
  for (auto& v : values) {
    if (!(in >> v)) throw FormatError("field file: too few values");
  }
  return RealField(grid, std::move(values));
}

}  // namespace ffthom
