#include "ffthom/config.hpp"

#include "ffthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace ffthom {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw FormatError(path + ": " + message);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) fail(path + "." + key, "unknown key");
  }
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

int read_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool read_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::vector<double> read_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(read_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// A scalar is broadcast to every axis.
template <typename T, typename Read>
std::vector<T> read_per_axis(const json& v, int dim, const std::string& path, Read read) {
  if (v.is_array()) {
    if (v.size() != static_cast<std::size_t>(dim)) {
      fail(path, "expected " + std::to_string(dim) + " entries");
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(read(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  return std::vector<T>(dim, read(v, path));
}

Tensor read_tensor(const json& v, int dim, const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    fail(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Tensor t(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto row = read_numbers(v[r], path + "[" + std::to_string(r) + "]");
    if (row.size() != static_cast<std::size_t>(dim)) {
      fail(path + "[" + std::to_string(r) + "]", "expected " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) t(r, c) = row[c];
  }
  if (!is_spd(t)) fail(path, "tensor is not symmetric positive definite");
  return t;
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

bool same_tensor(const std::optional<Tensor>& a, const std::optional<Tensor>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& ma = a.microstructure;
  const auto& mb = b.microstructure;
  bool phases_equal = ma.phases.size() == mb.phases.size();
  if (phases_equal) {
    for (auto ia = ma.phases.begin(), ib = mb.phases.begin(); ia != ma.phases.end(); ++ia, ++ib) {
      phases_equal = phases_equal && ia->first == ib->first &&
                     same_tensor(ia->second, ib->second);
    }
  }
  return a.grid.dim == b.grid.dim && a.grid.n == b.grid.n &&
         a.grid.half_widths == b.grid.half_widths && ma.kind == mb.kind &&
         ma.contrast == mb.contrast && same_tensor(ma.matrix, mb.matrix) &&
         same_tensor(ma.inclusion, mb.inclusion) && ma.radius == mb.radius &&
         ma.voxel_path == mb.voxel_path && phases_equal &&
         a.reference.omega == b.reference.omega && a.reference.lambda == b.reference.lambda &&
         a.load.size() == b.load.size() && a.load == b.load &&
         a.solver.method == b.solver.method && a.solver.tol == b.solver.tol &&
         a.solver.max_iter == b.solver.max_iter &&
         a.solver.record_iterates == b.solver.record_iterates &&
         a.output.directory == b.output.directory && a.output.dump_field == b.output.dump_field &&
         a.output.effective_tensor == b.output.effective_tensor &&
         a.sweep.omegas == b.sweep.omegas && a.sweep.contrasts == b.sweep.contrasts &&
         a.scaling.n == b.scaling.n && a.scaling.repeats == b.scaling.repeats &&
         a.seed == b.seed && a.allow_large == b.allow_large;
}

RunConfig parse_config(const json& doc) {
  const std::string root = "config";
  reject_unknown_keys(doc, root,
                      {"grid", "microstructure", "reference", "load", "solver", "output", "sweep",
                       "scaling", "seed", "allow_large"});
  RunConfig cfg;

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    const std::string path = root + ".grid";
    reject_unknown_keys(g, path, {"d", "n", "Y"});
    if (g.contains("d")) cfg.grid.dim = read_int(g["d"], path + ".d");
    if (cfg.grid.dim != 2 && cfg.grid.dim != 3) fail(path + ".d", "must be 2 or 3");
    cfg.grid.n = g.contains("n") ? read_per_axis<int>(g["n"], cfg.grid.dim, path + ".n", read_int)
                                 : std::vector<int>(cfg.grid.dim, 16);
    cfg.grid.half_widths =
        g.contains("Y") ? read_per_axis<double>(g["Y"], cfg.grid.dim, path + ".Y", read_number)
                        : std::vector<double>(cfg.grid.dim, 0.5);
  }
  const int d = cfg.grid.dim;
  cfg.load = Vector::Unit(d, 0);

  if (doc.contains("microstructure")) {
    const json& m = doc["microstructure"];
    const std::string path = root + ".microstructure";
    reject_unknown_keys(m, path,
                        {"type", "rho", "matrix", "inclusion", "radius", "path", "phases"});
    auto& ms = cfg.microstructure;
    if (m.contains("type")) {
      const auto type = m["type"];
      if (type == "sphere") {
        ms.kind = MicrostructureKind::sphere;
      } else if (type == "voxel") {
        ms.kind = MicrostructureKind::voxel;
      } else {
        fail(path + ".type", "expected \"sphere\" or \"voxel\"");
      }
    }
    ms.contrast.reset();
    if (m.contains("rho")) {
      ms.contrast = read_number(m["rho"], path + ".rho");
      if (!(*ms.contrast > 0.0)) fail(path + ".rho", "must be positive");
    }
    if (m.contains("matrix")) ms.matrix = read_tensor(m["matrix"], d, path + ".matrix");
    if (m.contains("inclusion")) ms.inclusion = read_tensor(m["inclusion"], d, path + ".inclusion");
    if (m.contains("radius")) {
      ms.radius = read_number(m["radius"], path + ".radius");
      if (*ms.radius < 0.0) fail(path + ".radius", "must be non-negative");
    }
    if (m.contains("path")) {
      if (!m["path"].is_string()) fail(path + ".path", "expected a string");
      ms.voxel_path = m["path"].get<std::string>();
    }
    if (m.contains("phases")) {
      const json& table = m["phases"];
      if (!table.is_object()) fail(path + ".phases", "expected an object of id -> tensor");
      for (const auto& [key, value] : table.items()) {
        const std::string p = path + ".phases." + key;
        std::uint32_t id = 0;
        try {
          std::size_t used = 0;
          const unsigned long parsed = std::stoul(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
          id = static_cast<std::uint32_t>(parsed);
        } catch (const std::exception&) {
          fail(p, "phase id must be a non-negative integer");
        }
        ms.phases[id] = read_tensor(value, d, p);
      }
    }
    if (ms.kind == MicrostructureKind::sphere && !ms.contrast && !ms.inclusion) {
      fail(path, "sphere microstructure needs 'rho' or an explicit 'inclusion' tensor");
    }
    if (ms.kind == MicrostructureKind::voxel) {
      if (ms.voxel_path.empty()) fail(path + ".path", "voxel microstructure needs a file path");
      if (ms.phases.empty()) fail(path + ".phases", "voxel microstructure needs a phase table");
    }
  }

  if (doc.contains("reference")) {
    const json& r = doc["reference"];
    const std::string path = root + ".reference";
    reject_unknown_keys(r, path, {"omega", "lambda"});
    cfg.reference.omega.reset();
    if (r.contains("omega")) cfg.reference.omega = read_number(r["omega"], path + ".omega");
    if (r.contains("lambda")) cfg.reference.lambda = read_number(r["lambda"], path + ".lambda");
  }

  if (doc.contains("load")) {
    const auto v = read_numbers(doc["load"], root + ".load");
    if (v.size() != static_cast<std::size_t>(d)) {
      fail(root + ".load", "expected " + std::to_string(d) + " components");
    }
    cfg.load = Eigen::Map<const Eigen::VectorXd>(v.data(), d);
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    const std::string path = root + ".solver";
    reject_unknown_keys(s, path, {"method", "tol", "max_iter", "record_iterates"});
    if (s.contains("method")) {
      if (!s["method"].is_string()) fail(path + ".method", "expected a string");
      try {
        cfg.solver.method = parse_method(s["method"].get<std::string>());
      } catch (const InvalidArgument& e) {
        fail(path + ".method", e.what());
      }
    }
    if (s.contains("tol")) cfg.solver.tol = read_number(s["tol"], path + ".tol");
    if (s.contains("max_iter")) cfg.solver.max_iter = read_int(s["max_iter"], path + ".max_iter");
    if (s.contains("record_iterates")) {
      cfg.solver.record_iterates = read_bool(s["record_iterates"], path + ".record_iterates");
    }
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    const std::string path = root + ".output";
    reject_unknown_keys(o, path, {"directory", "dump_field", "effective_tensor"});
    if (o.contains("directory")) {
      if (!o["directory"].is_string()) fail(path + ".directory", "expected a string");
      cfg.output.directory = o["directory"].get<std::string>();
    }
    if (o.contains("dump_field")) cfg.output.dump_field = read_bool(o["dump_field"], path + ".dump_field");
    if (o.contains("effective_tensor")) {
      cfg.output.effective_tensor = read_bool(o["effective_tensor"], path + ".effective_tensor");
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    const std::string path = root + ".sweep";
    reject_unknown_keys(s, path, {"omega", "rho"});
    if (s.contains("omega")) cfg.sweep.omegas = read_numbers(s["omega"], path + ".omega");
    if (s.contains("rho")) cfg.sweep.contrasts = read_numbers(s["rho"], path + ".rho");
  }

  if (doc.contains("scaling")) {
    const json& s = doc["scaling"];
    const std::string path = root + ".scaling";
    reject_unknown_keys(s, path, {"n", "repeats"});
    if (s.contains("n")) {
      if (!s["n"].is_array()) fail(path + ".n", "expected an array of integers");
      cfg.scaling.n.clear();
      for (std::size_t i = 0; i < s["n"].size(); ++i) {
        cfg.scaling.n.push_back(read_int(s["n"][i], path + ".n[" + std::to_string(i) + "]"));
      }
    }
    if (s.contains("repeats")) cfg.scaling.repeats = read_int(s["repeats"], path + ".repeats");
  }

  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      fail(root + ".seed", "expected a non-negative integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("allow_large")) cfg.allow_large = read_bool(doc["allow_large"], root + ".allow_large");

  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const std::string root = "config";
  const int d = cfg.grid.dim;
  for (int a = 0; a < d; ++a) {
    if (cfg.grid.n[a] < 1) fail(root + ".grid.n", "node counts must be >= 1");
    if (!(cfg.grid.half_widths[a] > 0.0)) fail(root + ".grid.Y", "half-widths must be > 0");
    if (d == 3 && cfg.grid.n[a] > kDeskScaleLimit && !cfg.allow_large) {
      fail(root + ".grid.n", "more than " + std::to_string(kDeskScaleLimit) +
                                 " nodes per axis in 3D requires --allow-large");
    }
  }
  if (cfg.reference.omega.has_value() == cfg.reference.lambda.has_value()) {
    fail(root + ".reference", "give exactly one of 'omega' or 'lambda'");
  }
  if (cfg.reference.omega) {
    const double w = *cfg.reference.omega;
    if (!(w >= 0.0 && w <= 1.0)) fail(root + ".reference.omega", "must lie in [0, 1]");
    if (!cfg.microstructure.contrast) {
      fail(root + ".reference.omega", "needs microstructure.rho to define lambda");
    }
  }
  if (cfg.reference.lambda && !(*cfg.reference.lambda > 0.0)) {
    fail(root + ".reference.lambda", "must be positive");
  }
  if (cfg.load.size() != d || cfg.load.isZero(0.0)) {
    fail(root + ".load", "macroscopic field must have d components and be non-zero");
  }
  if (!(cfg.solver.tol > 0.0)) fail(root + ".solver.tol", "must be positive");
  if (cfg.solver.max_iter < 1) fail(root + ".solver.max_iter", "must be >= 1");
  for (double w : cfg.sweep.omegas) {
    if (!(w > 0.0 && w <= 1.0)) fail(root + ".sweep.omega", "values must lie in (0, 1]");
  }
  for (double r : cfg.sweep.contrasts) {
    if (!(r > 0.0)) fail(root + ".sweep.rho", "values must be positive");
  }
  for (std::size_t i = 0; i < cfg.scaling.n.size(); ++i) {
    if (cfg.scaling.n[i] < 1) fail(root + ".scaling.n", "values must be >= 1");
    if (i > 0 && cfg.scaling.n[i] <= cfg.scaling.n[i - 1]) {
      fail(root + ".scaling.n", "values must be strictly ascending");
    }
    if (d == 3 && cfg.scaling.n[i] > kDeskScaleLimit && !cfg.allow_large) {
      fail(root + ".scaling.n", "more than " + std::to_string(kDeskScaleLimit) +
                                    " nodes per axis in 3D requires --allow-large");
    }
  }
  if (cfg.scaling.repeats < 1) fail(root + ".scaling.repeats", "must be >= 1");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("config: invalid JSON in '" + path + "': " + e.what());
  }
  RunConfig cfg = parse_config(doc);
  // Voxel paths are relative to the configuration file.
  std::string& vox = cfg.microstructure.voxel_path;
  if (!vox.empty() && std::filesystem::path(vox).is_relative()) {
    vox = (std::filesystem::path(path).parent_path() / vox).lexically_normal().string();
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["grid"] = {{"d", cfg.grid.dim}, {"n", cfg.grid.n}, {"Y", cfg.grid.half_widths}};

  const auto& ms = cfg.microstructure;
  json m;
  m["type"] = ms.kind == MicrostructureKind::sphere ? "sphere" : "voxel";
  if (ms.contrast) m["rho"] = *ms.contrast;
  if (ms.matrix) m["matrix"] = tensor_json(*ms.matrix);
  if (ms.inclusion) m["inclusion"] = tensor_json(*ms.inclusion);
  if (ms.radius) m["radius"] = *ms.radius;
  if (!ms.voxel_path.empty()) m["path"] = ms.voxel_path;
  if (!ms.phases.empty()) {
    json table = json::object();
    for (const auto& [id, t] : ms.phases) table[std::to_string(id)] = tensor_json(t);
    m["phases"] = table;
  }
  doc["microstructure"] = m;

  json r = json::object();
  if (cfg.reference.omega) r["omega"] = *cfg.reference.omega;
  if (cfg.reference.lambda) r["lambda"] = *cfg.reference.lambda;
  doc["reference"] = r;

  doc["load"] = std::vector<double>(cfg.load.data(), cfg.load.data() + cfg.load.size());
  doc["solver"] = {{"method", to_string(cfg.solver.method)},
                   {"tol", cfg.solver.tol},
                   {"max_iter", cfg.solver.max_iter},
                   {"record_iterates", cfg.solver.record_iterates}};
  doc["output"] = {{"directory", cfg.output.directory},
                   {"dump_field", cfg.output.dump_field},
                   {"effective_tensor", cfg.output.effective_tensor}};
  doc["sweep"] = {{"omega", cfg.sweep.omegas}, {"rho", cfg.sweep.contrasts}};
  doc["scaling"] = {{"n", cfg.scaling.n}, {"repeats", cfg.scaling.repeats}};
  doc["seed"] = cfg.seed;
  doc["allow_large"] = cfg.allow_large;
  return doc;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.method = cfg.solver.method;
  sc.tol = cfg.solver.tol;
  sc.max_iter = cfg.solver.max_iter;
  sc.record_iterates = cfg.solver.record_iterates;
  return sc;
}

}  // namespace ffthom
