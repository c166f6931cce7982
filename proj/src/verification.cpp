#include "ffthom/verification.hpp"

#include "ffthom/errors.hpp"
#include "ffthom/random_instances.hpp"
#include "ffthom/solvers.hpp"
#include "ffthom/spectral_ops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ffthom {

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json doc;
  doc["passed"] = all_passed();
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json entry = {{"name", c.name}, {"passed", c.passed}, {"threshold", c.threshold}};
    if (std::isfinite(c.value)) {
      entry["value"] = c.value;
    } else {
      entry["value"] = nullptr;
    }
    if (!c.detail.empty()) entry["detail"] = c.detail;
    doc["checks"].push_back(entry);
  }
  return doc;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Suite {
 public:
  explicit Suite(const VerifyOptions& options) : options_(options), rng_(options.seed) {}

  GreenOperator green(const GridSpec& grid, double lambda) const {
    return GreenOperator(grid, lambda, GreenOptions{options_.inject_fault});
  }
  Rng& rng() { return rng_; }

  void check(const std::string& name, double threshold, const std::function<double()>& measure) {
    CheckResult result{.name = name, .threshold = threshold};
    try {
      result.value = measure();
      result.passed = result.value <= threshold;
    } catch (const std::exception& e) {
      result.value = kInf;
      result.detail = e.what();
    }
    report_.checks.push_back(result);
  }

  VerifyReport take() { return std::move(report_); }

 private:
  VerifyOptions options_;
  Rng rng_;
  VerifyReport report_;
};

double max_iterate_gap(const SolveResult& a, const SolveResult& b, std::size_t count) {
  const std::size_t n = std::min({count + 1, a.iterate_history.size(), b.iterate_history.size()});
  if (n < std::min<std::size_t>(count + 1, 2)) return kInf;
  double worst = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    worst = std::max(worst, norm(a.iterate_history[m] - b.iterate_history[m]) /
                                norm(a.iterate_history[m]));
  }
  return worst;
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
  Suite suite(options);
  const std::vector<GridSpec> projection_grids{make_cube_grid(2, 8), make_cube_grid(3, 8)};

  suite.check("lattice_bijection", 0.0, [] {
    double bad = 0.0;
    for (const GridSpec& g : {make_grid(2, {8, 5}, {0.5, 1.0}), make_grid(3, {4, 3, 6}, {1, 1, 1})}) {
      const FrequencyLattice lat(g);
      for (std::size_t b = 0; b < g.num_nodes(); ++b) {
        if (lat.bin_of(lat.frequency(b)) != b) bad += 1.0;
      }
    }
    return bad;
  });

  suite.check("parseval", 1e-12, [&] {
    const GridSpec g = make_cube_grid(2, 8);
    const RealField u = random_field(g, suite.rng());
    const RealField v = random_field(g, suite.rng());
    const SpectralField uh = forward_transform(u);
    const SpectralField vh = forward_transform(v);
    double s = 0.0;
    for (std::size_t i = 0; i < g.num_dofs(); ++i) {
      s += (std::conj(uh.values()[i]) * vh.values()[i]).real();
    }
    s *= static_cast<double>(g.num_nodes());
    return std::abs(inner_product(u, v) - s) / (norm(u) * norm(v));
  });

  suite.check("projection_idempotent", 1e-12, [&] {
    double worst = 0.0;
    for (const GridSpec& g : projection_grids) {
      const GreenOperator G = suite.green(g, 1.0);
      for (int i = 0; i < 10; ++i) {
        const RealField x = random_field(g, suite.rng());
        const RealField px = project_E(x, G);
        worst = std::max(worst, norm(project_E(px, G) - px) / norm(x));
      }
    }
    return worst;
  });

  suite.check("projection_self_adjoint", 1e-12, [&] {
    double worst = 0.0;
    for (const GridSpec& g : projection_grids) {
      const GreenOperator G = suite.green(g, 2.5);
      for (int i = 0; i < 10; ++i) {
        const RealField x = random_field(g, suite.rng());
        const RealField y = random_field(g, suite.rng());
        const double gap =
            std::abs(inner_product(project_E(x, G), y) - inner_product(x, project_E(y, G)));
        worst = std::max(worst, gap / (norm(x) * norm(y)));
      }
    }
    return worst;
  });

  suite.check("constants_orthogonal_to_E", 1e-12, [&] {
    const GridSpec g = make_cube_grid(3, 8);
    const RealField c = RealField::constant(g, Vector::Constant(3, 0.7));
    return norm(project_E(c, suite.green(g, 1.0))) / norm(c);
  });

  suite.check("orthogonal_decomposition", 1e-12, [&] {
    double worst = 0.0;
    for (const GridSpec& g : projection_grids) {
      const GreenOperator G = suite.green(g, 1.0);
      const RealField x = random_field(g, suite.rng());
      const RealField px = project_E(x, G);
      worst = std::max(worst, std::abs(inner_product(px, x - px)) / inner_product(x, x));
    }
    return worst;
  });

  suite.check("E_is_B_invariant", 1e-10, [&] {
    const GridSpec g = make_cube_grid(3, 8);
    const ConductivityField L = random_microstructure(g, 10.0, suite.rng());
    const GreenOperator G = suite.green(g, 5.5);
    const RealField x = random_field(g, suite.rng());
    const RealField bpx = apply_B(project_E(x, G), L, G);
    return norm(bpx - project_E(bpx, G)) / norm(x);
  });

  const GridSpec tiny = make_cube_grid(2, 4);
  const ConductivityField tiny_L = random_microstructure(tiny, 10.0, suite.rng());
  const Vector tiny_load = Vector::Unit(2, 0);

  suite.check("dense_apply_agreement", 1e-12, [&] {
    const GreenOperator G = suite.green(tiny, 5.5);
    const DenseSystem sys = assemble_dense(tiny_L, G);
    const RealField v = random_field(tiny, suite.rng());
    const RealField av = apply_system(v, tiny_L, G);
    return (sys.matrix * flatten(v) - flatten(av)).norm() / flatten(av).norm();
  });

  for (Method method : {Method::ffth, Method::cg, Method::bicg}) {
    suite.check("dense_solve_" + to_string(method), 1e-8, [&, method] {
      const GreenOperator G = suite.green(tiny, 5.5);
      const DenseSystem sys = assemble_dense(tiny_L, G, tiny_load);
      const Eigen::VectorXd direct = sys.matrix.partialPivLu().solve(sys.rhs);
      SolverConfig cfg{.method = method, .tol = 1e-12, .max_iter = 5000};
      const SolveResult r = solve(tiny_L, G, tiny_load, cfg);
      if (!r.converged) throw NotConverged("solver did not reach 1e-12");
      return (flatten(r.solution) - direct).norm() / direct.norm();
    });
  }

  suite.check("neumann_partial_sums", 1e-12, [&] {
    const GreenOperator G = suite.green(tiny, 5.5);
    SolverConfig cfg{.method = Method::ffth, .tol = 1e-300, .max_iter = 5, .record_iterates = true};
    const SolveResult r = solve_ffth(tiny_L, G, tiny_load, cfg);
    const RealField e0 = RealField::constant(tiny, tiny_load);
    RealField term = e0;
    RealField sum = e0;
    double worst = norm(r.iterate_history.at(0) - sum) / norm(e0);
    for (std::size_t m = 1; m < r.iterate_history.size(); ++m) {
      term = apply_B(term, tiny_L, G);
      term *= -1.0;
      sum += term;
      worst = std::max(worst, norm(r.iterate_history[m] - sum) / norm(e0));
    }
    return worst;
  });

  const GridSpec cube = make_cube_grid(3, 8);
  const ConductivityField sphere = build_template_microstructure(cube, 10.0);
  const Vector load = Vector::Unit(3, 0);
  SolverConfig recorded{.method = Method::cg, .tol = 1e-8, .max_iter = 1000, .record_iterates = true};

  suite.check("lambda_invariance_cg", 1e-8, [&] {
    const SolveResult a =
        solve_cg(sphere, suite.green(cube, reference_lambda(10.0, 0.3).lambda), load, recorded);
    const SolveResult b =
        solve_cg(sphere, suite.green(cube, reference_lambda(10.0, 0.7).lambda), load, recorded);
    if (std::abs(a.iterations - b.iterations) > 1) return kInf;
    return max_iterate_gap(a, b, 10);
  });

  const GreenOperator mid = suite.green(cube, reference_lambda(10.0, 0.5).lambda);

  suite.check("cg_bicg_equivalence", 1e-8, [&] {
    SolverConfig bicg = recorded;
    bicg.method = Method::bicg;
    return max_iterate_gap(solve_cg(sphere, mid, load, recorded),
                           solve_bicg(sphere, mid, load, bicg), 10);
  });

  suite.check("cg_residuals_in_E", 1e-10, [&] {
    const SolveResult r = solve_cg(sphere, mid, load, recorded);
    double worst = 0.0;
    for (const RealField& res : r.residual_vectors) {
      const double nr = norm(res);
      if (nr > 0.0) worst = std::max(worst, norm(res - project_E(res, mid)) / nr);
    }
    return worst;
  });

  suite.check("mean_preservation", 1e-12, [&] {
    double worst = 0.0;
    for (Method method : {Method::ffth, Method::cg, Method::bicg}) {
      SolverConfig cfg = recorded;
      cfg.method = method;
      cfg.tol = 1e-6;
      const SolveResult r = solve(sphere, mid, load, cfg);
      for (const RealField& x : r.iterate_history) {
        worst = std::max(worst, (mean_value(x) - load).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  });

  suite.check("cg_energy_monotone", 1e-12, [&] {
    const SolveResult r = solve_cg(sphere, mid, load, recorded);
    double scale = 0.0;
    std::vector<double> energy;
    for (const RealField& x : r.iterate_history) {
      energy.push_back(energy_functional(sphere, load, x));
      scale = std::max(scale, std::abs(energy.back()));
    }
    double worst = 0.0;
    for (std::size_t m = 1; m < energy.size(); ++m) {
      worst = std::max(worst, (energy[m] - energy[m - 1]) / std::max(scale, 1e-300));
    }
    return worst;
  });

  suite.check("restricted_spectrum_positive", 1e-10, [&] {
    const GreenOperator G = suite.green(tiny, 5.5);
    const auto n = static_cast<Eigen::Index>(tiny.num_dofs());
    Eigen::MatrixXd proj(n, n);
    RealField unit(tiny);
    for (Eigen::Index j = 0; j < n; ++j) {
      unit.values()[j] = 1.0;
      proj.col(j) = flatten(project_E(unit, G));
      unit.values()[j] = 0.0;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(0.5 * (proj + proj.transpose()));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pe.eigenvalues()[i] > 0.5) keep.push_back(i);
    }
    Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      basis.col(static_cast<Eigen::Index>(i)) = pe.eigenvectors().col(keep[i]);
    }
    const Eigen::MatrixXd restricted =
        basis.transpose() * assemble_dense(tiny_L, G).matrix * basis;
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(restricted).eigenvalues();
    if (ev.real().minCoeff() <= 0.0) return kInf;
    return ev.imag().cwiseAbs().maxCoeff() / ev.cwiseAbs().maxCoeff();
  });

  suite.check("homogeneous_medium_trivial", 0.0, [&] {
    const double lambda = 3.0;
    const ConductivityField L =
        ConductivityField::homogeneous(cube, lambda * Tensor::Identity(3, 3));
    const GreenOperator G = suite.green(cube, lambda);
    double worst = 0.0;
    for (Method method : {Method::ffth, Method::cg, Method::bicg}) {
      SolverConfig cfg{.method = method};
      const SolveResult r = solve(L, G, load, cfg);
      worst = std::max({worst, static_cast<double>(r.iterations), r.residual_history.back()});
    }
    return worst;
  });

  return suite.take();
}

}  // namespace ffthom
