#include "ffthom/errors.hpp"
#include "ffthom/random_instances.hpp"
#include "ffthom/solvers.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ffthom;

namespace {

Vector unit(int d, int axis) { return Vector::Unit(d, axis); }

SolverConfig config(Method m, double tol = 1e-10, bool record = false) {
  SolverConfig c;
  c.method = m;
  c.tol = tol;
  c.max_iter = 5000;
  c.record_iterates = record;
  return c;
}

struct Template {
  GridSpec grid;
  ConductivityField L;
};

Template sphere3d(int n, double rho) {
  const GridSpec g = make_cube_grid(3, n);
  return {g, build_template_microstructure(g, rho)};
}

}  // namespace

TEST(Methods, ParseAndName) {
  for (Method m : {Method::ffth, Method::cg, Method::bicg}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("gmres"), InvalidArgument);
}

TEST(Solvers, AgreeWithDirectSolveOnSmallRandomInstances) {
  Rng rng(101);
  for (int instance = 0; instance < 4; ++instance) {
    const GridSpec g = make_cube_grid(2, 4);
    const ConductivityField L = random_microstructure(g, 10.0, rng);
    const double lambda = reference_lambda(10.0, 0.5).lambda;
    const GreenOperator G(g, lambda);
    const Vector e0 = unit(2, instance % 2);
    const Eigen::VectorXd exact = oracle::direct_solve(L, lambda, e0);
    for (Method m : {Method::ffth, Method::cg, Method::bicg}) {
      const SolveResult r = solve(L, G, e0, config(m));
      ASSERT_TRUE(r.converged) << to_string(m);
      EXPECT_LT((flatten(r.solution) - exact).norm(), 1e-7 * exact.norm()) << to_string(m);
    }
  }
}

TEST(Solvers, ThreeDimensionalDirectSolve) {
  Rng rng(102);
  const GridSpec g = make_grid(3, {4, 3, 3}, {0.5, 0.5, 0.5});
  const ConductivityField L = random_microstructure(g, 5.0, rng);
  const GreenOperator G(g, 3.0);
  Vector e0(3);
  e0 << 0.3, -1.0, 0.5;
  const Eigen::VectorXd exact = oracle::direct_solve(L, 3.0, e0);
  const SolveResult r = solve_cg(L, G, e0, config(Method::cg));
  EXPECT_LT((flatten(r.solution) - exact).norm(), 1e-7 * exact.norm());
}

TEST(Ffth, HomogeneousMediumNeedsNoIteration) {
  const GridSpec g = make_cube_grid(3, 8);
  const ConductivityField L = ConductivityField::homogeneous(g, Tensor(4.0 * Tensor::Identity(3, 3)));
  for (double lambda : {4.0, 2.5}) {
    const SolveResult r = solve_ffth(L, GreenOperator(g, lambda), unit(3, 0), config(Method::ffth));
    EXPECT_EQ(r.iterations, 0);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.residual_history.front(), 1e-14);
    EXPECT_LT(norm(r.solution - RealField::constant(g, unit(3, 0))), 1e-14);
  }
}

TEST(Ffth, IteratesArePartialNeumannSums) {
  Rng rng(103);
  const GridSpec g = make_cube_grid(3, 4);
  const ConductivityField L = random_microstructure(g, 6.0, rng);
  const GreenOperator G(g, reference_lambda(6.0, 0.5).lambda);
  const Vector e0 = unit(3, 1);
  SolverConfig c = config(Method::ffth, 1e-14, true);
  c.max_iter = 6;
  const SolveResult r = solve_ffth(L, G, e0, c);
  ASSERT_EQ(r.iterate_history.size(), 7u);

  const RealField e0f = RealField::constant(g, e0);
  RealField term = e0f;
  RealField sum = e0f;
  for (std::size_t m = 0; m < r.iterate_history.size(); ++m) {
    EXPECT_LT(norm(r.iterate_history[m] - sum), 1e-12 * norm(sum)) << "m=" << m;
    term = -1.0 * apply_B(term, L, G);
    sum += term;
  }
  // first step explicitly
  EXPECT_LT(norm(r.iterate_history[1] - (e0f - apply_B(e0f, L, G))), 1e-13);
}

TEST(Ffth, ReportsNonConvergence) {
  const auto [g, L] = sphere3d(8, 10.0);
  SolverConfig c = config(Method::ffth, 1e-12);
  c.max_iter = 3;
  const SolveResult r = solve_ffth(L, GreenOperator(g, 5.5), unit(3, 0), c);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_EQ(r.residual_history.size(), 4u);
}

TEST(Ffth, DivergesWhenReferenceIsTooSoft) {
  // lambda below half the largest phase conductivity: the Neumann series of
  // the template problem does not converge.
  const auto [g, L] = sphere3d(8, 10.0);
  SolverConfig c = config(Method::ffth, 1e-6);
  c.max_iter = 400;
  const SolveResult r = solve_ffth(L, GreenOperator(g, reference_lambda(10.0, 0.3).lambda),
                                   unit(3, 0), c);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual_history.back(), r.residual_history.front());
}

TEST(Cg, LambdaInvariance) {
  const auto [g, L] = sphere3d(8, 10.0);
  const SolverConfig c = config(Method::cg, 1e-8, true);
  const SolveResult a = solve_cg(L, GreenOperator(g, reference_lambda(10.0, 0.3).lambda), unit(3, 0), c);
  const SolveResult b = solve_cg(L, GreenOperator(g, reference_lambda(10.0, 0.7).lambda), unit(3, 0), c);
  EXPECT_LE(std::abs(a.iterations - b.iterations), 1);
  const std::size_t common = std::min(a.iterate_history.size(), b.iterate_history.size());
  ASSERT_GE(common, 10u);
  for (std::size_t m = 0; m < 10; ++m) {
    EXPECT_LT(norm(a.iterate_history[m] - b.iterate_history[m]), 1e-8) << "m=" << m;
  }
}

TEST(Cg, MatchesBiCg) {
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  const SolveResult a = solve_cg(L, G, unit(3, 2), config(Method::cg, 1e-8, true));
  const SolveResult b = solve_bicg(L, G, unit(3, 2), config(Method::bicg, 1e-8, true));
  EXPECT_EQ(a.iterations, b.iterations);
  for (std::size_t m = 0; m < std::min<std::size_t>(10, a.iterate_history.size()); ++m) {
    EXPECT_LT(norm(a.iterate_history[m] - b.iterate_history[m]), 1e-8) << "m=" << m;
  }
}

TEST(Cg, ResidualsStayInE) {
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  const SolveResult r = solve_cg(L, G, unit(3, 0), config(Method::cg, 1e-8, true));
  const double scale = norm(RealField::constant(g, unit(3, 0)));
  ASSERT_FALSE(r.residual_vectors.empty());
  for (const RealField& res : r.residual_vectors) {
    EXPECT_LT(norm(res - project_E(res, G)), 1e-10 * scale);
  }
}

TEST(Cg, RecursiveResidualTracksTrueResidual) {
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  const SolveResult r = solve_cg(L, G, unit(3, 0), config(Method::cg, 1e-8, true));
  for (std::size_t m = 0; m < r.iterate_history.size(); ++m) {
    const RealField truth = residual(L, G, unit(3, 0), r.iterate_history[m]);
    EXPECT_LT(norm(truth - r.residual_vectors[m]), 1e-9 * norm(RealField::constant(g, unit(3, 0))));
  }
}

TEST(Solvers, IteratesPreserveMean) {
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  Vector e0(3);
  e0 << 0.2, 1.0, -0.4;
  for (Method m : {Method::ffth, Method::cg, Method::bicg}) {
    const SolveResult r = solve(L, G, e0, config(m, 1e-6, true));
    for (const RealField& it : r.iterate_history) {
      EXPECT_LT((mean_value(it) - e0).norm(), 1e-12) << to_string(m);
    }
  }
}

TEST(Cg, EnergyIsNonIncreasing) {
  Rng rng(104);
  const GridSpec g = make_cube_grid(3, 6);
  const ConductivityField L = random_microstructure(g, 20.0, rng);
  const GreenOperator G(g, 7.0);
  const SolveResult r = solve_cg(L, G, unit(3, 0), config(Method::cg, 1e-10, true));
  double prev = energy_functional(L, unit(3, 0), r.iterate_history.front());
  EXPECT_DOUBLE_EQ(prev, 0.0);
  for (std::size_t m = 1; m < r.iterate_history.size(); ++m) {
    const double cur = energy_functional(L, unit(3, 0), r.iterate_history[m]);
    EXPECT_LE(cur, prev + 1e-12 * std::abs(prev)) << "m=" << m;
    prev = cur;
  }
}

TEST(Cg, AcceptsPerturbationInE) {
  Rng rng(105);
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  const SolveResult plain = solve_cg(L, G, unit(3, 0), config(Method::cg, 1e-10));
  SolverConfig c = config(Method::cg, 1e-10);
  c.initial_perturbation = project_E(random_field(g, rng), G);
  const SolveResult perturbed = solve_cg(L, G, unit(3, 0), c);
  EXPECT_TRUE(perturbed.converged);
  EXPECT_LT(norm(perturbed.solution - plain.solution), 1e-7 * norm(plain.solution));
}

TEST(Cg, RejectsPerturbationOutsideE) {
  Rng rng(106);
  const auto [g, L] = sphere3d(8, 10.0);
  const GreenOperator G(g, 5.5);
  SolverConfig c = config(Method::cg);
  c.initial_perturbation = random_field(g, rng);
  EXPECT_THROW(solve_cg(L, G, unit(3, 0), c), InitialVectorNotInE);
  c.method = Method::bicg;
  EXPECT_THROW(solve_bicg(L, G, unit(3, 0), c), InitialVectorNotInE);
}

TEST(Cg, DetectsBreakdownOnIndefiniteOperator) {
  // A sign-flipped Green block makes (I + B) indefinite on the Krylov space.
  const auto [g, L] = sphere3d(8, 100.0);
  const GreenOperator bad(g, 1.0, {.inject_sign_fault = true});
  EXPECT_THROW(solve_cg(L, bad, unit(3, 0), config(Method::cg)), BreakdownDetected);
  EXPECT_THROW(solve_bicg(L, bad, unit(3, 0), config(Method::bicg)), BreakdownDetected);
}

TEST(Solvers, ValidatesInputs) {
  const auto [g, L] = sphere3d(4, 10.0);
  const GreenOperator G(g, 5.5);
  SolverConfig c = config(Method::cg);
  c.tol = 0.0;
  EXPECT_THROW(solve(L, G, unit(3, 0), c), InvalidArgument);
  c.tol = 1e-6;
  c.max_iter = 0;
  EXPECT_THROW(solve(L, G, unit(3, 0), c), InvalidArgument);
  c.max_iter = 10;
  EXPECT_THROW(solve(L, G, Vector::Zero(3), c), InvalidArgument);
  EXPECT_THROW(solve(L, G, unit(2, 0), c), InvalidArgument);
  EXPECT_THROW(solve(L, GreenOperator(make_cube_grid(3, 5), 1.0), unit(3, 0), c), GridMismatch);
}

TEST(Residual, ZeroForExactSolutionOfReferenceMedium) {
  const GridSpec g = make_cube_grid(2, 4);
  const ConductivityField L = ConductivityField::homogeneous(g, Tensor(2.0 * Tensor::Identity(2, 2)));
  const RealField r = residual(L, GreenOperator(g, 2.0), unit(2, 0), RealField::constant(g, unit(2, 0)));
  EXPECT_LT(norm(r), 1e-15);
}

TEST(Residual, MatchesDenseOracle) {
  Rng rng(107);
  const GridSpec g = make_cube_grid(2, 4);
  const ConductivityField L = random_microstructure(g, 10.0, rng);
  const double lambda = 4.0;
  const GreenOperator G(g, lambda);
  const auto n = static_cast<Eigen::Index>(g.num_dofs());
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) +
                            oracle::dense_green_convolution(g, lambda) *
                                oracle::dense_polarization(L, lambda);
  const RealField e = random_field(g, rng);
  const Eigen::VectorXd expected = flatten(RealField::constant(g, unit(2, 1))) - A * flatten(e);
  EXPECT_LT((flatten(residual(L, G, unit(2, 1), e)) - expected).norm(), 1e-12);
}
