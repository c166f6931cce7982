#include "ffthom/errors.hpp"
#include "ffthom/homogenization.hpp"
#include "ffthom/random_instances.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ffthom;

namespace {

Tensor iso(int d, double c) { return Tensor(c * Tensor::Identity(d, d)); }

SolverConfig cg(double tol = 1e-10) {
  SolverConfig c;
  c.method = Method::cg;
  c.tol = tol;
  c.max_iter = 5000;
  return c;
}

// Layers normal to axis 0: the first `width` node rows carry phase a, the
// rest phase b. Even widths on an even grid leave no Nyquist content.
ConductivityField laminate(const GridSpec& g, int width, double a, double b) {
  std::vector<std::uint32_t> phase(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) phase[i] = g.multi_index(i)[0] < width ? 0 : 1;
  return ConductivityField(g, phase, {iso(g.dim(), a), iso(g.dim(), b)});
}

std::vector<Vector> probes(int d, Rng& rng, int count) {
  std::vector<Vector> out;
  std::normal_distribution<double> n01;
  for (int i = 0; i < count; ++i) {
    Vector x(d);
    for (int a = 0; a < d; ++a) x[a] = n01(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(AverageCurrent, HomogeneousConstantField) {
  const GridSpec g = make_cube_grid(3, 4);
  const ConductivityField L = ConductivityField::homogeneous(g, default_matrix_tensor(3));
  Vector e(3);
  e << 1.0, 0.0, -1.0;
  const Vector j = average_current(L, RealField::constant(g, e));
  EXPECT_LT((j - default_matrix_tensor(3) * e).norm(), 1e-14);
}

TEST(Effective, ReferenceMultipleOfIdentity) {
  const GridSpec g = make_cube_grid(3, 8);
  const ConductivityField L = ConductivityField::homogeneous(g, iso(3, 2.5));
  const EffectiveTensor eff = effective_tensor(L, GreenOperator(g, 2.5), cg());
  EXPECT_LT((eff.effective - iso(3, 2.5)).norm(), 1e-12);
  for (const ColumnSolve& c : eff.columns) EXPECT_EQ(c.iterations, 0);
}

TEST(Effective, HomogeneousAnisotropicIsExact) {
  const GridSpec g = make_cube_grid(3, 6);
  const ConductivityField L = ConductivityField::homogeneous(g, default_matrix_tensor(3));
  const EffectiveTensor eff = effective_tensor(L, GreenOperator(g, 1.0), cg());
  EXPECT_LT((eff.effective - default_matrix_tensor(3)).norm(), 1e-12);
}

TEST(Effective, LaminateSeriesAndParallel) {
  for (const GridSpec& g : {make_cube_grid(2, 8), make_grid(3, {8, 4, 6}, {0.5, 0.5, 0.5})}) {
    const double a = 1.0, b = 10.0, fa = 0.25;
    const ConductivityField L = laminate(g, 2, a, b);
    for (Method m : {Method::cg, Method::ffth}) {
      SolverConfig c = cg(1e-12);
      c.method = m;
      const EffectiveTensor eff = effective_tensor(L, GreenOperator(g, 0.5 * (a + b)), c);
      EXPECT_NEAR(eff.effective(0, 0), oracle::harmonic_mean(a, b, fa), 1e-9);
      for (int k = 1; k < g.dim(); ++k) {
        EXPECT_NEAR(eff.effective(k, k), fa * a + (1 - fa) * b, 1e-9);
        EXPECT_NEAR(eff.effective(0, k), 0.0, 1e-9);
      }
    }
  }
}

TEST(Effective, TemplateSymmetricAndBounded) {
  Rng rng(201);
  for (double rho : {10.0, 100.0}) {
    const GridSpec g = make_cube_grid(3, 12);
    const ConductivityField L = build_template_microstructure(g, rho);
    const EffectiveTensor eff =
        effective_tensor(L, GreenOperator(g, reference_lambda(rho, 0.5).lambda), cg(1e-8));
    const double scale = eff.effective.norm();
    EXPECT_LT((eff.effective - eff.effective.transpose()).norm(), 1e-6 * scale);
    EXPECT_GE(bound_slack(eff.effective, eff.bounds, probes(3, rng, 20)), -1e-6 * scale);
    // stiffer inclusions raise every diagonal entry above the matrix value
    for (int a = 0; a < 3; ++a) EXPECT_GT(eff.effective(a, a), 1.0);
  }
}

TEST(Effective, SolversAgree) {
  const GridSpec g = make_cube_grid(3, 8);
  const ConductivityField L = build_template_microstructure(g, 10.0);
  const GreenOperator G(g, 5.5);
  SolverConfig c = cg(1e-10);
  const Tensor a = effective_tensor(L, G, c).effective;
  c.method = Method::ffth;
  const Tensor b = effective_tensor(L, G, c).effective;
  c.method = Method::bicg;
  const Tensor d = effective_tensor(L, G, c).effective;
  EXPECT_LT((a - b).norm(), 1e-7 * a.norm());
  EXPECT_LT((a - d).norm(), 1e-9 * a.norm());
}

TEST(Effective, RandomMediumWithinBounds) {
  Rng rng(202);
  const GridSpec g = make_cube_grid(2, 8);
  const ConductivityField L = random_microstructure(g, 20.0, rng);
  const EffectiveTensor eff = effective_tensor(L, GreenOperator(g, 10.0), cg());
  EXPECT_GE(bound_slack(eff.effective, eff.bounds, probes(2, rng, 20)), -1e-8);
}

TEST(Effective, PropagatesNonConvergence) {
  const GridSpec g = make_cube_grid(3, 8);
  const ConductivityField L = build_template_microstructure(g, 10.0);
  SolverConfig c = cg(1e-12);
  c.max_iter = 2;
  EXPECT_THROW(effective_tensor(L, GreenOperator(g, 5.5), c), NotConverged);
}

TEST(Bounds, TwoPhaseIsotropic) {
  const GridSpec g = make_cube_grid(2, 8);
  const ConductivityField L = laminate(g, 2, 1.0, 10.0);
  const Bounds b = voigt_reuss_bounds(L);
  EXPECT_NEAR(b.voigt(0, 0), 0.25 + 7.5, 1e-14);
  EXPECT_NEAR(b.reuss(1, 1), 1.0 / (0.25 + 0.075), 1e-13);
  EXPECT_NEAR(b.voigt(0, 1), 0.0, 1e-15);
}

TEST(Bounds, OrderedOnRandomMedia) {
  Rng rng(203);
  for (int t = 0; t < 5; ++t) {
    const ConductivityField L = random_microstructure(make_cube_grid(3, 3), 50.0, rng);
    const Bounds b = voigt_reuss_bounds(L);
    const Eigen::VectorXd gap =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b.voigt - b.reuss).eigenvalues();
    EXPECT_GE(gap.minCoeff(), -1e-12);
  }
}

TEST(Bounds, SlackSign) {
  Bounds b{iso(2, 1.0), iso(2, 3.0)};
  std::vector<Vector> x{Vector::Unit(2, 0), Vector::Unit(2, 1)};
  EXPECT_NEAR(bound_slack(iso(2, 2.0), b, x), 1.0, 1e-15);
  EXPECT_LT(bound_slack(iso(2, 4.0), b, x), 0.0);
  EXPECT_LT(bound_slack(iso(2, 0.5), b, x), 0.0);
}
