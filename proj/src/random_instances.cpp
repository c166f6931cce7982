#include "ffthom/random_instances.hpp"

#include <Eigen/QR>

namespace ffthom {

RealField random_field(const GridSpec& grid, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  RealField f(grid);
  for (double& v : f.values()) v = dist(rng);
  return f;
}

Tensor random_spd_tensor(int dim, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> eig(lo, hi);
  Tensor a(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) a(r, c) = unit(rng);
  }
  const Tensor q = Eigen::HouseholderQR<Tensor>(a).householderQ();
  Vector lambda(dim);
  for (int i = 0; i < dim; ++i) lambda[i] = eig(rng);
  Tensor t = q * lambda.asDiagonal() * q.transpose();
  // IEEE addition commutes, so this is exactly symmetric.
  return Tensor(0.5 * (t + t.transpose()));
}

ConductivityField random_microstructure(const GridSpec& grid, double contrast, Rng& rng) {
  std::vector<Tensor> tensors;
  tensors.reserve(grid.num_nodes());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    tensors.push_back(random_spd_tensor(grid.dim(), 1.0, contrast, rng));
  }
  return ConductivityField::from_nodal_tensors(grid, std::move(tensors));
}

}  // namespace ffthom
