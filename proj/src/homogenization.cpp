#include "ffthom/homogenization.hpp"

#include "ffthom/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <string>

namespace ffthom {

Vector average_current(const ConductivityField& conductivity, const RealField& e) {
  return mean_value(apply_conductivity(conductivity, e, 0.0));
}

EffectiveTensor effective_tensor(const ConductivityField& conductivity,
                                 const GreenOperator& green, const SolverConfig& config) {
  const int d = conductivity.grid().dim();
  EffectiveTensor out;
  out.effective = Tensor::Zero(d, d);
  out.bounds = voigt_reuss_bounds(conductivity);
  for (int b = 0; b < d; ++b) {
    const Vector load = Vector::Unit(d, b);
    const SolveResult res = solve(conductivity, green, load, config);
    out.columns.push_back({res.iterations, res.residual_history.back(), res.wall_time,
                           res.converged});
    if (!res.converged) {
      throw NotConverged("effective tensor: column " + std::to_string(b) + " stopped after " +
                         std::to_string(res.iterations) + " iterations at residual " +
                         std::to_string(res.residual_history.back()));
    }
    out.effective.col(b) = average_current(conductivity, res.solution);
  }
  return out;
}

Bounds voigt_reuss_bounds(const ConductivityField& conductivity) {
  const int d = conductivity.grid().dim();
  const auto& table = conductivity.phase_tensors();
  std::vector<std::size_t> count(table.size(), 0);
  for (std::uint32_t p : conductivity.phase_of_node()) ++count[p];

  Tensor mean = Tensor::Zero(d, d);
  Tensor mean_inv = Tensor::Zero(d, d);
  const double nn = static_cast<double>(conductivity.grid().num_nodes());
  for (std::size_t p = 0; p < table.size(); ++p) {
    if (count[p] == 0) continue;
    const double w = static_cast<double>(count[p]) / nn;
    mean += w * table[p];
    mean_inv += w * table[p].inverse();
  }
  return Bounds{mean_inv.inverse(), mean};
}

double bound_slack(const Tensor& value, const Bounds& bounds,
                   const std::vector<Vector>& probes) {
  double slack = std::numeric_limits<double>::infinity();
  for (const Vector& x : probes) {
    const double xx = x.squaredNorm();
    const double v = x.dot(value * x);
    slack = std::min(slack, (x.dot(bounds.voigt * x) - v) / xx);
    slack = std::min(slack, (v - x.dot(bounds.reuss * x)) / xx);
  }
  return slack;
}

}  // namespace ffthom
