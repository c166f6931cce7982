#include "ffthom/solvers.hpp"

#include "ffthom/errors.hpp"

#include <chrono>
#include <cmath>

namespace ffthom {

std::string to_string(Method method) {
  switch (method) {
    case Method::ffth: return "ffth";
    case Method::cg: return "cg";
    case Method::bicg: return "bicg";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "ffth") return Method::ffth;
  if (name == "cg") return Method::cg;
  if (name == "bicg") return Method::bicg;
  throw InvalidArgument("unknown solver method '" + name + "' (expected ffth, cg or bicg)");
}

namespace {

using Clock = std::chrono::steady_clock;

void validate(const ConductivityField& conductivity, const GreenOperator& green,
              const Vector& load, const SolverConfig& config) {
  require_same_grid(conductivity.grid(), green.grid(), "solver");
  if (!(config.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (config.max_iter < 1) throw InvalidArgument("solver max_iter must be >= 1");
  if (load.size() != green.grid().dim()) {
    throw InvalidArgument("macroscopic load must have d components");
  }
  if (!load.allFinite() || load.isZero(0.0)) {
    throw InvalidArgument("macroscopic load must be finite and non-zero");
  }
}

// e0 + e~, with e~ checked for membership in E.
RealField krylov_start(const GreenOperator& green, const RealField& load_field,
                       const SolverConfig& config) {
  RealField x = load_field;
  if (config.initial_perturbation) {
    const RealField& pert = *config.initial_perturbation;
    require_same_grid(pert.grid(), green.grid(), "initial perturbation");
    const double off = norm(pert - project_E(pert, green));
    if (off > 1e-10 * norm(pert)) {
      throw InitialVectorNotInE("initial perturbation has a component of relative size " +
                                std::to_string(off / norm(pert)) + " outside E");
    }
    x += pert;
  }
  return x;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SolveResult solve_ffth(const ConductivityField& conductivity, const GreenOperator& green,
                       const Vector& load, const SolverConfig& config) {
  validate(conductivity, green, load, config);
  const auto start = Clock::now();
  const RealField e0 = RealField::constant(green.grid(), load);
  const double load_norm = norm(e0);

  SolveResult res{.solution = e0};
  RealField& e = res.solution;
  int m = 0;
  for (;;) {
    const RealField Be = apply_B(e, conductivity, green);
    RealField r = e0 - e;
    r -= Be;
    const double rel = norm(r) / load_norm;
    res.residual_history.push_back(rel);
    if (config.record_iterates) {
      res.iterate_history.push_back(e);
      res.residual_vectors.push_back(r);
    }
    if (rel <= config.tol) {
      res.converged = true;
      break;
    }
    if (m == config.max_iter || !std::isfinite(rel)) break;
    e = e0 - Be;
    ++m;
  }
  res.iterations = m;
  res.wall_time = seconds_since(start);
  return res;
}

SolveResult solve_cg(const ConductivityField& conductivity, const GreenOperator& green,
                     const Vector& load, const SolverConfig& config) {
  validate(conductivity, green, load, config);
  const auto start = Clock::now();
  const RealField e0 = RealField::constant(green.grid(), load);
  const double load_norm = norm(e0);

  SolveResult res{.solution = krylov_start(green, e0, config)};
  RealField& x = res.solution;
  RealField r = e0 - apply_system(x, conductivity, green);
  RealField p = r;
  double rr = inner_product(r, r);

  int m = 0;
  auto record = [&] {
    const double rel = std::sqrt(inner_product(r, r)) / load_norm;
    res.residual_history.push_back(rel);
    if (config.record_iterates) {
      res.iterate_history.push_back(x);
      res.residual_vectors.push_back(r);
    }
    return rel;
  };

  double rel = record();
  while (rel > config.tol && m < config.max_iter) {
    const RealField Ap = apply_system(p, conductivity, green);
    const double pAp = inner_product(p, Ap);
    if (!(pAp > 0.0)) {
      throw BreakdownDetected("CG breakdown at iteration " + std::to_string(m) +
                              ": p.(I+B)p = " + std::to_string(pAp));
    }
    const double alpha = rr / pAp;
    x.add_scaled(alpha, p);
    r.add_scaled(-alpha, Ap);
    ++m;
    rel = record();
    if (rel <= config.tol || !std::isfinite(rel)) break;
    const double rr_next = inner_product(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    p *= beta;
    p += r;
  }
  res.iterations = m;
  res.converged = rel <= config.tol;
  res.wall_time = seconds_since(start);
  return res;
}

SolveResult solve_bicg(const ConductivityField& conductivity, const GreenOperator& green,
                       const Vector& load, const SolverConfig& config) {
  validate(conductivity, green, load, config);
  const auto start = Clock::now();
  const RealField e0 = RealField::constant(green.grid(), load);
  const double load_norm = norm(e0);

  SolveResult res{.solution = krylov_start(green, e0, config)};
  RealField& x = res.solution;
  RealField r = e0 - apply_system(x, conductivity, green);
  RealField shadow = r;
  RealField p = r;
  RealField p_shadow = shadow;
  double rho = inner_product(shadow, r);

  int m = 0;
  auto record = [&] {
    const double rel = norm(r) / load_norm;
    res.residual_history.push_back(rel);
    if (config.record_iterates) {
      res.iterate_history.push_back(x);
      res.residual_vectors.push_back(r);
    }
    return rel;
  };

  double rel = record();
  while (rel > config.tol && m < config.max_iter) {
    const RealField Ap = apply_system(p, conductivity, green);
    const RealField ATp = apply_system_transpose(p_shadow, conductivity, green);
    const double sigma = inner_product(p_shadow, Ap);
    if (!(sigma > 0.0)) {
      throw BreakdownDetected("BiCG breakdown at iteration " + std::to_string(m) +
                              ": p~.(I+B)p = " + std::to_string(sigma));
    }
    const double alpha = rho / sigma;
    x.add_scaled(alpha, p);
    r.add_scaled(-alpha, Ap);
    shadow.add_scaled(-alpha, ATp);
    ++m;
    rel = record();
    if (rel <= config.tol || !std::isfinite(rel)) break;
    const double rho_next = inner_product(shadow, r);
    if (rho_next == 0.0) {
      throw BreakdownDetected("BiCG breakdown at iteration " + std::to_string(m) +
                              ": vanishing shadow inner product");
    }
    const double beta = rho_next / rho;
    rho = rho_next;
    p *= beta;
    p += r;
    p_shadow *= beta;
    p_shadow += shadow;
  }
  res.iterations = m;
  res.converged = rel <= config.tol;
  res.wall_time = seconds_since(start);
  return res;
}

SolveResult solve(const ConductivityField& conductivity, const GreenOperator& green,
                  const Vector& load, const SolverConfig& config) {
  switch (config.method) {
    case Method::ffth: return solve_ffth(conductivity, green, load, config);
    case Method::cg: return solve_cg(conductivity, green, load, config);
    case Method::bicg: return solve_bicg(conductivity, green, load, config);
  }
  throw InvalidArgument("unknown solver method");
}

RealField residual(const ConductivityField& conductivity, const GreenOperator& green,
                   const Vector& load, const RealField& e) {
  RealField r = RealField::constant(e.grid(), load);
  r -= apply_system(e, conductivity, green);
  return r;
}

double energy_functional(const ConductivityField& conductivity, const Vector& load,
                         const RealField& e) {
  const RealField e0 = RealField::constant(e.grid(), load);
  const RealField fluct = e - e0;
  return 0.5 * inner_product(apply_conductivity(conductivity, fluct), fluct) +
         inner_product(apply_conductivity(conductivity, e0), fluct);
}

}  // namespace ffthom
