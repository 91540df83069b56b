#include "dynbc/schemes.hpp"

#include <algorithm>
#include <cmath>

#include "dynbc/error.hpp"

namespace dynbc {

namespace {

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

Vector StepState::full() const { return concat(u1, p); }

StepState initial_state(const ProblemSpec& spec, const Mesh& mesh) {
  const auto d = initial_data(spec, mesh);
  return StepState{d.u1_0, d.p_0, d.dp_0, 0.0};
}

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          const Vector& start, const NewtonConfig& cfg) {
  if (!(cfg.tol > 0.0) || cfg.max_iter == 0) throw ArgumentError("invalid Newton configuration");
  NewtonResult out;
  out.x = start;
  Vector r = residual(out.x);
  double norm = r.norm();
  out.residuals.push_back(norm);
  while (norm > cfg.tol) {
    if (!std::isfinite(norm)) {
      throw NonConvergenceError("Newton iteration diverged", out.iterations, norm);
    }
    if (out.iterations == cfg.max_iter) {
      throw NonConvergenceError("Newton iteration did not converge", out.iterations, norm);
    }
    const GeneralSolver lu(jacobian(out.x), cfg.dense_threshold);
    out.x -= lu.solve(r);
    r = residual(out.x);
    norm = r.norm();
    out.residuals.push_back(norm);
    ++out.iterations;
  }
  return out;
}

SchemeKind parse_scheme(const std::string& name) {
  if (name == "euler") return SchemeKind::Euler;
  if (name == "lie") return SchemeKind::Lie;
  if (name == "naive") return SchemeKind::Naive;
  if (name == "strang") return SchemeKind::Strang;
  throw ArgumentError("unknown scheme '" + name + "' (expected euler|lie|naive|strang)");
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Euler: return "euler";
    case SchemeKind::Lie: return "lie";
    case SchemeKind::Naive: return "naive";
    case SchemeKind::Strang: return "strang";
  }
  return "?";
}

Stepper::Stepper(SchemeKind kind, const Mesh& mesh, const BlockSystem& blocks,
                 const ProblemSpec& spec, double tau, StepperOptions options)
    : kind_(kind), mesh_(mesh), b_(blocks), spec_(spec), tau_(tau), opt_(options) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError("step size must be positive");
  if (b_.n1 != mesh.n_interior() || b_.n2 != mesh.n_gamma) {
    throw ArgumentError("block system does not match the mesh");
  }
  spec_.validate();
  const double inv = 1.0 / tau;
  switch (kind_) {
    case SchemeKind::Lie:
    case SchemeKind::Naive:
      interior_ = SpdSolver(linear_combination(inv, b_.M11, 1.0, b_.A11), opt_.solve);
      boundary_ = SpdSolver(linear_combination(inv, b_.M_gamma, 1.0, b_.A_gamma), opt_.solve);
      break;
    case SchemeKind::Strang:
      mass11_ = SpdSolver(b_.M11, opt_.solve);
      interior_ = SpdSolver(linear_combination(2.0 * inv, b_.M11, 1.0, b_.A11), opt_.solve);
      boundary_ = SpdSolver(linear_combination(inv, b_.M_gamma, 0.5, b_.A_gamma), opt_.solve);
      break;
    case SchemeKind::Euler: {
      bulk_mass_ = block_matrix(b_.M11, b_.M12, b_.M21, b_.M22);
      coupled_mass_ = block_matrix(b_.M11, b_.M12, b_.M21, b_.M22 + b_.M_gamma);
      const SparseMatrix stiff = block_matrix(b_.A11, b_.A12, b_.A21, b_.A22 + b_.A_gamma);
      coupled_ = SpdSolver(linear_combination(inv, coupled_mass_, 1.0, stiff), opt_.solve);
      break;
    }
  }
}

void Stepper::bulk_forcing(double t, const Vector& u1, const Vector& p, Vector& f1,
                           Vector& f2) const {
  const Vector nodal = nodal_f_omega(spec_, mesh_, t, concat(u1, p));
  const Vector n1 = nodal.head(static_cast<Eigen::Index>(b_.n1));
  const Vector n2 = nodal.tail(static_cast<Eigen::Index>(b_.n2));
  f1 = b_.M11 * n1;
  b_.M12.multiply_add(n2, f1);
  f2 = b_.M21 * n1;
  b_.M22.multiply_add(n2, f2);
}

Vector Stepper::surface_forcing(double t, const Vector& p) const {
  return b_.M_gamma * nodal_f_gamma(spec_, mesh_, t, p);
}

void Stepper::record_newton(const NewtonResult& r) {
  last_newton_iters_ += r.iterations;
  last_residuals_ = r.residuals;
}

Vector Stepper::solve_interior(const SpdSolver& solver, double t, const Vector& p,
                               const Vector& rhs, const Vector& guess) {
  Vector f1;
  Vector f2;
  if (!spec_.omega_state_dependent) {
    bulk_forcing(t, guess, p, f1, f2);
    return solver.solve(rhs + f1, &guess);
  }
  const auto n1 = static_cast<Eigen::Index>(b_.n1);
  const ResidualFn residual = [&](const Vector& u1) {
    Vector g1;
    Vector g2;
    bulk_forcing(t, u1, p, g1, g2);
    return Vector(solver.matrix() * u1 - g1 - rhs);
  };
  const JacobianFn jacobian = [&](const Vector& u1) {
    const Vector d = nodal_df_omega(spec_, mesh_, t, concat(u1, p)).head(n1);
    return solver.matrix() - b_.M11.scale_columns(d);
  };
  const auto r = newton_solve(residual, jacobian, guess, opt_.newton);
  record_newton(r);
  return r.x;
}

Vector Stepper::solve_boundary(const SpdSolver& solver, double t, const Vector& rhs,
                               const Vector& guess, const Vector& shift, double arg_scale) {
  if (!spec_.gamma_state_dependent) {
    return solver.solve(rhs + surface_forcing(t, shift + arg_scale * guess), &guess);
  }
  const ResidualFn residual = [&](const Vector& p) {
    return Vector(solver.matrix() * p - surface_forcing(t, shift + arg_scale * p) - rhs);
  };
  const JacobianFn jacobian = [&](const Vector& p) {
    const Vector d = nodal_df_gamma(spec_, mesh_, t, shift + arg_scale * p);
    return solver.matrix() - b_.M_gamma.scale_columns(arg_scale * d);
  };
  const auto r = newton_solve(residual, jacobian, guess, opt_.newton);
  record_newton(r);
  return r.x;
}

StepState Stepper::lie(const StepState& s, bool with_derivatives) {
  const double t1 = s.t + tau_;
  const double inv = 1.0 / tau_;

  // bulk subsystem with p and dp frozen at t^n
  Vector rhs = inv * (b_.M11 * s.u1);
  b_.A12.multiply_add(s.p, rhs, -1.0);
  if (with_derivatives) b_.M12.multiply_add(s.dp, rhs, -1.0);
  const Vector u1 = solve_interior(interior_, t1, s.p, rhs, s.u1);
  const Vector du1 = inv * (u1 - s.u1);

  // boundary subsystem driven by the new bulk values
  Vector f1;
  Vector f2;
  bulk_forcing(t1, u1, s.p, f1, f2);
  Vector rhs_b = inv * (b_.M_gamma * s.p) + f2;
  b_.A22.multiply_add(s.p, rhs_b, -1.0);
  b_.A21.multiply_add(u1, rhs_b, -1.0);
  if (with_derivatives) {
    b_.M22.multiply_add(s.dp, rhs_b, -1.0);
    b_.M21.multiply_add(du1, rhs_b, -1.0);
  }
  const Vector p = solve_boundary(boundary_, t1, rhs_b, s.p, Vector::Zero(s.p.size()), 1.0);
  return StepState{u1, p, inv * (p - s.p), t1};
}

StepState Stepper::euler(const StepState& s) {
  const double t1 = s.t + tau_;
  const double inv = 1.0 / tau_;
  const auto n1 = static_cast<Eigen::Index>(b_.n1);
  const auto n2 = static_cast<Eigen::Index>(b_.n2);
  const Vector rhs = inv * (coupled_mass_ * s.full());

  const auto forcing = [&](const Vector& u) {
    const Vector p = u.tail(n2);
    Vector f1;
    Vector f2;
    bulk_forcing(t1, u.head(n1), p, f1, f2);
    return concat(f1, f2 + surface_forcing(t1, p));
  };

  Vector u;
  if (!spec_.omega_state_dependent && !spec_.gamma_state_dependent) {
    const Vector guess = s.full();
    u = coupled_.solve(rhs + forcing(guess), &guess);
  } else {
    const ResidualFn residual = [&](const Vector& v) {
      return Vector(coupled_.matrix() * v - forcing(v) - rhs);
    };
    const JacobianFn jacobian = [&](const Vector& v) {
      const Vector dom = nodal_df_omega(spec_, mesh_, t1, v);
      const Vector dga = nodal_df_gamma(spec_, mesh_, t1, Vector(v.tail(n2)));
      const SparseMatrix surf = block_matrix(SparseMatrix(b_.n1, b_.n1), SparseMatrix(b_.n1, b_.n2),
                                             SparseMatrix(b_.n2, b_.n1),
                                             b_.M_gamma.scale_columns(dga));
      return coupled_.matrix() - bulk_mass_.scale_columns(dom) - surf;
    };
    const auto r = newton_solve(residual, jacobian, s.full(), opt_.newton);
    record_newton(r);
    u = r.x;
  }
  const Vector p = u.tail(n2);
  return StepState{u.head(n1), p, inv * (p - s.p), t1};
}

StepState Stepper::strang(const StepState& s) {
  const double half = 0.5 * tau_;
  const double th = s.t + half;
  const double t1 = s.t + tau_;
  const double inv = 1.0 / tau_;

  // explicit Euler half step in the bulk
  Vector f1;
  Vector f2;
  bulk_forcing(s.t, s.u1, s.p, f1, f2);
  Vector r1 = f1;
  b_.A11.multiply_add(s.u1, r1, -1.0);
  b_.M12.multiply_add(s.dp, r1, -1.0);
  b_.A12.multiply_add(s.p, r1, -1.0);
  const Vector u1h = s.u1 + half * mass11_.solve(r1);
  const Vector du1h = (u1h - s.u1) / half;

  // midpoint rule on the boundary over the full step
  bulk_forcing(th, u1h, s.p, f1, f2);
  Vector rhs_b = inv * (b_.M_gamma * s.p) + f2;
  b_.A_gamma.multiply_add(s.p, rhs_b, -0.5);
  b_.M22.multiply_add(s.dp, rhs_b, -1.0);
  b_.A22.multiply_add(s.p, rhs_b, -1.0);
  b_.M21.multiply_add(du1h, rhs_b, -1.0);
  b_.A21.multiply_add(u1h, rhs_b, -1.0);
  const Vector p = solve_boundary(boundary_, th, rhs_b, s.p, 0.5 * s.p, 0.5);
  const Vector dp = inv * (p - s.p);

  // implicit Euler half step in the bulk
  Vector rhs3 = (2.0 * inv) * (b_.M11 * u1h);
  b_.M12.multiply_add(dp, rhs3, -1.0);
  b_.A12.multiply_add(p, rhs3, -1.0);
  const Vector u1 = solve_interior(interior_, t1, p, rhs3, u1h);
  return StepState{u1, p, dp, t1};
}

void Stepper::check(const StepState& s) const {
  const double m = std::max({max_abs(s.u1), max_abs(s.p), max_abs(s.dp)});
  const bool finite = s.u1.allFinite() && s.p.allFinite() && s.dp.allFinite();
  if (!finite || m > opt_.blow_up_threshold) {
    throw BlowUpError(s.t, finite ? m : INFINITY);
  }
}

StepState Stepper::step(const StepState& state) {
  if (static_cast<std::size_t>(state.u1.size()) != b_.n1 ||
      static_cast<std::size_t>(state.p.size()) != b_.n2 ||
      static_cast<std::size_t>(state.dp.size()) != b_.n2) {
    throw ArgumentError("state does not match the block system");
  }
  last_newton_iters_ = 0;
  last_residuals_.clear();
  StepState next;
  switch (kind_) {
    case SchemeKind::Lie: next = lie(state, true); break;
    case SchemeKind::Naive: next = lie(state, false); break;
    case SchemeKind::Euler: next = euler(state); break;
    case SchemeKind::Strang: next = strang(state); break;
  }
  check(next);
  return next;
}

namespace {

StepState single_step(SchemeKind kind, const StepState& state, double tau, const Mesh& mesh,
                      const BlockSystem& blocks, const ProblemSpec& spec,
                      const NewtonConfig& newton) {
  StepperOptions opt;
  opt.newton = newton;
  Stepper stepper(kind, mesh, blocks, spec, tau, opt);
  return stepper.step(state);
}

}  // namespace

StepState lie_step(const StepState& state, double tau, const Mesh& mesh, const BlockSystem& blocks,
                   const ProblemSpec& spec, const NewtonConfig& newton) {
  return single_step(SchemeKind::Lie, state, tau, mesh, blocks, spec, newton);
}

StepState naive_pdae_step(const StepState& state, double tau, const Mesh& mesh,
                          const BlockSystem& blocks, const ProblemSpec& spec,
                          const NewtonConfig& newton) {
  return single_step(SchemeKind::Naive, state, tau, mesh, blocks, spec, newton);
}

StepState monolithic_euler_step(const StepState& state, double tau, const Mesh& mesh,
                                const BlockSystem& blocks, const ProblemSpec& spec,
                                const NewtonConfig& newton) {
  return single_step(SchemeKind::Euler, state, tau, mesh, blocks, spec, newton);
}

StepState strang_step(const StepState& state, double tau, const Mesh& mesh,
                      const BlockSystem& blocks, const ProblemSpec& spec,
                      const NewtonConfig& newton) {
  return single_step(SchemeKind::Strang, state, tau, mesh, blocks, spec, newton);
}

std::size_t step_count(double T, double tau) {
  if (!(tau > 0.0) || !(T > 0.0)) throw ArgumentError("T and tau must be positive");
  const double ratio = T / tau;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw ArgumentError("T / tau must be an integer (T=" + std::to_string(T) +
                        ", tau=" + std::to_string(tau) + ")");
  }
  return static_cast<std::size_t>(n);
}

TrajectorySummary integrate(const ProblemSpec& spec, const Mesh& mesh, const BlockSystem& blocks,
                            SchemeKind scheme, double tau,
                            const std::vector<StepObserver>& observers,
                            const StepperOptions& options, std::optional<StepState> start) {
  const std::size_t steps = step_count(spec.T, tau);
  Stepper stepper(scheme, mesh, blocks, spec, tau, options);
  StepState state = start ? std::move(*start) : initial_state(spec, mesh);

  TrajectorySummary sum;
  const auto track = [&](std::size_t n, const StepState& s) {
    sum.max_norm_u = std::max({sum.max_norm_u, max_abs(s.u1), max_abs(s.p)});
    sum.max_norm_dp = std::max(sum.max_norm_dp, max_abs(s.dp));
    for (const auto& obs : observers) obs(n, s);
  };
  track(0, state);
  for (std::size_t n = 1; n <= steps; ++n) {
    try {
      // accumulate time as n * tau so the last step lands exactly on T
      state = stepper.step(state);
      state.t = static_cast<double>(n) * tau;
    } catch (const BlowUpError& e) {
      sum.blow_up = true;
      sum.blow_up_time = e.time();
      break;
    }
    const std::size_t it = stepper.last_newton_iterations();
    sum.newton_per_step.push_back(it);
    if (it > 0) {
      sum.newton_solves += 1;
      sum.newton_total_iterations += it;
      sum.newton_max_iterations = std::max(sum.newton_max_iterations, it);
    }
    sum.steps = n;
    track(n, state);
  }
  sum.final_state = std::move(state);
  return sum;
}

BlockSystem assemble_for(const ProblemSpec& spec, const Mesh& mesh) {
  return assemble_blocks(mesh, spec.kappa, spec.alpha_omega, spec.beta, spec.alpha_gamma);
}

TrajectorySummary integrate(const ProblemSpec& spec, const Mesh& mesh, SchemeKind scheme,
                            double tau, const std::vector<StepObserver>& observers,
                            const StepperOptions& options) {
  const BlockSystem blocks = assemble_for(spec, mesh);
  return integrate(spec, mesh, blocks, scheme, tau, observers, options);
}

}  // namespace dynbc
