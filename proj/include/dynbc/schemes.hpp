#ifndef DYNBC_SCHEMES_HPP
#define DYNBC_SCHEMES_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dynbc/assembly.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/sparse.hpp"

namespace dynbc {

/// Discrete state carried from step to step. The boundary part u2 of the
/// bulk unknown is not stored: it coincides with p.
struct StepState {
  Vector u1;  // interior nodal values
  Vector p;   // boundary nodal values
  Vector dp;  // discrete derivative (p^n - p^{n-1}) / tau
  double t = 0.0;

  /// (u1, p) as one bulk vector of length N_Omega.
  Vector full() const;
};

StepState initial_state(const ProblemSpec& spec, const Mesh& mesh);

struct NewtonConfig {
  double tol = 1e-10;
  std::size_t max_iter = 20;
  std::size_t dense_threshold = 200;
};

struct NewtonResult {
  Vector x;
  std::size_t iterations = 0;
  std::vector<double> residuals;  // ||R|| before each update, then the final one
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<SparseMatrix(const Vector&)>;

/// Plain Newton iteration from `start` until ||R(x)||_2 <= tol.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          const Vector& start, const NewtonConfig& cfg = {});

enum class SchemeKind { Euler, Lie, Naive, Strang };

SchemeKind parse_scheme(const std::string& name);
std::string scheme_name(SchemeKind kind);

struct StepperOptions {
  NewtonConfig newton;
  SolveConfig solve;
  double blow_up_threshold = 1e6;
};

/// Advances a StepState with one scheme and a fixed step size. The
/// step-size dependent system matrices are factorized once.
///
///   euler   implicit Euler on the coupled bulk-surface system
///   lie     bulk step with frozen p and dp, then boundary step
///   naive   lie without the derivative coupling terms
///   strang  explicit half step, midpoint boundary step, implicit half step
class Stepper {
public:
  Stepper(SchemeKind kind, const Mesh& mesh, const BlockSystem& blocks, const ProblemSpec& spec,
          double tau, StepperOptions options = {});

  /// Throws BlowUpError when any entry of the new state exceeds the
  /// threshold or is not finite.
  StepState step(const StepState& state);

  SchemeKind kind() const noexcept { return kind_; }
  double tau() const noexcept { return tau_; }
  /// Newton iterations of the last step (0 for purely linear steps).
  std::size_t last_newton_iterations() const noexcept { return last_newton_iters_; }
  const std::vector<double>& last_newton_residuals() const noexcept { return last_residuals_; }

private:
  StepState lie(const StepState& s, bool with_derivatives);
  StepState euler(const StepState& s);
  StepState strang(const StepState& s);

  /// Bulk forcing split into interior (f1) and boundary (f2) rows.
  void bulk_forcing(double t, const Vector& u1, const Vector& p, Vector& f1, Vector& f2) const;
  Vector surface_forcing(double t, const Vector& p) const;

  /// Solves (S u1 - f1(t, u1, p)) = rhs for the interior unknown, with
  /// Newton when f_Omega depends on the state.
  Vector solve_interior(const SpdSolver& solver, double t, const Vector& p, const Vector& rhs,
                        const Vector& guess);
  /// Solves S p - F_Gamma(t, shift + arg_scale * p) = rhs, where F_Gamma is
  /// the mass-weighted boundary forcing; Newton when it depends on p.
  Vector solve_boundary(const SpdSolver& solver, double t, const Vector& rhs, const Vector& guess,
                        const Vector& shift, double arg_scale);

  void record_newton(const NewtonResult& r);
  void check(const StepState& s) const;

  SchemeKind kind_;
  const Mesh& mesh_;
  const BlockSystem& b_;
  const ProblemSpec& spec_;
  double tau_;
  StepperOptions opt_;

  SpdSolver interior_;  // lie/naive: M11/tau + A11; strang: 2 M11/tau + A11
  SpdSolver boundary_;  // lie/naive: MG/tau + AG; strang: MG/tau + AG/2
  SpdSolver mass11_;    // strang explicit stage
  SpdSolver coupled_;   // euler
  SparseMatrix coupled_mass_;
  SparseMatrix bulk_mass_;

  std::size_t last_newton_iters_ = 0;
  std::vector<double> last_residuals_;
};

StepState lie_step(const StepState& state, double tau, const Mesh& mesh, const BlockSystem& blocks,
                   const ProblemSpec& spec, const NewtonConfig& newton = {});
StepState naive_pdae_step(const StepState& state, double tau, const Mesh& mesh,
                          const BlockSystem& blocks, const ProblemSpec& spec,
                          const NewtonConfig& newton = {});
StepState monolithic_euler_step(const StepState& state, double tau, const Mesh& mesh,
                                const BlockSystem& blocks, const ProblemSpec& spec,
                                const NewtonConfig& newton = {});
StepState strang_step(const StepState& state, double tau, const Mesh& mesh,
                      const BlockSystem& blocks, const ProblemSpec& spec,
                      const NewtonConfig& newton = {});

/// Called with the initial state (n = 0) and after every step.
using StepObserver = std::function<void(std::size_t n, const StepState& state)>;

struct TrajectorySummary {
  std::size_t steps = 0;  // completed steps
  StepState final_state;
  bool blow_up = false;
  double blow_up_time = 0.0;
  double max_norm_u = 0.0;  // max over steps of ||u^n||_inf (interior and boundary)
  double max_norm_dp = 0.0;
  std::size_t newton_max_iterations = 0;
  std::size_t newton_total_iterations = 0;
  std::size_t newton_solves = 0;
  std::vector<std::size_t> newton_per_step;  // entry n-1 belongs to step n
};

/// Number of steps T / tau; throws unless it is an integer.
std::size_t step_count(double T, double tau);

/// Integrates from t = 0 to spec.T. Blow-up ends the run and is reported in
/// the summary; any other failure propagates.
TrajectorySummary integrate(const ProblemSpec& spec, const Mesh& mesh, const BlockSystem& blocks,
                            SchemeKind scheme, double tau,
                            const std::vector<StepObserver>& observers = {},
                            const StepperOptions& options = {},
                            std::optional<StepState> start = std::nullopt);

/// Convenience overload assembling the blocks from the problem coefficients.
TrajectorySummary integrate(const ProblemSpec& spec, const Mesh& mesh, SchemeKind scheme,
                            double tau, const std::vector<StepObserver>& observers = {},
                            const StepperOptions& options = {});

BlockSystem assemble_for(const ProblemSpec& spec, const Mesh& mesh);

}  // namespace dynbc

#endif
