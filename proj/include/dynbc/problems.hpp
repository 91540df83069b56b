#ifndef DYNBC_PROBLEMS_HPP
#define DYNBC_PROBLEMS_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dynbc/assembly.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

namespace dynbc {

/// g(t, x)
using SpaceTimeField = std::function<double(double, const Point&)>;
/// f(t, x, u), evaluated nodally
using StateField = std::function<double(double, const Point&, double)>;

/// Parabolic problem with a dynamic boundary condition:
///   u_t - div(kappa grad u) + alpha_Omega u = f_Omega(u)                 in Omega
///   u_t - beta Lap_Gamma u + kappa d_nu u + alpha_Gamma u = f_Gamma(u)   on Gamma
struct ProblemSpec {
  std::string name;
  Diffusion kappa{1.0};
  double alpha_omega = 0.0;
  double alpha_gamma = 0.0;
  double beta = 1.0;

  StateField f_omega;
  StateField df_omega;  // d f_Omega / du, only needed when state dependent
  bool omega_state_dependent = false;

  StateField f_gamma;
  StateField df_gamma;  // d f_Gamma / dp, only needed when state dependent
  bool gamma_state_dependent = false;

  SpaceTimeField exact;     // optional
  SpaceTimeField exact_dt;  // present whenever exact is
  SpaceTimeField initial;   // explicit u(0) when there is no exact solution
  SpaceTimeField initial_dt;

  double T = 1.0;

  bool has_exact() const { return static_cast<bool>(exact); }
  void validate() const;
};

/// Constant coefficients of a builtin problem; the manufactured forcing is
/// derived for whatever values are given here.
struct Coefficients {
  double kappa = 1.0;
  double alpha_omega = 0.0;
  double alpha_gamma = 0.0;
  double beta = 1.0;
};

/// Builtins: `linear_oscillatory` (u = e^-t cos(10t) xy), `linear_smooth`
/// (u = e^-t xy) and `allen_cahn` (u = |x|^4 cos(pi t / 2) with boundary
/// nonlinearity -p^3 + p). All live on the unit disk.
ProblemSpec builtin_problem(const std::string& name, const Coefficients& coeffs = {});
std::vector<std::string> builtin_problem_names();

/// f = 0 everywhere with the given initial state and boundary derivative.
ProblemSpec homogeneous_problem(SpaceTimeField initial, SpaceTimeField initial_dt,
                                const Coefficients& coeffs = {}, double T = 1.0);

/// JSON file: {"problem": "<builtin>", "T": .., "kappa": .., "alpha_omega": ..,
/// "alpha_gamma": .., "beta": ..}; omitted keys keep their builtin defaults.
ProblemSpec load_problem_config(const std::filesystem::path& path);

Vector interpolate_exact(const ProblemSpec& spec, const Mesh& mesh, double t);

struct DiscreteInitialData {
  Vector u1_0;
  Vector p_0;
  Vector dp_0;
};

DiscreteInitialData initial_data(const ProblemSpec& spec, const Mesh& mesh);

/// f_Omega(t, x_i, u_i) at every mesh node; `u` has length N_Omega.
Vector nodal_f_omega(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& u);
Vector nodal_df_omega(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& u);
/// f_Gamma(t, x_k, p_k) at every boundary node; `p` has length N_Gamma.
Vector nodal_f_gamma(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& p);
Vector nodal_df_gamma(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& p);

}  // namespace dynbc

#endif
