#include "dynbc/problems.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "dynbc/error.hpp"

namespace dynbc {

namespace {

constexpr double pi = std::numbers::pi;

/// u = g(t) x y with harmonic spatial part; on the unit circle
/// -Lap_Gamma(xy) = 4 xy and d_nu(xy) = 2 xy.
ProblemSpec product_problem(std::string name, const Coefficients& c,
                            std::function<double(double)> g, std::function<double(double)> dg) {
  ProblemSpec s;
  s.name = std::move(name);
  s.kappa = Diffusion(c.kappa);
  s.alpha_omega = c.alpha_omega;
  s.alpha_gamma = c.alpha_gamma;
  s.beta = c.beta;
  s.f_omega = [c, g, dg](double t, const Point& x, double) {
    return (dg(t) + c.alpha_omega * g(t)) * x.x * x.y;
  };
  s.f_gamma = [c, g, dg](double t, const Point& x, double) {
    return (dg(t) + (4.0 * c.beta + 2.0 * c.kappa + c.alpha_gamma) * g(t)) * x.x * x.y;
  };
  s.exact = [g](double t, const Point& x) { return g(t) * x.x * x.y; };
  s.exact_dt = [dg](double t, const Point& x) { return dg(t) * x.x * x.y; };
  return s;
}

ProblemSpec allen_cahn(const Coefficients& c) {
  ProblemSpec s;
  s.name = "allen_cahn";
  s.kappa = Diffusion(c.kappa);
  s.alpha_omega = c.alpha_omega;
  s.alpha_gamma = c.alpha_gamma;
  s.beta = c.beta;
  const auto time = [](double t) { return std::cos(pi * t / 2.0); };
  const auto dtime = [](double t) { return -pi / 2.0 * std::sin(pi * t / 2.0); };
  // u = r^4 c(t): Lap u = 16 r^2 c, d_nu u = 4 r^3 c, u is constant along the circle
  s.f_omega = [c, time, dtime](double t, const Point& x, double) {
    const double r2 = x.x * x.x + x.y * x.y;
    return dtime(t) * r2 * r2 - 16.0 * c.kappa * r2 * time(t) + c.alpha_omega * r2 * r2 * time(t);
  };
  const auto g = [c, time, dtime](double t, const Point& x) {
    const double r2 = x.x * x.x + x.y * x.y;
    const double r = std::sqrt(r2);
    const double u = r2 * r2 * time(t);
    return dtime(t) * r2 * r2 + 4.0 * c.kappa * r2 * r * time(t) + c.alpha_gamma * u + u * u * u -
           u;
  };
  s.f_gamma = [g](double t, const Point& x, double p) { return g(t, x) - p * p * p + p; };
  s.df_gamma = [](double, const Point&, double p) { return 1.0 - 3.0 * p * p; };
  s.gamma_state_dependent = true;
  s.exact = [time](double t, const Point& x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return r2 * r2 * time(t);
  };
  s.exact_dt = [dtime](double t, const Point& x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return r2 * r2 * dtime(t);
  };
  return s;
}

}  // namespace

void ProblemSpec::validate() const {
  if (alpha_omega < 0.0 || alpha_gamma < 0.0 || beta < 0.0) {
    throw ArgumentError("reaction and surface diffusion coefficients must be nonnegative");
  }
  if (!f_omega || !f_gamma) throw ArgumentError("problem lacks right-hand sides");
  if (omega_state_dependent && !df_omega) throw ArgumentError("missing d f_Omega / du");
  if (gamma_state_dependent && !df_gamma) throw ArgumentError("missing d f_Gamma / dp");
  if (exact && !exact_dt) throw ArgumentError("exact solution without its time derivative");
  if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("final time must be positive");
}

std::vector<std::string> builtin_problem_names() {
  return {"linear_oscillatory", "linear_smooth", "allen_cahn"};
}

ProblemSpec builtin_problem(const std::string& name, const Coefficients& coeffs) {
  ProblemSpec s;
  if (name == "linear_oscillatory") {
    s = product_problem(
        name, coeffs, [](double t) { return std::exp(-t) * std::cos(10.0 * t); },
        [](double t) {
          return -std::exp(-t) * (std::cos(10.0 * t) + 10.0 * std::sin(10.0 * t));
        });
  } else if (name == "linear_smooth") {
    s = product_problem(
        name, coeffs, [](double t) { return std::exp(-t); },
        [](double t) { return -std::exp(-t); });
  } else if (name == "allen_cahn") {
    s = allen_cahn(coeffs);
  } else {
    throw ArgumentError("unknown problem '" + name + "'");
  }
  s.validate();
  return s;
}

ProblemSpec homogeneous_problem(SpaceTimeField initial, SpaceTimeField initial_dt,
                                const Coefficients& coeffs, double T) {
  ProblemSpec s;
  s.name = "homogeneous";
  s.kappa = Diffusion(coeffs.kappa);
  s.alpha_omega = coeffs.alpha_omega;
  s.alpha_gamma = coeffs.alpha_gamma;
  s.beta = coeffs.beta;
  s.f_omega = [](double, const Point&, double) { return 0.0; };
  s.f_gamma = [](double, const Point&, double) { return 0.0; };
  s.initial = std::move(initial);
  s.initial_dt = std::move(initial_dt);
  s.T = T;
  s.validate();
  return s;
}

ProblemSpec load_problem_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("cannot open problem config " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("problem config " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("problem")) {
    throw ArgumentError("problem config must name a builtin 'problem'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "problem" && key != "T" && key != "kappa" && key != "alpha_omega" &&
        key != "alpha_gamma" && key != "beta") {
      throw ArgumentError("unknown problem config key '" + key + "'");
    }
  }
  Coefficients c;
  c.kappa = j.value("kappa", c.kappa);
  c.alpha_omega = j.value("alpha_omega", c.alpha_omega);
  c.alpha_gamma = j.value("alpha_gamma", c.alpha_gamma);
  c.beta = j.value("beta", c.beta);
  ProblemSpec s = builtin_problem(j.at("problem").get<std::string>(), c);
  s.T = j.value("T", s.T);
  s.validate();
  return s;
}

Vector interpolate_exact(const ProblemSpec& spec, const Mesh& mesh, double t) {
  if (!spec.exact) throw UnsupportedError("problem '" + spec.name + "' has no exact solution");
  Vector u(static_cast<Eigen::Index>(mesh.n_omega));
  for (std::size_t i = 0; i < mesh.n_omega; ++i) {
    u[static_cast<Eigen::Index>(i)] = spec.exact(t, mesh.nodes[i]);
  }
  return u;
}

DiscreteInitialData initial_data(const ProblemSpec& spec, const Mesh& mesh) {
  SpaceTimeField u0;
  SpaceTimeField du0;
  if (spec.exact && spec.exact_dt) {
    u0 = spec.exact;
    du0 = spec.exact_dt;
  } else if (spec.initial) {
    u0 = spec.initial;
    du0 = spec.initial_dt ? spec.initial_dt : SpaceTimeField([](double, const Point&) { return 0.0; });
  } else {
    throw ArgumentError("problem '" + spec.name + "' has neither exact nor initial data");
  }
  const std::size_t n1 = mesh.n_interior();
  const std::size_t n2 = mesh.n_gamma;
  DiscreteInitialData d{Vector(static_cast<Eigen::Index>(n1)),
                        Vector(static_cast<Eigen::Index>(n2)),
                        Vector(static_cast<Eigen::Index>(n2))};
  for (std::size_t i = 0; i < n1; ++i) d.u1_0[static_cast<Eigen::Index>(i)] = u0(0.0, mesh.nodes[i]);
  for (std::size_t k = 0; k < n2; ++k) {
    const Point& x = mesh.nodes[n1 + k];
    d.p_0[static_cast<Eigen::Index>(k)] = u0(0.0, x);
    d.dp_0[static_cast<Eigen::Index>(k)] = du0(0.0, x);
  }
  return d;
}

namespace {

Vector nodal_bulk(const StateField& f, const Mesh& mesh, double t, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.n_omega) throw ArgumentError("bulk state size");
  Vector out(u.size());
  for (std::size_t i = 0; i < mesh.n_omega; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = f(t, mesh.nodes[i], u[k]);
  }
  return out;
}

Vector nodal_surface(const StateField& f, const Mesh& mesh, double t, const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != mesh.n_gamma) throw ArgumentError("surface state size");
  Vector out(p.size());
  const std::size_t first = mesh.first_boundary();
  for (std::size_t k = 0; k < mesh.n_gamma; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out[i] = f(t, mesh.nodes[first + k], p[i]);
  }
  return out;
}

}  // namespace

Vector nodal_f_omega(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& u) {
  return nodal_bulk(spec.f_omega, mesh, t, u);
}

Vector nodal_df_omega(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& u) {
  if (!spec.omega_state_dependent) return Vector::Zero(u.size());
  return nodal_bulk(spec.df_omega, mesh, t, u);
}

Vector nodal_f_gamma(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& p) {
  return nodal_surface(spec.f_gamma, mesh, t, p);
}

Vector nodal_df_gamma(const ProblemSpec& spec, const Mesh& mesh, double t, const Vector& p) {
  if (!spec.gamma_state_dependent) return Vector::Zero(p.size());
  return nodal_surface(spec.df_gamma, mesh, t, p);
}

}  // namespace dynbc
