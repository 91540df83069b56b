#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/LU>

#include "dynbc/assembly.hpp"
#include "dynbc/error.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/schemes.hpp"
#include "dense_oracle.hpp"

using namespace dynbc;
using namespace oracle;

namespace {

ProblemSpec constant_problem(double c) {
  return homogeneous_problem([c](double, const Point&) { return c; },
                             [](double, const Point&) { return 0.0; });
}

const std::vector<SchemeKind> kAllSchemes{SchemeKind::Euler, SchemeKind::Lie, SchemeKind::Naive,
                                          SchemeKind::Strang};

}  // namespace

TEST_CASE("scheme names") {
  for (auto k : kAllSchemes) CHECK(parse_scheme(scheme_name(k)) == k);
  CHECK(scheme_name(SchemeKind::Naive) == "naive");
  CHECK_THROWS_AS(parse_scheme("rk4"), ArgumentError);
}

TEST_CASE("Lie step matches the dense block system") {
  const Mesh mesh = generate_crisscross_square(1);
  std::mt19937 rng(3);
  for (const char* name : {"linear_smooth", "linear_oscillatory"}) {
    const ProblemSpec spec = builtin_problem(name);
    const BlockSystem b = assemble_for(spec, mesh);
    const StepState s0 = initial_state(spec, mesh);
    CHECK(state_diff(lie_step(s0, 0.1, mesh, b, spec), oracle_lie(s0, 0.1, mesh, spec, true)) <= 1e-10);
    for (int k = 0; k < 5; ++k) {
      const StepState s = random_state(mesh, rng, 0.3);
      CHECK(state_diff(lie_step(s, 0.1, mesh, b, spec), oracle_lie(s, 0.1, mesh, spec, true)) <= 1e-10);
      CHECK(state_diff(naive_pdae_step(s, 0.1, mesh, b, spec), oracle_lie(s, 0.1, mesh, spec, false)) <=
            1e-10);
    }
  }
}

TEST_CASE("schemes match dense oracles on a small disk mesh") {
  const Mesh mesh = generate_disk_mesh(0.6);
  REQUIRE(mesh.n_omega <= 50);
  std::mt19937 rng(11);
  const ProblemSpec spec = builtin_problem("linear_oscillatory", {1.5, 0.3, 0.2, 0.7});
  const BlockSystem b = assemble_for(spec, mesh);
  for (int k = 0; k < 3; ++k) {
    const StepState s = random_state(mesh, rng, 0.2);
    CHECK(state_diff(lie_step(s, 0.05, mesh, b, spec), oracle_lie(s, 0.05, mesh, spec, true)) <= 1e-10);
    CHECK(state_diff(monolithic_euler_step(s, 0.05, mesh, b, spec), oracle_euler(s, 0.05, mesh, spec)) <=
          1e-10);
    CHECK(state_diff(strang_step(s, 0.05, mesh, b, spec), oracle_strang(s, 0.05, mesh, spec)) <= 1e-10);
  }
}

TEST_CASE("Strang and Euler steps on the one-cell mesh") {
  const Mesh mesh = generate_crisscross_square(1);
  const ProblemSpec spec = builtin_problem("linear_smooth");
  const BlockSystem b = assemble_for(spec, mesh);
  const StepState s = initial_state(spec, mesh);
  CHECK(state_diff(strang_step(s, 0.1, mesh, b, spec), oracle_strang(s, 0.1, mesh, spec)) <= 1e-10);
  CHECK(state_diff(monolithic_euler_step(s, 0.1, mesh, b, spec), oracle_euler(s, 0.1, mesh, spec)) <=
        1e-10);
}

TEST_CASE("zero data stays zero") {
  const Mesh mesh = generate_disk_mesh(0.4);
  const ProblemSpec spec = constant_problem(0.0);
  for (auto k : kAllSchemes) {
    const auto sum = integrate(spec, mesh, k, 0.05);
    CHECK(sum.steps == 20);
    CHECK(sum.final_state.u1.isZero(0.0));
    CHECK(sum.final_state.p.isZero(0.0));
    CHECK(sum.max_norm_u == 0.0);
  }
}

TEST_CASE("constants are steady states of every scheme") {
  const Mesh mesh = generate_disk_mesh(0.3);
  const ProblemSpec spec = constant_problem(2.5);
  for (auto k : kAllSchemes) {
    double drift = 0.0;
    const auto sum = integrate(spec, mesh, k, 0.01,
                               {[&](std::size_t, const StepState& s) {
                                 drift = std::max({drift, (s.u1.array() - 2.5).abs().maxCoeff(),
                                                   (s.p.array() - 2.5).abs().maxCoeff()});
                               }});
    CAPTURE(scheme_name(k));
    CHECK(sum.steps == 100);
    CHECK(drift <= 1e-10);
  }
}

TEST_CASE("monolithic Euler is dissipative without forcing") {
  const Mesh mesh = generate_disk_mesh(0.25);
  const ProblemSpec spec = homogeneous_problem(
      [](double, const Point& x) { return std::sin(3 * x.x) * std::cos(2 * x.y) + x.x * x.x; },
      [](double, const Point& x) { return x.y; });
  const BlockSystem b = assemble_for(spec, mesh);
  const SparseMatrix M = block_matrix(b.M11, b.M12, b.M21, b.M22);
  double prev = -1.0;
  std::size_t violations = 0;
  integrate(spec, mesh, b, SchemeKind::Euler, 0.02,
            {[&](std::size_t, const StepState& s) {
              const double e = M.energy(s.full()) + b.M_gamma.energy(s.p);
              if (prev >= 0.0 && e > prev * (1.0 + 1e-14)) ++violations;
              prev = e;
            }});
  CHECK(violations == 0);
}

TEST_CASE("Newton on a linear residual takes one step") {
  DenseMatrix k(3, 3);
  k << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const SparseMatrix K = SparseMatrix::from_dense(k);
  const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
  const auto r = newton_solve([&](const Vector& p) { return Vector(K * p - b); },
                              [&](const Vector&) { return K; }, Vector::Zero(3));
  CHECK(r.iterations == 1);
  CHECK((r.x - solve_spd(K, b)).norm() <= 1e-12);
}

TEST_CASE("Newton on a scalar cubic") {
  NewtonConfig cfg;
  cfg.tol = 1e-12;
  const auto r = newton_solve(
      [](const Vector& p) { return Vector::Constant(1, p(0) * p(0) * p(0) - 8.0); },
      [](const Vector& p) { return SparseMatrix::diagonal(Vector::Constant(1, 3 * p(0) * p(0))); },
      Vector::Constant(1, 3.0), cfg);
  CHECK(r.iterations <= 8);
  CHECK(std::abs(r.x(0) - 2.0) <= 1e-12);
  CHECK(r.residuals.size() == r.iterations + 1);

  cfg.max_iter = 2;
  CHECK_THROWS_AS(newton_solve([](const Vector& p) { return Vector::Constant(1, p(0) * p(0) * p(0) - 8.0); },
                               [](const Vector& p) {
                                 return SparseMatrix::diagonal(Vector::Constant(1, 3 * p(0) * p(0)));
                               },
                               Vector::Constant(1, 3.0), cfg),
                  NonConvergenceError);
  cfg.tol = 0.0;
  CHECK_THROWS_AS(newton_solve([](const Vector& p) { return p; },
                               [](const Vector&) { return SparseMatrix::identity(1); }, Vector::Ones(1), cfg),
                  ArgumentError);
}

TEST_CASE("Newton converges quadratically on Allen-Cahn steps") {
  const Mesh mesh = generate_disk_mesh(0.2);
  const ProblemSpec spec = builtin_problem("allen_cahn");
  const BlockSystem b = assemble_for(spec, mesh);
  Stepper stepper(SchemeKind::Lie, mesh, b, spec, 0.05);
  StepState s = initial_state(spec, mesh);
  std::vector<double> constants;
  for (int n = 0; n < 20; ++n) {
    s = stepper.step(s);
    const auto& r = stepper.last_newton_residuals();
    CHECK(stepper.last_newton_iterations() <= 10);
    REQUIRE(r.size() >= 2);
    const double prev = r[r.size() - 2];
    const double last = r.back();
    if (prev > 1e-8) constants.push_back(last / (prev * prev));
  }
  REQUIRE_FALSE(constants.empty());
  const double smallest = *std::min_element(constants.begin(), constants.end());
  const double largest = *std::max_element(constants.begin(), constants.end());
  CAPTURE(smallest);
  CAPTURE(largest);
  CHECK(std::isfinite(largest));
  CHECK(largest <= 10.0 * std::max(smallest, 1.0));
}

TEST_CASE("step count must be an integer") {
  CHECK(step_count(1.0, 0.1) == 10);
  CHECK(step_count(1.0, 0.05) == 2 * step_count(1.0, 0.1));
  CHECK(step_count(1.0, 1.0 / 3.0) == 3);
  CHECK_THROWS_AS(step_count(1.0, 0.3), ArgumentError);
  CHECK_THROWS_AS(step_count(1.0, 2.0), ArgumentError);
  CHECK_THROWS_AS(step_count(1.0, 0.0), ArgumentError);
}

TEST_CASE("a single step of length T equals one scheme step") {
  const Mesh mesh = generate_disk_mesh(0.4);
  const ProblemSpec spec = builtin_problem("linear_smooth");
  const BlockSystem b = assemble_for(spec, mesh);
  const StepState s0 = initial_state(spec, mesh);
  const auto sum = integrate(spec, mesh, b, SchemeKind::Lie, 1.0);
  CHECK(sum.steps == 1);
  CHECK(state_diff(sum.final_state, lie_step(s0, 1.0, mesh, b, spec)) == 0.0);
}

TEST_CASE("Lie step depends on the state triple only") {
  const Mesh mesh = generate_disk_mesh(0.3);
  const ProblemSpec spec = builtin_problem("linear_oscillatory");
  const BlockSystem b = assemble_for(spec, mesh);
  Stepper stepper(SchemeKind::Lie, mesh, b, spec, 0.05);
  StepState s = initial_state(spec, mesh);
  for (int k = 0; k < 3; ++k) s = stepper.step(s);
  StepState copy;
  copy.dp = s.dp;
  copy.t = s.t;
  copy.p = s.p;
  copy.u1 = s.u1;
  Stepper fresh(SchemeKind::Lie, mesh, b, spec, 0.05);
  const StepState a = stepper.step(s);
  const StepState c = fresh.step(copy);
  CHECK(a.u1 == c.u1);
  CHECK(a.p == c.p);
  CHECK(a.dp == c.dp);
}

TEST_CASE("blow-up is detected and reported") {
  const Mesh mesh = generate_disk_mesh(0.3);
  const ProblemSpec spec = builtin_problem("linear_smooth");
  const BlockSystem b = assemble_for(spec, mesh);
  StepperOptions tight;
  tight.blow_up_threshold = 0.1;
  Stepper stepper(SchemeKind::Lie, mesh, b, spec, 0.1, tight);
  CHECK_THROWS_AS(stepper.step(initial_state(spec, mesh)), BlowUpError);

  const auto sum = integrate(spec, mesh, b, SchemeKind::Lie, 0.1, {}, tight);
  CHECK(sum.blow_up);
  CHECK(sum.steps == 0);
  CHECK(sum.blow_up_time == doctest::Approx(0.1));
}

TEST_CASE("integrate reports Newton statistics and observes every level") {
  const Mesh mesh = generate_disk_mesh(0.3);
  const ProblemSpec spec = builtin_problem("allen_cahn");
  std::vector<std::size_t> seen;
  const auto sum = integrate(spec, mesh, SchemeKind::Lie, 0.1,
                             {[&](std::size_t n, const StepState& s) {
                               seen.push_back(n);
                               CHECK(s.t == doctest::Approx(0.1 * static_cast<double>(n)));
                             }});
  CHECK(sum.steps == 10);
  REQUIRE(seen.size() == 11);
  for (std::size_t n = 0; n <= 10; ++n) CHECK(seen[n] == n);
  CHECK(sum.newton_per_step.size() == 10);
  CHECK(sum.newton_max_iterations >= 1);
  CHECK(sum.newton_max_iterations <= 10);
  CHECK(sum.final_state.t == doctest::Approx(1.0));

  const auto linear = integrate(builtin_problem("linear_smooth"), mesh, SchemeKind::Lie, 0.1);
  CHECK(linear.newton_max_iterations == 0);
}

TEST_CASE("state dependent bulk forcing goes through Newton") {
  const Mesh mesh = generate_disk_mesh(0.4);
  ProblemSpec spec = homogeneous_problem([](double, const Point& x) { return 0.5 + 0.1 * x.x; },
                                         [](double, const Point&) { return 0.0; });
  spec.f_omega = [](double, const Point&, double u) { return u - u * u * u; };
  spec.df_omega = [](double, const Point&, double u) { return 1.0 - 3.0 * u * u; };
  spec.omega_state_dependent = true;
  spec.validate();
  const BlockSystem b = assemble_for(spec, mesh);
  for (auto k : kAllSchemes) {
    Stepper st(k, mesh, b, spec, 0.05);
    const StepState s1 = st.step(initial_state(spec, mesh));
    CAPTURE(scheme_name(k));
    CHECK(s1.u1.allFinite());
    CHECK(s1.p.allFinite());
    if (k != SchemeKind::Strang) CHECK(st.last_newton_iterations() >= 1);
  }
}
