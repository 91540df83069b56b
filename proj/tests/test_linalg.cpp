#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dynbc/assembly.hpp"
#include "dynbc/error.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/mesh.hpp"

using namespace dynbc;

namespace {

DenseMatrix random_spd(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = g(rng);
  }
  return G.transpose() * G + DenseMatrix::Identity(n, n);
}

double dense_gen_eig_max(const SparseMatrix& A, const SparseMatrix& B) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(A.to_dense(), B.to_dense());
  return es.eigenvalues().maxCoeff();
}

Mesh scaled(const Mesh& m, double s) {
  std::vector<Point> pts = m.nodes;
  for (auto& p : pts) {
    p.x *= s;
    p.y *= s;
  }
  return build_mesh(pts, m.triangles, m.boundary_edges).mesh;
}

BlockSystem plain_blocks(const Mesh& m) { return assemble_blocks(m, 1.0, 0.0, 1.0, 0.0); }

}  // namespace

TEST_CASE("identity solve returns the right-hand side") {
  const Vector b = Vector::LinSpaced(7, -3.0, 3.0);
  CHECK((solve_spd(SparseMatrix::identity(7), b) - b).norm() <= 1e-15);
}

TEST_CASE("two by two solve") {
  DenseMatrix a(2, 2);
  a << 2, 1, 1, 2;
  const Vector x = solve_spd(SparseMatrix::from_dense(a), Vector::Ones(2));
  CHECK(x(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("random SPD systems meet the residual contract") {
  const DenseMatrix a = random_spd(50, 7);
  const SparseMatrix s = SparseMatrix::from_dense(a);
  const Vector b = Vector::LinSpaced(50, 1.0, -2.0);

  SolveConfig dense_cfg;
  const Vector xd = solve_spd(s, b, dense_cfg);
  CHECK((a * xd - b).norm() <= dense_cfg.rel_tol * b.norm());

  SolveConfig cg_cfg;
  cg_cfg.dense_threshold = 10;
  SpdSolver cg(s, cg_cfg);
  CHECK_FALSE(cg.dense());
  const Vector xc = cg.solve(b);
  CHECK((a * xc - b).norm() <= cg_cfg.rel_tol * b.norm());
  CHECK(cg.last_iterations() > 0);
}

TEST_CASE("conjugate gradients on a stiffness system") {
  const Mesh m = generate_disk_mesh(0.08);
  const auto b = plain_blocks(m);
  const SparseMatrix sys = linear_combination(10.0, b.M11, 1.0, b.A11);
  REQUIRE(sys.rows() > 200);
  SpdSolver solver(sys);
  CHECK_FALSE(solver.dense());
  const Vector rhs = Vector::Ones(static_cast<Eigen::Index>(sys.rows()));
  const Vector x = solver.solve(rhs);
  CHECK((sys * x - rhs).norm() <= 1e-12 * rhs.norm());
  const Vector again = solver.solve(rhs, &x);
  CHECK(solver.last_iterations() <= 1);
  CHECK((again - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("solver input validation") {
  SolveConfig bad;
  bad.rel_tol = 1e-3;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  Vector b = Vector::Ones(3);
  b(1) = std::nan("");
  CHECK_THROWS_AS(solve_spd(SparseMatrix::identity(3), b), ArgumentError);

  SolveConfig capped;
  capped.dense_threshold = 1;
  capped.max_iter = 2;
  const SparseMatrix a = SparseMatrix::from_dense(random_spd(40, 3));
  CHECK_THROWS_AS(solve_spd(a, Vector::Ones(40), capped), NonConvergenceError);
}

TEST_CASE("general solver handles unsymmetric systems") {
  DenseMatrix a = random_spd(30, 5);
  a(0, 5) += 3.0;
  a(7, 2) -= 1.0;
  const Vector b = Vector::LinSpaced(30, 0.0, 1.0);
  const GeneralSolver dense(SparseMatrix::from_dense(a));
  CHECK((a * dense.solve(b) - b).norm() <= 1e-10);
  const GeneralSolver sparse(SparseMatrix::from_dense(a), 5);
  CHECK((a * sparse.solve(b) - b).norm() <= 1e-10);
}

TEST_CASE("generalized eigenvalue examples") {
  const SparseMatrix b = SparseMatrix::from_dense(random_spd(6, 1));
  CHECK(gen_eig_max(b, b) == doctest::Approx(1.0).epsilon(1e-8));

  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  CHECK(gen_eig_max(SparseMatrix::from_dense(d), SparseMatrix::identity(2)) ==
        doctest::Approx(4.0).epsilon(1e-8));

  DenseMatrix a(2, 2);
  a << 2, 1, 1, 2;
  DenseMatrix bb(2, 2);
  bb << 1, 0, 0, 2;
  CHECK(gen_eig_max(SparseMatrix::from_dense(a), SparseMatrix::from_dense(bb)) ==
        doctest::Approx((6.0 + std::sqrt(12.0)) / 4.0).epsilon(1e-8));
}

TEST_CASE("Rayleigh quotients stay below the largest eigenvalue") {
  const SparseMatrix a = SparseMatrix::from_dense(random_spd(20, 11));
  const SparseMatrix b = SparseMatrix::from_dense(random_spd(20, 12));
  const double lambda = gen_eig_max(a, b);
  CHECK(lambda == doctest::Approx(dense_gen_eig_max(a, b)).epsilon(1e-7));
  std::mt19937 rng(99);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    Vector v(20);
    for (auto& x : v) x = g(rng);
    CHECK(a.energy(v) / b.energy(v) <= lambda * (1.0 + 1e-8));
  }
}

TEST_CASE("boundary mass constant on criss-cross meshes") {
  std::vector<double> values;
  for (std::size_t n : {4u, 8u, 16u}) {
    const Mesh m = generate_crisscross_square(n);
    const double c = estimate_cM(m, plain_blocks(m));
    CAPTURE(n);
    CHECK(c >= 0.2);
    CHECK(c <= 0.45);
    values.push_back(c);
  }
  for (std::size_t k = 1; k < values.size(); ++k) {
    CHECK(std::abs(values[k] - values[k - 1]) <= 0.2 * values[k - 1]);
  }
}

TEST_CASE("boundary mass constant certifies its inequality") {
  const Mesh m = generate_disk_mesh(0.2);
  const auto b = plain_blocks(m);
  const double c = estimate_cM(m, b);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Vector v(static_cast<Eigen::Index>(m.n_gamma));
    for (auto& x : v) x = u(rng);
    const double lhs = b.M22.energy(v);
    const double rhs = c * m.metrics.h_gamma * b.M_gamma.energy(v);
    CHECK(lhs <= rhs * (1.0 + 1e-10) + 1e-10);
  }
}

TEST_CASE("inverse estimate constant on the smallest mesh with an interior node") {
  const Mesh m = generate_crisscross_square(1);
  const auto b = plain_blocks(m);
  REQUIRE(b.n2 == 4);
  const double expected = m.metrics.h * m.metrics.h * dense_gen_eig_max(b.A22, b.M22);
  CHECK(estimate_cinv(m, b) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("inverse estimate constant is scale invariant and bounded") {
  const Mesh m = generate_disk_mesh(0.3);
  const double c1 = estimate_cinv(m, plain_blocks(m));
  const Mesh big = scaled(m, 2.0);
  CHECK(big.metrics.h == doctest::Approx(2.0 * m.metrics.h));
  const double c2 = estimate_cinv(big, plain_blocks(big));
  CHECK(std::abs(c2 - c1) <= 0.05 * c1);

  double target = 0.3;
  double first = c1;
  for (int k = 0; k < 3; ++k) {
    target /= std::sqrt(2.0);
    const Mesh r = generate_disk_mesh(target);
    const double c = estimate_cinv(r, plain_blocks(r));
    CHECK(c <= 1.5 * first);
  }
}

TEST_CASE("CFL check") {
  const CflReport base = check_cfl(0.01, 0.1, 0.3, 2.0);
  CHECK(base.tau_max == doctest::Approx(3.0 * 0.1 / (7.0 * 2.0 * 0.3)));
  CHECK(check_cfl(base.tau_max / 2.0, 0.1, 0.3, 2.0).satisfied);
  CHECK_FALSE(check_cfl(base.tau_max, 0.1, 0.3, 2.0).satisfied);
  CHECK(check_cfl(0.07, 0.1, 0.3, 2.0).satisfied);
  CHECK(base.c_A() == doctest::Approx(0.6));
  CHECK(base.c_alpha_M(2.0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(check_cfl(0.0, 0.1, 0.3, 2.0), ArgumentError);

  bool seen_true = false;
  for (double tau = 0.2; tau > 1e-4; tau *= 0.9) {
    const bool s = check_cfl(tau, 0.1, 0.3, 2.0).satisfied;
    if (seen_true) CHECK(s);
    seen_true = seen_true || s;
  }
  CHECK(seen_true);
}

TEST_CASE("CFL report CSV row") {
  const CflReport r = check_cfl(0.07, 0.1, 0.3, 2.0, 0.05);
  CHECK(CflReport::csv_header() == "h,h_gamma,c_M,c_inv,tau,tau_max,satisfied");
  const std::string row = r.csv_row();
  CHECK(std::count(row.begin(), row.end(), ',') == 6);
  CHECK(row.back() == '1');
}
