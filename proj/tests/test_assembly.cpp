#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dynbc/assembly.hpp"
#include "dynbc/error.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/mesh.hpp"

using namespace dynbc;

namespace {

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("element matrices of the unit right triangle") {
  const Point a{0, 0};
  const Point b{1, 0};
  const Point c{0, 1};
  const auto k = element_stiffness(a, b, c);
  const double ks[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  const auto m = element_mass(a, b, c);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(k[i][j] == doctest::Approx(ks[i][j]).epsilon(1e-14));
      CHECK(m[i][j] == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("surface element of length two") {
  // Square of side 2: every boundary edge has length 2.
  const Mesh m = build_mesh({{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {{0, 1, 2}, {0, 2, 3}}, {}).mesh;
  const auto s = assemble_surface(m, 1.0, 0.0);
  REQUIRE(s.mass.rows() == 4);
  const DenseMatrix md = s.mass.to_dense();
  const DenseMatrix ad = s.stiffness.to_dense();
  for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(m.boundary_edges[e][0] - m.first_boundary());
    const auto j = static_cast<Eigen::Index>(m.boundary_edges[e][1] - m.first_boundary());
    CHECK(md(i, j) == doctest::Approx(1.0 / 3.0));
    CHECK(ad(i, j) == doctest::Approx(-0.5));
  }
  // Each node collects two edges: diagonal mass 2 * 2/3, stiffness 2 * 1/2.
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(md(i, i) == doctest::Approx(4.0 / 3.0));
    CHECK(ad(i, i) == doctest::Approx(1.0));
  }
}

TEST_CASE("Wentzell case gives a pure reaction surface matrix") {
  const Mesh m = generate_disk_mesh(0.3);
  const auto s = assemble_surface(m, 0.0, 0.7);
  CHECK((s.stiffness.to_dense() - 0.7 * s.mass.to_dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stiffness annihilates constants") {
  for (const Mesh& m : {generate_disk_mesh(0.2), generate_crisscross_square(5)}) {
    const auto bulk = assemble_bulk(m, 1.0, 0.0);
    CHECK(max_abs(bulk.stiffness * Vector::Ones(m.n_omega)) <= 1e-12);
    const auto surf = assemble_surface(m, 1.0, 0.0);
    CHECK(max_abs(surf.stiffness * Vector::Ones(m.n_gamma)) <= 1e-12);
  }
}

TEST_CASE("mass matrices integrate one") {
  const Mesh m = generate_disk_mesh(0.15);
  const auto bulk = assemble_bulk(m, 1.0, 0.0);
  const auto surf = assemble_surface(m, 1.0, 0.0);
  const Vector one = Vector::Ones(m.n_omega);
  const Vector oneg = Vector::Ones(m.n_gamma);
  CHECK(std::abs(one.dot(bulk.mass * one) - total_area(m)) <= 1e-10);
  CHECK(std::abs(oneg.dot(surf.mass * oneg) - boundary_length(m)) <= 1e-10);
  CHECK(bulk.mass.diagonal_entries().minCoeff() > 0.0);
  CHECK(surf.mass.diagonal_entries().minCoeff() > 0.0);
}

TEST_CASE("assembled matrices are symmetric") {
  const Mesh m = generate_disk_mesh(0.2);
  const auto b = assemble_blocks(m, 1.3, 0.4, 0.8, 0.2);
  for (const SparseMatrix* s : {&b.M11, &b.M22, &b.A11, &b.A22, &b.M_gamma, &b.A_gamma}) {
    CHECK(s->is_value_symmetric(1e-14));
    CHECK(s->symmetric());
  }
  CHECK((b.M12.transpose().to_dense() - b.M21.to_dense()).norm() == 0.0);
  CHECK((b.A12.transpose().to_dense() - b.A21.to_dense()).norm() == 0.0);
}

TEST_CASE("bulk mass is positive definite") {
  const Mesh m = generate_disk_mesh(0.25);
  const auto bulk = assemble_bulk(m, 1.0, 0.0);
  // Smallest eigenvalue as the reciprocal of the largest of the inverse.
  const DenseMatrix inv = bulk.mass.to_dense().inverse();
  const double lambda_min = 1.0 / gen_eig_max(SparseMatrix::from_dense(inv), SparseMatrix::identity(m.n_omega));
  CHECK(lambda_min > 0.0);
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> es(bulk.mass.to_dense());
  CHECK(lambda_min == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-6));
}

TEST_CASE("diffusion coefficient scales the stiffness") {
  const Mesh m = generate_disk_mesh(0.3);
  const auto one = assemble_bulk(m, 1.0, 0.0);
  const auto three = assemble_bulk(m, 3.0, 0.0);
  CHECK((three.stiffness.to_dense() - 3.0 * one.stiffness.to_dense()).cwiseAbs().maxCoeff() <= 1e-13);

  std::vector<double> per(m.triangles.size(), 2.0);
  const auto pw = assemble_bulk(m, Diffusion(per), 0.5);
  CHECK((pw.stiffness.to_dense() - (2.0 * one.stiffness.to_dense() + 0.5 * one.mass.to_dense()))
            .cwiseAbs()
            .maxCoeff() <= 1e-13);
  CHECK_THROWS(assemble_bulk(m, Diffusion(std::vector<double>{1.0}), 0.0));
}

TEST_CASE("partition of the one-cell criss-cross mesh") {
  const Mesh m = generate_crisscross_square(1);
  const auto bulk = assemble_bulk(m, 1.0, 0.0);
  const auto b = partition_blocks(bulk.mass, bulk.stiffness, m.n_gamma);
  CHECK(b.n1 == 1);
  CHECK(b.n2 == 4);
  REQUIRE(b.M11.rows() == 1);
  const DenseMatrix full = bulk.mass.to_dense();
  CHECK(b.M11.coeff(0, 0) == full(0, 0));
  // Interior node touches four triangles of area 1/4 each: 4 * (1/4) * 2/12.
  CHECK(b.M11.coeff(0, 0) == doctest::Approx(1.0 / 6.0));

  const SparseMatrix re = block_matrix(b.M11, b.M12, b.M21, b.M22);
  CHECK((re.to_dense() - full).cwiseAbs().maxCoeff() == 0.0);
  const SparseMatrix ra = block_matrix(b.A11, b.A12, b.A21, b.A22);
  CHECK((ra.to_dense() - bulk.stiffness.to_dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate partitions") {
  const Mesh m = generate_crisscross_square(2);
  const auto bulk = assemble_bulk(m, 1.0, 0.0);
  const auto b = partition_blocks(bulk.mass, bulk.stiffness, 0);
  CHECK(b.n2 == 0);
  CHECK((b.M11.to_dense() - bulk.mass.to_dense()).norm() == 0.0);
  CHECK(b.M12.nnz() == 0);
  CHECK(b.M22.nnz() == 0);
  CHECK_THROWS_AS(partition_blocks(bulk.mass, bulk.stiffness, m.n_omega), ArgumentError);
}
