#include "dynbc/assembly.hpp"

#include <cmath>
#include <string>

#include "dynbc/error.hpp"

namespace dynbc {

Diffusion::Diffusion(double constant) : constant_(constant) {
  if (!(constant > 0.0) || !std::isfinite(constant)) {
    throw ArgumentError("diffusion coefficient must be positive");
  }
}

Diffusion::Diffusion(std::vector<double> per_element)
    : constant_(0.0), per_element_(std::move(per_element)) {
  if (per_element_.empty()) throw ArgumentError("empty per-element diffusion");
  for (double k : per_element_) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw ArgumentError("diffusion coefficient must be positive");
    }
  }
}

double Diffusion::on_element(std::size_t t) const {
  if (per_element_.empty()) return constant_;
  if (t >= per_element_.size()) throw ArgumentError("diffusion has too few element values");
  return per_element_[t];
}

std::array<std::array<double, 3>, 3> element_mass(const Point& a, const Point& b,
                                                  const Point& c) {
  const double area = std::abs(signed_area(a, b, c));
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  }
  return m;
}

std::array<std::array<double, 3>, 3> element_stiffness(const Point& a, const Point& b,
                                                       const Point& c) {
  const double area2 = 2.0 * signed_area(a, b, c);
  if (area2 == 0.0) throw AssemblyError("degenerate element");
  // grad phi_i = rot90(opposite edge) / (2 * area)
  const std::array<Point, 3> p{a, b, c};
  std::array<std::array<double, 2>, 3> g{};
  for (int i = 0; i < 3; ++i) {
    const Point& q = p[(i + 1) % 3];
    const Point& r = p[(i + 2) % 3];
    g[i] = {(q.y - r.y) / area2, (r.x - q.x) / area2};
  }
  const double area = std::abs(area2) / 2.0;
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
  }
  return k;
}

BulkMatrices assemble_bulk(const Mesh& mesh, const Diffusion& kappa, double alpha_omega) {
  if (alpha_omega < 0.0) throw ArgumentError("alpha_Omega must be nonnegative");
  const std::size_t n = mesh.n_omega;
  std::vector<Triplet> mass;
  std::vector<Triplet> stiff;
  mass.reserve(9 * mesh.triangles.size());
  stiff.reserve(9 * mesh.triangles.size());
  const double h = mesh.metrics.h;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& a = mesh.nodes[tri[0]];
    const Point& b = mesh.nodes[tri[1]];
    const Point& c = mesh.nodes[tri[2]];
    if (std::abs(signed_area(a, b, c)) <= 1e-14 * h * h) {
      throw AssemblyError("degenerate element " + std::to_string(t + 1));
    }
    const auto me = element_mass(a, b, c);
    const auto ke = element_stiffness(a, b, c);
    const double k = kappa.on_element(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        mass.push_back({tri[i], tri[j], me[i][j]});
        stiff.push_back({tri[i], tri[j], k * ke[i][j] + alpha_omega * me[i][j]});
      }
    }
  }
  BulkMatrices out{SparseMatrix::from_triplets(n, n, std::move(mass)),
                   SparseMatrix::from_triplets(n, n, std::move(stiff))};
  out.mass.mark_symmetric(true);
  out.stiffness.mark_symmetric(true);
  return out;
}

SurfaceMatrices assemble_surface(const Mesh& mesh, double beta, double alpha_gamma) {
  if (beta < 0.0 || alpha_gamma < 0.0) {
    throw ArgumentError("beta and alpha_Gamma must be nonnegative");
  }
  const std::size_t n = mesh.n_gamma;
  const std::size_t offset = mesh.first_boundary();
  std::vector<Triplet> mass;
  std::vector<Triplet> laplace;
  for (const auto& e : mesh.boundary_edges) {
    const Point& a = mesh.nodes[e[0]];
    const Point& b = mesh.nodes[e[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) {
      throw AssemblyError("zero-length boundary edge (" + std::to_string(e[0] + 1) + "," +
                          std::to_string(e[1] + 1) + ")");
    }
    const std::array<std::size_t, 2> idx{e[0] - offset, e[1] - offset};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double m = len / 6.0 * (i == j ? 2.0 : 1.0);
        const double k = (i == j ? 1.0 : -1.0) / len;
        mass.push_back({idx[i], idx[j], m});
        laplace.push_back({idx[i], idx[j], k});
      }
    }
  }
  SurfaceMatrices out;
  out.mass = SparseMatrix::from_triplets(n, n, std::move(mass));
  out.stiffness = linear_combination(beta, SparseMatrix::from_triplets(n, n, std::move(laplace)),
                                     alpha_gamma, out.mass);
  out.mass.mark_symmetric(true);
  out.stiffness.mark_symmetric(true);
  out.global_index.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.global_index[k] = offset + k;
  return out;
}

BlockSystem partition_blocks(const SparseMatrix& M_omega, const SparseMatrix& A_omega,
                             std::size_t n_gamma) {
  const std::size_t n = M_omega.rows();
  if (M_omega.cols() != n || A_omega.rows() != n || A_omega.cols() != n) {
    throw ArgumentError("bulk matrices must be square and of equal size");
  }
  if (n_gamma >= n && n > 0) throw ArgumentError("n_gamma must be smaller than the dimension");
  BlockSystem b;
  b.n1 = n - n_gamma;
  b.n2 = n_gamma;
  b.M11 = M_omega.block(0, b.n1, 0, b.n1);
  b.M12 = M_omega.block(0, b.n1, b.n1, b.n2);
  b.M21 = M_omega.block(b.n1, b.n2, 0, b.n1);
  b.M22 = M_omega.block(b.n1, b.n2, b.n1, b.n2);
  b.A11 = A_omega.block(0, b.n1, 0, b.n1);
  b.A12 = A_omega.block(0, b.n1, b.n1, b.n2);
  b.A21 = A_omega.block(b.n1, b.n2, 0, b.n1);
  b.A22 = A_omega.block(b.n1, b.n2, b.n1, b.n2);
  return b;
}

BlockSystem assemble_blocks(const Mesh& mesh, const Diffusion& kappa, double alpha_omega,
                            double beta, double alpha_gamma) {
  const auto bulk = assemble_bulk(mesh, kappa, alpha_omega);
  auto surf = assemble_surface(mesh, beta, alpha_gamma);
  BlockSystem b = partition_blocks(bulk.mass, bulk.stiffness, mesh.n_gamma);
  b.M_gamma = std::move(surf.mass);
  b.A_gamma = std::move(surf.stiffness);
  return b;
}

}  // namespace dynbc
