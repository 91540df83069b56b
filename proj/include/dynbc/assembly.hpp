#ifndef DYNBC_ASSEMBLY_HPP
#define DYNBC_ASSEMBLY_HPP

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

namespace dynbc {

/// Bulk diffusion coefficient: one constant, or one value per triangle.
class Diffusion {
public:
  Diffusion(double constant = 1.0);  // NOLINT(google-explicit-constructor)
  explicit Diffusion(std::vector<double> per_element);

  double on_element(std::size_t t) const;
  bool is_constant() const noexcept { return per_element_.empty(); }

private:
  double constant_;
  std::vector<double> per_element_;
};

struct BulkMatrices {
  SparseMatrix mass;       // M_Omega
  SparseMatrix stiffness;  // A_Omega = kappa-weighted Laplacian + alpha_Omega * M_Omega
};

struct SurfaceMatrices {
  SparseMatrix mass;       // M_Gamma, boundary-local indexing
  SparseMatrix stiffness;  // A_Gamma = beta * surface Laplacian + alpha_Gamma * M_Gamma
  std::vector<std::size_t> global_index;  // boundary-local -> mesh node
};

/// Interior/boundary partition of the bulk matrices together with the
/// surface matrices. Index 1 is the interior block (n1 = N_Omega - N_Gamma),
/// index 2 the boundary block (n2 = N_Gamma).
struct BlockSystem {
  SparseMatrix M11, M12, M21, M22;
  SparseMatrix A11, A12, A21, A22;
  SparseMatrix M_gamma, A_gamma;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Exact P1 element matrices on an affine triangle.
std::array<std::array<double, 3>, 3> element_mass(const Point& a, const Point& b, const Point& c);
std::array<std::array<double, 3>, 3> element_stiffness(const Point& a, const Point& b,
                                                       const Point& c);

BulkMatrices assemble_bulk(const Mesh& mesh, const Diffusion& kappa, double alpha_omega);
SurfaceMatrices assemble_surface(const Mesh& mesh, double beta, double alpha_gamma);

BlockSystem partition_blocks(const SparseMatrix& M_omega, const SparseMatrix& A_omega,
                             std::size_t n_gamma);

/// Assembles everything for one mesh and coefficient set.
BlockSystem assemble_blocks(const Mesh& mesh, const Diffusion& kappa, double alpha_omega,
                            double beta, double alpha_gamma);

}  // namespace dynbc

#endif
