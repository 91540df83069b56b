#ifndef DYNBC_LINALG_HPP
#define DYNBC_LINALG_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "dynbc/assembly.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

namespace dynbc {

struct SolveConfig {
  double rel_tol = 1e-12;
  std::size_t max_iter = 20000;
  std::size_t dense_threshold = 200;

  void validate() const;
};

/// Solver for one fixed SPD matrix, reused across right-hand sides.
///
/// Below `dense_threshold` the matrix is factorized densely (Cholesky, plus
/// one refinement sweep if the residual contract is missed); otherwise
/// Jacobi-preconditioned conjugate gradients are used.
class SpdSolver {
public:
  SpdSolver() = default;
  SpdSolver(SparseMatrix matrix, SolveConfig cfg = {});

  /// Returns x with ||A x - b|| <= rel_tol ||b||. `guess` seeds CG.
  Vector solve(const Vector& rhs, const Vector* guess = nullptr) const;

  std::size_t dim() const noexcept { return matrix_.rows(); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  bool dense() const noexcept { return static_cast<bool>(llt_); }
  std::size_t last_iterations() const noexcept { return last_iterations_; }

private:
  Vector cg(const Vector& rhs, const Vector* guess) const;

  SparseMatrix matrix_;
  SolveConfig cfg_;
  Vector inv_diag_;
  std::shared_ptr<Eigen::LLT<DenseMatrix>> llt_;
  mutable std::size_t last_iterations_ = 0;
};

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs, const SolveConfig& cfg = {});

/// LU solver for possibly unsymmetric systems (Newton Jacobians): dense
/// partial pivoting below the threshold, sparse LU above.
class GeneralSolver {
public:
  GeneralSolver(const SparseMatrix& matrix, std::size_t dense_threshold = 200);
  Vector solve(const Vector& rhs) const;

private:
  std::shared_ptr<Eigen::PartialPivLU<DenseMatrix>> dense_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> sparse_;
  std::size_t dim_ = 0;
};

struct EigConfig {
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  std::uint64_t seed = 12345;
};

/// Largest lambda with A v = lambda B v by power iteration on B^{-1} A.
/// B must be SPD and A symmetric positive semidefinite.
double gen_eig_max(const SparseMatrix& A, const SparseMatrix& B, const EigConfig& cfg = {});

/// Sharp constant c_M in ||v||^2_{M22} <= c_M h_Gamma ||v||^2_{M_Gamma}.
double estimate_cM(const Mesh& mesh, const BlockSystem& blocks, const EigConfig& cfg = {});

/// Inverse-estimate constant c_inv = h^2 lambda_max(A22, M22); the blocks
/// must come from an assembly with alpha_Omega = 0.
double estimate_cinv(const Mesh& mesh, const BlockSystem& blocks, const EigConfig& cfg = {});

struct CflReport {
  double h = 0.0;
  double h_gamma = 0.0;
  double c_M = 0.0;
  double c_inv = 0.0;
  double tau = 0.0;
  double tau_max = 0.0;
  bool satisfied = false;

  double c_A() const noexcept { return c_M * c_inv; }
  double c_alpha_M(double alpha_omega) const noexcept { return c_M * alpha_omega; }

  static std::string csv_header();
  std::string csv_row() const;
};

/// Weak CFL check 7 c_inv c_M tau < 3 h.
CflReport check_cfl(double tau, double h, double c_M, double c_inv, double h_gamma = 0.0);

}  // namespace dynbc

#endif
