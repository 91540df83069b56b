#include "dynbc/linalg.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dynbc/error.hpp"

namespace dynbc {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

bool all_finite(const SparseMatrix& m) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void SolveConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) throw ArgumentError("rel_tol must lie in (0, 1e-6]");
  if (max_iter == 0) throw ArgumentError("max_iter must be positive");
}

SpdSolver::SpdSolver(SparseMatrix matrix, SolveConfig cfg)
    : matrix_(std::move(matrix)), cfg_(cfg) {
  cfg_.validate();
  if (matrix_.rows() != matrix_.cols()) throw ArgumentError("SPD solve needs a square matrix");
  if (!all_finite(matrix_)) throw ArgumentError("matrix has non-finite entries");
  const std::size_t n = matrix_.rows();
  if (n < cfg_.dense_threshold) {
    llt_ = std::make_shared<Eigen::LLT<DenseMatrix>>(matrix_.to_dense());
    if (llt_->info() != Eigen::Success) throw ArgumentError("matrix is not positive definite");
  } else {
    inv_diag_ = matrix_.diagonal_entries();
    for (Eigen::Index i = 0; i < inv_diag_.size(); ++i) {
      if (!(inv_diag_[i] > 0.0)) throw ArgumentError("SPD matrix with nonpositive diagonal");
      inv_diag_[i] = 1.0 / inv_diag_[i];
    }
  }
}

Vector SpdSolver::solve(const Vector& rhs, const Vector* guess) const {
  if (static_cast<std::size_t>(rhs.size()) != dim()) throw ArgumentError("rhs size mismatch");
  if (!all_finite(rhs)) throw ArgumentError("rhs has non-finite entries");
  if (dim() == 0) return Vector();
  if (!llt_) return cg(rhs, guess);

  last_iterations_ = 0;
  Vector x = llt_->solve(rhs);
  const double target = cfg_.rel_tol * rhs.norm();
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Vector r = rhs - matrix_ * x;
    if (r.norm() <= target) break;
    x += llt_->solve(r);
    ++last_iterations_;
  }
  return x;
}

Vector SpdSolver::cg(const Vector& rhs, const Vector* guess) const {
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    last_iterations_ = 0;
    return Vector::Zero(rhs.size());
  }
  const double target = cfg_.rel_tol * bnorm;
  Vector x = guess != nullptr && guess->size() == rhs.size() ? *guess : Vector::Zero(rhs.size());
  Vector r = rhs - matrix_ * x;
  Vector z = inv_diag_.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  double rnorm = r.norm();
  std::size_t it = 0;
  while (rnorm > target) {
    if (it == cfg_.max_iter) {
      last_iterations_ = it;
      throw NonConvergenceError("conjugate gradients did not converge", it, rnorm / bnorm);
    }
    const Vector q = matrix_ * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw ArgumentError("matrix is not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    ++it;
    // recompute the true residual now and then to avoid drift below rel_tol
    if (it % 50 == 0) r = rhs - matrix_ * x;
    rnorm = r.norm();
    z = inv_diag_.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  last_iterations_ = it;
  return x;
}

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs, const SolveConfig& cfg) {
  return SpdSolver(matrix, cfg).solve(rhs);
}

GeneralSolver::GeneralSolver(const SparseMatrix& matrix, std::size_t dense_threshold)
    : dim_(matrix.rows()) {
  if (matrix.rows() != matrix.cols()) throw ArgumentError("square matrix required");
  if (!all_finite(matrix)) throw ArgumentError("matrix has non-finite entries");
  if (dim_ < dense_threshold) {
    dense_ = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(matrix.to_dense());
    if (dim_ > 0 && dense_->rcond() < 1e-15) throw Error("singular Jacobian");
  } else {
    sparse_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    sparse_->compute(matrix.to_eigen());
    if (sparse_->info() != Eigen::Success) throw Error("singular Jacobian");
  }
}

Vector GeneralSolver::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != dim_) throw ArgumentError("rhs size mismatch");
  if (dim_ == 0) return Vector();
  Vector x = dense_ ? Vector(dense_->solve(rhs)) : Vector(sparse_->solve(rhs));
  if (!all_finite(x)) throw Error("linear solve produced non-finite values");
  return x;
}

double gen_eig_max(const SparseMatrix& A, const SparseMatrix& B, const EigConfig& cfg) {
  const std::size_t n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n) {
    throw ArgumentError("pencil matrices must be square and of equal size");
  }
  if (n == 0) throw ArgumentError("empty pencil");
  const SpdSolver b_solver(B, SolveConfig{1e-13, 20000, 200});

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  const auto random_start = [&] {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uni(rng) * ((i % 2 == 0) ? 1.0 : -0.7);
    return v;
  };

  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector v = random_start();
    v /= std::sqrt(B.energy(v));
    double lambda = A.energy(v);
    bool breakdown = false;
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
      const Vector w = b_solver.solve(A * v);
      const double wb = std::sqrt(std::max(B.energy(w), 0.0));
      if (!(wb > 0.0) || !std::isfinite(wb)) {
        breakdown = true;
        break;
      }
      // residual of the current Ritz pair in the B-norm: B^{-1}A v - lambda v
      const Vector r = w - lambda * v;
      const double res = std::sqrt(std::max(B.energy(r), 0.0));
      v = w / wb;
      const double next = A.energy(v);
      const double change = std::abs(next - lambda);
      lambda = next;
      if (change <= cfg.tol * std::abs(lambda) && res <= std::sqrt(cfg.tol) * std::abs(lambda)) {
        return lambda;
      }
    }
    if (!breakdown) {
      throw NonConvergenceError("power iteration did not converge", cfg.max_iter, lambda);
    }
  }
  throw Error("power iteration broke down repeatedly (A v = 0 for every start)");
}

double estimate_cM(const Mesh& mesh, const BlockSystem& blocks, const EigConfig& cfg) {
  const double hg = mesh.metrics.h_gamma;
  if (!(hg > 0.0)) throw ArgumentError("mesh metrics are not set");
  return gen_eig_max(blocks.M22, blocks.M_gamma.scaled(hg), cfg);
}

double estimate_cinv(const Mesh& mesh, const BlockSystem& blocks, const EigConfig& cfg) {
  const double h = mesh.metrics.h;
  if (!(h > 0.0)) throw ArgumentError("mesh metrics are not set");
  return h * h * gen_eig_max(blocks.A22, blocks.M22, cfg);
}

std::string CflReport::csv_header() { return "h,h_gamma,c_M,c_inv,tau,tau_max,satisfied"; }

std::string CflReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << h << ',' << h_gamma << ',' << c_M << ',' << c_inv << ',' << tau << ',' << tau_max << ','
     << (satisfied ? 1 : 0);
  return os.str();
}

CflReport check_cfl(double tau, double h, double c_M, double c_inv, double h_gamma) {
  if (!(tau > 0.0 && h > 0.0 && c_M > 0.0 && c_inv > 0.0)) {
    throw ArgumentError("CFL check needs positive inputs");
  }
  CflReport r;
  r.h = h;
  r.h_gamma = h_gamma > 0.0 ? h_gamma : h;
  r.c_M = c_M;
  r.c_inv = c_inv;
  r.tau = tau;
  r.tau_max = 3.0 * h / (7.0 * c_inv * c_M);
  // compared against tau_max so that tau == tau_max is rejected exactly
  r.satisfied = tau < r.tau_max;
  return r;
}

}  // namespace dynbc
