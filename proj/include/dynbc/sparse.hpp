#ifndef DYNBC_SPARSE_HPP
#define DYNBC_SPARSE_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dynbc {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row sparse matrix.
///
/// Square or rectangular. Column indices inside a row are strictly increasing.
/// `symmetric` records that the matrix was built as (and checked to be)
/// value-symmetric; it is informational and set by the constructors that
/// guarantee it.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Duplicates are summed after sorting by (row, col), so the result does
  /// not depend on the order in which entries were produced.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(const Vector& d);
  static SparseMatrix from_dense(const DenseMatrix& d, double drop_tol = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }
  bool symmetric() const noexcept { return symmetric_; }
  void mark_symmetric(bool flag) noexcept { symmetric_ = flag; }

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return cols_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry lookup by binary search; zero when not stored.
  double coeff(std::size_t i, std::size_t j) const;
  Vector diagonal_entries() const;

  Vector operator*(const Vector& x) const;
  /// y += alpha * A x
  void multiply_add(const Vector& x, Vector& y, double alpha = 1.0) const;

  /// x^T A x
  double energy(const Vector& x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;
  /// Rows [r0, r0+nr) and columns [c0, c0+nc).
  SparseMatrix block(std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) const;
  /// Diagonal scaling from the right: A * diag(d).
  SparseMatrix scale_columns(const Vector& d) const;

  double max_abs() const;
  /// max |a_ij - a_ji|.
  double asymmetry() const;
  bool is_value_symmetric(double rel_tol = 1e-14) const;

  DenseMatrix to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;

  /// Coordinate text dump: header `% dim <n> nnz <k>`, then `i j value` 1-based.
  void write_coordinate(std::ostream& os) const;

  friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);
  friend SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_idx_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// alpha*A + beta*B over the union pattern.
SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta,
                                const SparseMatrix& b);

/// Assemble the 2x2 block matrix [[a, b], [c, d]]. Block dimensions must
/// agree; zero-sized blocks are fine.
SparseMatrix block_matrix(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                          const SparseMatrix& d);

}  // namespace dynbc

#endif
