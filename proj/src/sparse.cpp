#include "dynbc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "dynbc/error.hpp"

namespace dynbc {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) {
      throw ArgumentError("triplet index out of range");
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m(rows, cols);
  m.cols_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      const std::size_t j = entries[k].col;
      double sum = 0.0;
      while (k < entries.size() && entries[k].row == i && entries[k].col == j) {
        sum += entries[k].value;
        ++k;
      }
      m.cols_idx_.push_back(j);
      m.values_.push_back(sum);
    }
    m.offsets_[i + 1] = m.cols_idx_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  return diagonal(Vector::Ones(static_cast<Eigen::Index>(n)));
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  const auto n = static_cast<std::size_t>(d.size());
  SparseMatrix m(n, n);
  m.cols_idx_.resize(n);
  m.values_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.cols_idx_[i] = i;
    m.values_[i] = d[static_cast<Eigen::Index>(i)];
    m.offsets_[i + 1] = i + 1;
  }
  m.symmetric_ = true;
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& d, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (std::abs(d(i, j)) > drop_tol) {
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d(i, j)});
      }
    }
  }
  auto m = from_triplets(static_cast<std::size_t>(d.rows()), static_cast<std::size_t>(d.cols()),
                         std::move(t));
  m.symmetric_ = m.rows_ == m.cols_ && m.is_value_symmetric();
  return m;
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto begin = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto end = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

Vector SparseMatrix::diagonal_entries() const {
  const std::size_t n = std::min(rows_, cols_);
  Vector d(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) d[static_cast<Eigen::Index>(i)] = coeff(i, i);
  return d;
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y = Vector::Zero(static_cast<Eigen::Index>(rows_));
  multiply_add(x, y);
  return y;
}

void SparseMatrix::multiply_add(const Vector& x, Vector& y, double alpha) const {
  if (static_cast<std::size_t>(x.size()) != cols_ || static_cast<std::size_t>(y.size()) != rows_) {
    throw ArgumentError("matrix-vector dimension mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      s += values_[k] * x[static_cast<Eigen::Index>(cols_idx_[k])];
    }
    y[static_cast<Eigen::Index>(i)] += alpha * s;
  }
}

double SparseMatrix::energy(const Vector& x) const { return x.dot((*this) * x); }

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      t.push_back({cols_idx_[k], i, values_[k]});
    }
  }
  auto m = from_triplets(cols_, rows_, std::move(t));
  m.symmetric_ = symmetric_;
  return m;
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix m = *this;
  for (auto& v : m.values_) v *= s;
  return m;
}

SparseMatrix SparseMatrix::block(std::size_t r0, std::size_t nr, std::size_t c0,
                                 std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw ArgumentError("block out of range");
  SparseMatrix m(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    const std::size_t row = r0 + i;
    for (std::size_t k = offsets_[row]; k < offsets_[row + 1]; ++k) {
      const std::size_t j = cols_idx_[k];
      if (j >= c0 && j < c0 + nc) {
        m.cols_idx_.push_back(j - c0);
        m.values_.push_back(values_[k]);
      }
    }
    m.offsets_[i + 1] = m.cols_idx_.size();
  }
  m.symmetric_ = symmetric_ && r0 == c0 && nr == nc;
  return m;
}

SparseMatrix SparseMatrix::scale_columns(const Vector& d) const {
  if (static_cast<std::size_t>(d.size()) != cols_) throw ArgumentError("column scaling size");
  SparseMatrix m = *this;
  for (std::size_t k = 0; k < m.values_.size(); ++k) {
    m.values_[k] *= d[static_cast<Eigen::Index>(m.cols_idx_[k])];
  }
  m.symmetric_ = false;
  return m;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) throw ArgumentError("asymmetry of a rectangular matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - coeff(cols_idx_[k], i)));
    }
  }
  return worst;
}

bool SparseMatrix::is_value_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  return asymmetry() <= rel_tol * max_abs();
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_),
                                    static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols_idx_[k])) = values_[k];
    }
  }
  return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      t.emplace_back(static_cast<int>(i), static_cast<int>(cols_idx_[k]), values_[k]);
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(rows_),
                                static_cast<Eigen::Index>(cols_));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void SparseMatrix::write_coordinate(std::ostream& os) const {
  os << "% dim " << rows_ << " nnz " << nnz() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      os << i + 1 << ' ' << cols_idx_[k] + 1 << ' ' << values_[k] << '\n';
    }
  }
}

SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta,
                                const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("matrix sum dimension mismatch");
  }
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  const auto push = [&t](const SparseMatrix& m, double s) {
    const auto off = m.row_offsets();
    const auto ci = m.col_indices();
    const auto v = m.values();
    for (std::size_t i = 0; i + 1 < off.size(); ++i) {
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) t.push_back({i, ci[k], s * v[k]});
    }
  };
  push(a, alpha);
  push(b, beta);
  auto m = SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
  m.mark_symmetric(a.symmetric() && b.symmetric());
  return m;
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
  return linear_combination(1.0, a, 1.0, b);
}

SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) {
  return linear_combination(1.0, a, -1.0, b);
}

SparseMatrix block_matrix(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                          const SparseMatrix& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() ||
      b.cols() != d.cols()) {
    throw ArgumentError("block matrix dimension mismatch");
  }
  const std::size_t n1 = a.rows();
  const std::size_t m1 = a.cols();
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz() + c.nnz() + d.nnz());
  const auto push = [&t](const SparseMatrix& m, std::size_t r0, std::size_t c0) {
    const auto off = m.row_offsets();
    const auto ci = m.col_indices();
    const auto v = m.values();
    for (std::size_t i = 0; i + 1 < off.size(); ++i) {
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) t.push_back({r0 + i, c0 + ci[k], v[k]});
    }
  };
  push(a, 0, 0);
  push(b, 0, m1);
  push(c, n1, 0);
  push(d, n1, m1);
  return SparseMatrix::from_triplets(n1 + c.rows(), m1 + b.cols(), std::move(t));
}

}  // namespace dynbc
