#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/linalg/field.hpp"

namespace rootpeel::linalg {

/// Dense row-major matrix over an exact field.
template <class F>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, F(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = F(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  F& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const F& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const F& v) { return v == F(0); });
  }

  Matrix column(std::size_t j) const {
    Matrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  Matrix columns(const std::vector<std::size_t>& which) const {
    Matrix c(rows_, which.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < which.size(); ++k) c(i, k) = (*this)(i, which[k]);
    return c;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shapes do not compose");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const F& aik = a(i, k);
        if (aik == F(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }

  friend Matrix operator-(Matrix a, const Matrix& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

  friend Matrix operator*(const F& s, Matrix a) {
    for (auto& v : a.data_) v *= s;
    return a;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same(const Matrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw std::invalid_argument("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<F> data_;
};

// Reduced row echelon form in place; returns pivot columns.
template <class F>
std::vector<std::size_t> rref_in_place(Matrix<F>& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t p = row;
    while (p < m.rows() && m(p, col) == F(0)) ++p;
    if (p == m.rows()) continue;
    if (p != row)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(row, j));
    const F inv = F(1) / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == F(0)) continue;
      const F factor = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= factor * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class F>
std::size_t rank(Matrix<F> m) {
  return rref_in_place(m).size();
}

// Columns form a basis of {v : m v = 0}.
template <class F>
Matrix<F> nullspace(Matrix<F> m) {
  const auto pivots = rref_in_place(m);
  std::vector<char> is_pivot(m.cols(), 0);
  for (std::size_t p : pivots) is_pivot[p] = 1;
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  Matrix<F> basis(m.cols(), free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    basis(free[k], k) = F(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) basis(pivots[i], k) = -m(i, free[k]);
  }
  return basis;
}

// A maximal independent subset of the columns of m, in order.
template <class F>
Matrix<F> column_basis(const Matrix<F>& m) {
  Matrix<F> work = m;
  return m.columns(rref_in_place(work));
}

// X with u * X == c, for u of full column rank; throws if c leaves the span.
template <class F>
Matrix<F> solve_in_span(const Matrix<F>& u, const Matrix<F>& c) {
  if (u.rows() != c.rows()) throw std::invalid_argument("solve: row counts differ");
  Matrix<F> aug(u.rows(), u.cols() + c.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) aug(i, j) = u(i, j);
    for (std::size_t j = 0; j < c.cols(); ++j) aug(i, u.cols() + j) = c(i, j);
  }
  const auto pivots = rref_in_place(aug);
  if (!pivots.empty() && pivots.back() >= u.cols())
    throw ConsistencyError("solve: image leaves the column span");
  if (pivots.size() != u.cols()) throw ConsistencyError("solve: basis is not independent");
  Matrix<F> x(u.cols(), c.cols());
  for (std::size_t i = 0; i < u.cols(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) x(i, j) = aug(i, u.cols() + j);
  return x;
}

template <class F>
F trace(const Matrix<F>& m) {
  F t(0);
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

}  // namespace rootpeel::linalg
