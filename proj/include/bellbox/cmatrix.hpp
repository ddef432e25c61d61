#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bellbox {

using Complex = std::complex<double>;

/// Small dense complex matrix, row-major.
class CMatrix {
public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data);

  static CMatrix identity(std::size_t n);
  /// |v><v|
  static CMatrix outer(const std::vector<Complex>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<Complex>& data() const { return data_; }

  CMatrix adjoint() const;
  Complex trace() const;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(Complex s);

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);

  /// Largest |entry| of the difference.
  double distance(const CMatrix& o) const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Largest |M - M^dagger| entry.
double hermiticity_defect(const CMatrix& m);

/// Eigenvalues of a Hermitian matrix in ascending order (cyclic Jacobi on the
/// real symmetric embedding [[Re, -Im], [Im, Re]], each eigenvalue reported once).
std::vector<double> hermitian_eigenvalues(const CMatrix& m);

/// Re Tr[a b] without forming the product.
double trace_product_real(const CMatrix& a, const CMatrix& b);

} // namespace bellbox
