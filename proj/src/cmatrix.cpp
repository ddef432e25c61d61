#include "bellbox/cmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "bellbox/error.hpp"

namespace bellbox {

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ValidationError("matrix data has the wrong length");
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::outer(const std::vector<Complex>& v) {
  CMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

Complex CMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw ValidationError("matrix shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw ValidationError("matrix shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix shapes do not compose");
  CMatrix m(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex v = a(i, k);
      if (v == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) m(i, j) += v * b(k, j);
    }
  return m;
}

double CMatrix::distance(const CMatrix& o) const {
  if (o.rows_ != rows_ || o.cols_ != cols_) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) d = std::max(d, std::abs(data_[i] - o.data_[i]));
  return d;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return m;
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
  return d;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw ValidationError("eigenvalues need a square matrix");
  const std::size_t N = 2 * n;
  std::vector<double> a(N * N);
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * N + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      // Hermitian part only, so small asymmetries do not bias the result.
      const Complex h = 0.5 * (m(i, j) + std::conj(m(j, i)));
      A(i, j) = h.real();
      A(i + n, j + n) = h.real();
      A(i, j + n) = -h.imag();
      A(i + n, j) = h.imag();
    }

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i + 1; j < N; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> all(N);
  for (std::size_t i = 0; i < N; ++i) all[i] = A(i, i);
  std::sort(all.begin(), all.end());
  // The embedding doubles every eigenvalue; keep one of each pair.
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
  return ev;
}

double trace_product_real(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) throw ValidationError("trace product shapes differ");
  Complex t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  return t.real();
}

} // namespace bellbox
