#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace randcert::quantum {

using cplx = std::complex<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  cplx operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  static Matrix identity(std::size_t n);

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator*(cplx s) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> data_;
};

using Vector = std::vector<cplx>;

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);
Matrix adjoint(const Matrix& m);
cplx trace(const Matrix& m);
Vector matvec(const Matrix& m, const Vector& v);
Matrix outer(const Vector& ket, const Vector& bra);
Matrix density(const Vector& ket);
double max_abs_diff(const Matrix& a, const Matrix& b);

Matrix pauli_x();
Matrix pauli_z();
// Projectors onto the +1 and -1 eigenspaces of a dichotomic observable, in that order.
std::vector<Matrix> eigenprojectors(const Matrix& observable);

Vector phi_plus();
Vector psi_plus();

}  // namespace randcert::quantum
