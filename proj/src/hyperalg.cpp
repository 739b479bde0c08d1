// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/hyperalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hfn/kernels.hpp"

namespace hfn::hyperalg {

double HypercomplexNumber::norm() const {
  double s = 0.0;
  for (double c : coefficients) s += c * c;
  return std::sqrt(s);
}

HypercomplexNumber HypercomplexNumber::operator+(const HypercomplexNumber& other) const {
  if (n() != other.n()) {
    throw std::invalid_argument("hypercomplex addition: dimension mismatch (" +
                                std::to_string(n()) + " vs " + std::to_string(other.n()) + ")");
  }
  HypercomplexNumber out = *this;
  for (int i = 0; i < n(); ++i) out.coefficients[i] += other.coefficients[i];
  return out;
}

Matrix::Matrix(int r, int c, std::vector<double> e) : rows(r), cols(c), entries(std::move(e)) {
  if (entries.size() != static_cast<std::size_t>(r) * c) {
    throw std::invalid_argument("matrix: entry count " + std::to_string(entries.size()) +
                                " does not match " + std::to_string(r) + "x" + std::to_string(c));
  }
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols) {
    throw std::invalid_argument("matrix apply: vector length " + std::to_string(x.size()) +
                                " does not match column count " + std::to_string(cols));
  }
  std::vector<double> y(rows, 0.0);
  kernels::serial::matmul_nn(entries.data(), x.data(), y.data(), rows, cols, 1);
  return y;
}

Matrix Matrix::multiply(const Matrix& other) const {
  if (cols != other.rows) {
    throw std::invalid_argument("matrix multiply: inner dimensions " + std::to_string(cols) +
                                " vs " + std::to_string(other.rows));
  }
  Matrix out(rows, other.cols);
  kernels::matmul_nn(entries.data(), other.entries.data(), out.entries.data(), rows, cols,
                     other.cols);
  return out;
}

namespace {

void require_quaternion(const HypercomplexNumber& q, const char* what) {
  if (q.n() != 4) {
    throw std::invalid_argument(std::string(what) + ": operand has n = " + std::to_string(q.n()) +
                                ", expected 4");
  }
}

}  // namespace

HypercomplexNumber hamilton_product(const HypercomplexNumber& p, const HypercomplexNumber& q) {
  require_quaternion(p, "hamilton_product");
  require_quaternion(q, "hamilton_product");
  const auto& a = p.coefficients;
  const auto& b = q.coefficients;
  return HypercomplexNumber{
      a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
      a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
      a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
      a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
  };
}

Matrix hamilton_matrix(const HypercomplexNumber& q) {
  require_quaternion(q, "hamilton_matrix");
  const double w = q.coefficients[0];
  const double x = q.coefficients[1];
  const double y = q.coefficients[2];
  const double z = q.coefficients[3];
  return Matrix(4, 4,
                {
                    w, -x, -y, -z,  //
                    x, w, -z, y,    //
                    y, z, w, -x,    //
                    z, -y, x, w,    //
                });
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  if (a.rows <= 0 || a.cols <= 0 || b.rows <= 0 || b.cols <= 0) {
    throw std::invalid_argument("kronecker: empty operand");
  }
  Matrix out(a.rows * b.rows, a.cols * b.cols);
  kernels::kron(a.entries.data(), a.rows, a.cols, b.entries.data(), b.rows, b.cols,
                out.entries.data());
  return out;
}

std::vector<Matrix> algebra_matrices(int n) {
  switch (n) {
    case 1:
      return {Matrix(1, 1, {1.0})};
    case 2:
      return {Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}), Matrix(2, 2, {0.0, -1.0, 1.0, 0.0})};
    case 4: {
      // Left-multiplication matrices of the quaternion basis elements.
      std::vector<Matrix> out;
      out.reserve(4);
      for (int i = 0; i < 4; ++i) {
        HypercomplexNumber unit{0.0, 0.0, 0.0, 0.0};
        unit.coefficients[i] = 1.0;
        out.push_back(hamilton_matrix(unit));
      }
      return out;
    }
    default:
      throw std::invalid_argument("algebra_matrices: no fixed algebra for n = " +
                                  std::to_string(n) + " (supported: 1, 2, 4)");
  }
}

}  // namespace hfn::hyperalg
