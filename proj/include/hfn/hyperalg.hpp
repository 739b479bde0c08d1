// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hypercomplex arithmetic: quaternion Hamilton product, Kronecker
// products, and the fixed sign/permutation matrices of the supported
// algebras. Everything here is 64-bit and value-semantic; safe to call
// from any thread.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace hfn::hyperalg {

// A hypercomplex number: h = h_0 + h_1 i_1 + ... + h_{n-1} i_{n-1}.
// Coefficient 0 is the real part; ordering matches the rows of the
// quaternion multiplication matrix (real, i_1, i_2, i_3).
struct HypercomplexNumber {
  std::vector<double> coefficients;

  HypercomplexNumber() = default;
  explicit HypercomplexNumber(std::vector<double> coeffs) : coefficients(std::move(coeffs)) {}
  HypercomplexNumber(std::initializer_list<double> coeffs) : coefficients(coeffs) {}

  int n() const { return static_cast<int>(coefficients.size()); }
  double norm() const;

  HypercomplexNumber operator+(const HypercomplexNumber& other) const;
};

// Dense real matrix, row-major.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::vector<double> e);

  double& at(int r, int c) { return entries[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return entries[static_cast<std::size_t>(r) * cols + c]; }

  std::vector<double> apply(const std::vector<double>& x) const;  // matrix-vector product
  Matrix multiply(const Matrix& other) const;
};

// Quaternion product p * q. Both operands must have n = 4; the product
// is non-commutative.
HypercomplexNumber hamilton_product(const HypercomplexNumber& p, const HypercomplexNumber& q);

// The 4x4 left-multiplication matrix of quaternion q: hamilton_matrix(q)
// applied to r's coefficient vector equals hamilton_product(q, r).
// Row 0 is (q_0, -q_1, -q_2, -q_3).
Matrix hamilton_matrix(const HypercomplexNumber& q);

// Kronecker product: block (i,j) of the result is a[i,j] * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

// The fixed algebra matrices for n in {1, 2, 4}: n matrices such that
// sum_i matrix_i ⊗ W_i reproduces the real-domain multiplication matrix
// of the algebra (identity for n=1, complex rotation pair for n=2, the
// quaternion sign matrices for n=4). Other n have no fixed table; PHM
// layers at those sizes learn their algebra matrices instead.
std::vector<Matrix> algebra_matrices(int n);

}  // namespace hfn::hyperalg
