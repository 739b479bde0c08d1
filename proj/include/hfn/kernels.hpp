// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense kernels behind the tensor ops. Every kernel comes in two
// flavors: a plain serial reference under kernels::serial and an
// OpenMP-parallel version under kernels::. The parallel loops only
// split work across independent output elements and keep the per-element
// accumulation order of the serial code, so both flavors produce
// bitwise-identical results for any thread count. kernel_bench compares
// their throughput.

#pragma once

#include <cstdint>
#include <vector>

namespace hfn::kernels {

// Work-size threshold below which the parallel versions stay serial.
inline constexpr std::int64_t kParallelGrain = 1 << 15;

namespace serial {

// dst[c x r] = src[r x c]^T.
template <typename T>
void transpose(const T* src, std::int64_t rows, std::int64_t cols, T* dst) {
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
  }
}

// c[m x p] = a[m x k] * b[k x p], row-major, c overwritten.
template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
  for (std::int64_t i = 0; i < m; ++i) {
    T* crow = c + i * p;
    for (std::int64_t j = 0; j < p; ++j) crow[j] = T(0);
    for (std::int64_t t = 0; t < k; ++t) {
      const T av = a[i * k + t];
      const T* brow = b + t * p;
      for (std::int64_t j = 0; j < p; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x p] = a[m x k] * b[p x k]^T  (b stored row-major with p rows).
// Routed through a transpose into matmul_nn; per-element summand order
// (ascending t) is unchanged.
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
  std::vector<T> bt(static_cast<std::size_t>(k) * p);
  transpose(b, p, k, bt.data());
  matmul_nn(a, bt.data(), c, m, k, p);
}

// c[m x p] = a[k x m]^T * b[k x p].
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
  std::vector<T> at(static_cast<std::size_t>(m) * k);
  transpose(a, k, m, at.data());
  matmul_nn(at.data(), b, c, m, k, p);
}

// out[(am*bm) x (an*bn)] = a ⊗ b: block (i,j) is a[i,j] * b.
template <typename T>
void kron(const T* a, std::int64_t am, std::int64_t an, const T* b, std::int64_t bm,
          std::int64_t bn, T* out) {
  const std::int64_t on = an * bn;
  for (std::int64_t r = 0; r < am * bm; ++r) {
    const std::int64_t i = r / bm;
    const std::int64_t u = r % bm;
    const T* arow = a + i * an;
    const T* brow = b + u * bn;
    T* orow = out + r * on;
    for (std::int64_t j = 0; j < an; ++j) {
      const T av = arow[j];
      for (std::int64_t v = 0; v < bn; ++v) orow[j * bn + v] = av * brow[v];
    }
  }
}

// da[i,j] += sum_{u,v} dout[i*bm+u, j*bn+v] * b[u,v]   for out = a ⊗ b.
template <typename T>
void kron_grad_a(const T* dout, const T* b, T* da, std::int64_t am, std::int64_t an,
                 std::int64_t bm, std::int64_t bn) {
  const std::int64_t on = an * bn;
  for (std::int64_t i = 0; i < am; ++i) {
    for (std::int64_t j = 0; j < an; ++j) {
      T acc = T(0);
      for (std::int64_t u = 0; u < bm; ++u) {
        const T* drow = dout + (i * bm + u) * on + j * bn;
        const T* brow = b + u * bn;
        for (std::int64_t v = 0; v < bn; ++v) acc += drow[v] * brow[v];
      }
      da[i * an + j] += acc;
    }
  }
}

// db[u,v] += sum_{i,j} dout[i*bm+u, j*bn+v] * a[i,j]   for out = a ⊗ b.
template <typename T>
void kron_grad_b(const T* dout, const T* a, T* db, std::int64_t am, std::int64_t an,
                 std::int64_t bm, std::int64_t bn) {
  const std::int64_t on = an * bn;
  for (std::int64_t u = 0; u < bm; ++u) {
    for (std::int64_t v = 0; v < bn; ++v) {
      T acc = T(0);
      for (std::int64_t i = 0; i < am; ++i) {
        const T* drow = dout + (i * bm + u) * on + v;
        const T* arow = a + i * an;
        for (std::int64_t j = 0; j < an; ++j) acc += drow[j * bn] * arow[j];
      }
      db[u * bn + v] += acc;
    }
  }
}

}  // namespace serial

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
#pragma omp parallel for if (m * k * p > kParallelGrain) schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    T* crow = c + i * p;
    for (std::int64_t j = 0; j < p; ++j) crow[j] = T(0);
    for (std::int64_t t = 0; t < k; ++t) {
      const T av = a[i * k + t];
      const T* brow = b + t * p;
      for (std::int64_t j = 0; j < p; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void transpose(const T* src, std::int64_t rows, std::int64_t cols, T* dst) {
#pragma omp parallel for if (rows * cols > kParallelGrain) schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
  }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
  std::vector<T> bt(static_cast<std::size_t>(k) * p);
  transpose(b, p, k, bt.data());
  matmul_nn(a, bt.data(), c, m, k, p);
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t p) {
  std::vector<T> at(static_cast<std::size_t>(m) * k);
  transpose(a, k, m, at.data());
  matmul_nn(at.data(), b, c, m, k, p);
}

template <typename T>
void kron(const T* a, std::int64_t am, std::int64_t an, const T* b, std::int64_t bm,
          std::int64_t bn, T* out) {
  const std::int64_t on = an * bn;
#pragma omp parallel for if (am * bm * on > kParallelGrain) schedule(static)
  for (std::int64_t r = 0; r < am * bm; ++r) {
    const std::int64_t i = r / bm;
    const std::int64_t u = r % bm;
    const T* arow = a + i * an;
    const T* brow = b + u * bn;
    T* orow = out + r * on;
    for (std::int64_t j = 0; j < an; ++j) {
      const T av = arow[j];
      for (std::int64_t v = 0; v < bn; ++v) orow[j * bn + v] = av * brow[v];
    }
  }
}

template <typename T>
void kron_grad_a(const T* dout, const T* b, T* da, std::int64_t am, std::int64_t an,
                 std::int64_t bm, std::int64_t bn) {
  const std::int64_t on = an * bn;
#pragma omp parallel for collapse(2) if (am * an * bm * bn > kParallelGrain) schedule(static)
  for (std::int64_t i = 0; i < am; ++i) {
    for (std::int64_t j = 0; j < an; ++j) {
      T acc = T(0);
      for (std::int64_t u = 0; u < bm; ++u) {
        const T* drow = dout + (i * bm + u) * on + j * bn;
        const T* brow = b + u * bn;
        for (std::int64_t v = 0; v < bn; ++v) acc += drow[v] * brow[v];
      }
      da[i * an + j] += acc;
    }
  }
}

template <typename T>
void kron_grad_b(const T* dout, const T* a, T* db, std::int64_t am, std::int64_t an,
                 std::int64_t bm, std::int64_t bn) {
  const std::int64_t on = an * bn;
#pragma omp parallel for collapse(2) if (am * an * bm * bn > kParallelGrain) schedule(static)
  for (std::int64_t u = 0; u < bm; ++u) {
    for (std::int64_t v = 0; v < bn; ++v) {
      T acc = T(0);
      for (std::int64_t i = 0; i < am; ++i) {
        const T* drow = dout + (i * bm + u) * on + v;
        const T* arow = a + i * an;
        for (std::int64_t j = 0; j < an; ++j) acc += drow[j * bn] * arow[j];
      }
      db[u * bn + v] += acc;
    }
  }
}

}  // namespace hfn::kernels
