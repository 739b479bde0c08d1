// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable tensor operations. Each op computes its forward value
// through the shared kernels and registers a closure that pushes
// gradients into its inputs. Broadcasting is deliberately limited to
// the scalar and bias-row cases the network needs.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfn/kernels.hpp"
#include "hfn/tensor.hpp"

namespace hfn {

namespace detail {

inline void require_rank2(const std::vector<int>& shape, const char* what) {
  if (shape.size() != 2) {
    throw std::invalid_argument(std::string(what) + ": expected a rank-2 tensor, got " +
                                shape_string(shape));
  }
}

}  // namespace detail

// c[m,p] = a[m,k] * b[k,p]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_rank2(a.shape(), "matmul");
  detail::require_rank2(b.shape(), "matmul");
  const int m = a.shape()[0], k = a.shape()[1], p = b.shape()[1];
  if (b.shape()[0] != k) {
    throw std::invalid_argument("matmul: inner dimensions disagree, " + shape_string(a.shape()) +
                                " vs " + shape_string(b.shape()));
  }
  std::vector<T> out(static_cast<std::size_t>(m) * p);
  kernels::matmul_nn(a.values().data(), b.values().data(), out.data(), m, k, p);
  auto backward = [a, b, m, k, p](const std::vector<T>& dy) mutable {
    if (a.requires_grad()) {
      std::vector<T> da(static_cast<std::size_t>(m) * k);
      kernels::matmul_nt(dy.data(), b.values().data(), da.data(), m, p, k);
      a.accumulate_grad(da);
    }
    if (b.requires_grad()) {
      std::vector<T> db(static_cast<std::size_t>(k) * p);
      kernels::matmul_tn(a.values().data(), dy.data(), db.data(), k, m, p);
      b.accumulate_grad(db);
    }
  };
  return Tensor<T>::make_op({m, p}, std::move(out), {a, b}, std::move(backward));
}

// y[B,dout] = x[B,din] * w[dout,din]^T + bias row
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  detail::require_rank2(x.shape(), "linear");
  detail::require_rank2(w.shape(), "linear");
  const int batch = x.shape()[0], din = x.shape()[1], dout = w.shape()[0];
  if (w.shape()[1] != din) {
    throw std::invalid_argument("linear: input width " + std::to_string(din) +
                                " does not match weight " + shape_string(w.shape()));
  }
  if (bias.numel() != dout) {
    throw std::invalid_argument("linear: bias length " + std::to_string(bias.numel()) +
                                " does not match output width " + std::to_string(dout));
  }
  std::vector<T> out(static_cast<std::size_t>(batch) * dout);
  kernels::matmul_nt(x.values().data(), w.values().data(), out.data(), batch, din, dout);
  const T* bv = bias.values().data();
  for (int i = 0; i < batch; ++i) {
    T* row = out.data() + static_cast<std::size_t>(i) * dout;
    for (int j = 0; j < dout; ++j) row[j] += bv[j];
  }
  auto backward = [x, w, bias, batch, din, dout](const std::vector<T>& dy) mutable {
    if (x.requires_grad()) {
      std::vector<T> dx(static_cast<std::size_t>(batch) * din);
      kernels::matmul_nn(dy.data(), w.values().data(), dx.data(), batch, dout, din);
      x.accumulate_grad(dx);
    }
    if (w.requires_grad()) {
      std::vector<T> dw(static_cast<std::size_t>(dout) * din);
      kernels::matmul_tn(dy.data(), x.values().data(), dw.data(), dout, batch, din);
      w.accumulate_grad(dw);
    }
    if (bias.requires_grad()) {
      std::vector<T> db(dout, T(0));
      for (int i = 0; i < batch; ++i) {
        const T* row = dy.data() + static_cast<std::size_t>(i) * dout;
        for (int j = 0; j < dout; ++j) db[j] += row[j];
      }
      bias.accumulate_grad(db);
    }
  };
  return Tensor<T>::make_op({batch, dout}, std::move(out), {x, w, bias}, std::move(backward));
}

namespace detail {

template <typename T>
Tensor<T> add_like(const Tensor<T>& a, const Tensor<T>& b, T sign) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("add/sub: shape mismatch " + shape_string(a.shape()) + " vs " +
                                shape_string(b.shape()));
  }
  std::vector<T> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + sign * b.values()[i];
  auto backward = [a, b, sign](const std::vector<T>& dy) mutable {
    if (a.requires_grad()) a.accumulate_grad(dy);
    if (b.requires_grad()) {
      if (sign == T(1)) {
        b.accumulate_grad(dy);
      } else {
        std::vector<T> neg(dy.size());
        for (std::size_t i = 0; i < dy.size(); ++i) neg[i] = -dy[i];
        b.accumulate_grad(neg);
      }
    }
  };
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b}, std::move(backward));
}

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::add_like(a, b, T(1));
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::add_like(a, b, T(-1));
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.values()[i];
  auto backward = [x, factor](const std::vector<T>& dy) mutable {
    if (!x.requires_grad()) return;
    std::vector<T> dx(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = factor * dy[i];
    x.accumulate_grad(dx);
  };
  return Tensor<T>::make_op(x.shape(), std::move(out), {x}, std::move(backward));
}

// Gradient passes where the input is strictly positive; zero at 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.values().size());
  const auto& xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  auto backward = [x](const std::vector<T>& dy) mutable {
    if (!x.requires_grad()) return;
    std::vector<T> dx(dy.size());
    const auto& xv = x.values();
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = xv[i] > T(0) ? dy[i] : T(0);
    x.accumulate_grad(dx);
  };
  return Tensor<T>::make_op(x.shape(), std::move(out), {x}, std::move(backward));
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& inputs, int axis) {
  if (inputs.empty()) throw std::invalid_argument("concat: no inputs");
  const auto& first = inputs.front().shape();
  const int rank = static_cast<int>(first.size());
  if (axis < 0 || axis >= rank) {
    throw std::invalid_argument("concat: axis " + std::to_string(axis) + " out of range for rank " +
                                std::to_string(rank));
  }
  std::vector<int> out_shape = first;
  out_shape[axis] = 0;
  for (const auto& t : inputs) {
    const auto& s = t.shape();
    if (static_cast<int>(s.size()) != rank) {
      throw std::invalid_argument("concat: rank mismatch");
    }
    for (int d = 0; d < rank; ++d) {
      if (d != axis && s[d] != first[d]) {
        throw std::invalid_argument("concat: shapes " + shape_string(first) + " and " +
                                    shape_string(s) + " differ off the concat axis");
      }
    }
    out_shape[axis] += s[axis];
  }

  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) outer *= first[d];
  std::int64_t tail = 1;
  for (int d = axis + 1; d < rank; ++d) tail *= first[d];

  std::vector<T> out(static_cast<std::size_t>(shape_numel(out_shape)));
  const std::int64_t out_stride = static_cast<std::int64_t>(out_shape[axis]) * tail;
  std::vector<std::int64_t> offsets(inputs.size());
  {
    std::int64_t off = 0;
    for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
      offsets[idx] = off;
      const std::int64_t block = static_cast<std::int64_t>(inputs[idx].shape()[axis]) * tail;
      for (std::int64_t o = 0; o < outer; ++o) {
        const T* src = inputs[idx].values().data() + o * block;
        T* dst = out.data() + o * out_stride + off;
        for (std::int64_t i = 0; i < block; ++i) dst[i] = src[i];
      }
      off += block;
    }
  }

  auto backward = [inputs, offsets, axis, outer, tail, out_stride](const std::vector<T>& dy) mutable {
    for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
      auto& in = inputs[idx];
      if (!in.requires_grad()) continue;
      const std::int64_t block = static_cast<std::int64_t>(in.shape()[axis]) * tail;
      std::vector<T> dx(in.values().size());
      for (std::int64_t o = 0; o < outer; ++o) {
        const T* src = dy.data() + o * out_stride + offsets[idx];
        T* dst = dx.data() + o * block;
        for (std::int64_t i = 0; i < block; ++i) dst[i] = src[i];
      }
      in.accumulate_grad(dx);
    }
  };
  return Tensor<T>::make_op(std::move(out_shape), std::move(out), inputs, std::move(backward));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, std::vector<int> new_shape) {
  if (shape_numel(new_shape) != x.numel()) {
    throw std::invalid_argument("reshape: cannot view " + shape_string(x.shape()) + " as " +
                                shape_string(new_shape));
  }
  std::vector<T> out = x.values();
  auto backward = [x](const std::vector<T>& dy) mutable {
    if (x.requires_grad()) x.accumulate_grad(dy);
  };
  return Tensor<T>::make_op(std::move(new_shape), std::move(out), {x}, std::move(backward));
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& x) {
  return reshape(x, {static_cast<int>(x.numel())});
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (const T& v : x.values()) acc += v;
  auto backward = [x](const std::vector<T>& dy) mutable {
    if (!x.requires_grad()) return;
    std::vector<T> dx(x.values().size(), dy[0]);
    x.accumulate_grad(dx);
  };
  return Tensor<T>::make_op({1}, {acc}, {x}, std::move(backward));
}

// Differentiable Kronecker product of two rank-2 tensors.
template <typename T>
Tensor<T> kron(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_rank2(a.shape(), "kron");
  detail::require_rank2(b.shape(), "kron");
  const int am = a.shape()[0], an = a.shape()[1];
  const int bm = b.shape()[0], bn = b.shape()[1];
  std::vector<T> out(static_cast<std::size_t>(am) * an * bm * bn);
  kernels::kron(a.values().data(), am, an, b.values().data(), bm, bn, out.data());
  auto backward = [a, b, am, an, bm, bn](const std::vector<T>& dy) mutable {
    if (a.requires_grad()) {
      std::vector<T> da(static_cast<std::size_t>(am) * an, T(0));
      kernels::kron_grad_a(dy.data(), b.values().data(), da.data(), am, an, bm, bn);
      a.accumulate_grad(da);
    }
    if (b.requires_grad()) {
      std::vector<T> db(static_cast<std::size_t>(bm) * bn, T(0));
      kernels::kron_grad_b(dy.data(), a.values().data(), db.data(), am, an, bm, bn);
      b.accumulate_grad(db);
    }
  };
  return Tensor<T>::make_op({am * bm, an * bn}, std::move(out), {a, b}, std::move(backward));
}

}  // namespace hfn
