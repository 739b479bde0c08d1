// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trainable layers: fully-connected, parameterized hypercomplex
// multiplication (PHM), batch normalization, dropout, and the softmax
// cross-entropy loss. A PHM layer stores n algebra matrices A_i of
// shape [n,n] and n filters F_i of shape [d_out/n, d_in/n]; its weight
// is W = sum_i A_i ⊗ F_i, so it keeps n^3 + d_out*d_in/n weight
// parameters instead of the d_out*d_in of a real-valued layer. Both
// the A_i and the F_i receive gradients.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfn/hyperalg.hpp"
#include "hfn/ops.hpp"
#include "hfn/rng.hpp"
#include "hfn/tensor.hpp"

namespace hfn {

namespace detail {

// Fan-based uniform init on ±sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_fill(Tensor<T>& t, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace detail

template <typename T>
struct FcLayer {
  Tensor<T> weight;  // [d_out, d_in]
  Tensor<T> bias;    // [d_out]

  FcLayer(int d_in, int d_out, Rng& rng)
      : weight(Tensor<T>({d_out, d_in})), bias(Tensor<T>({d_out})) {
    detail::glorot_fill(weight, d_in, d_out, rng);
    weight.set_requires_grad(true);
    bias.set_requires_grad(true);
  }

  Tensor<T> forward(const Tensor<T>& x) const { return linear(x, weight, bias); }

  std::int64_t param_count() const { return weight.numel() + bias.numel(); }
};

template <typename T>
struct PhmLayer {
  int n;
  int d_in;
  int d_out;
  std::vector<Tensor<T>> a;  // n learnable algebra matrices [n, n]
  std::vector<Tensor<T>> f;  // n learnable filters [d_out/n, d_in/n]
  Tensor<T> bias;            // [d_out]

  PhmLayer(int n_, int d_in_, int d_out_, Rng& rng) : n(n_), d_in(d_in_), d_out(d_out_) {
    if (n < 1) throw std::invalid_argument("phm: n must be >= 1, got " + std::to_string(n));
    if (d_in % n != 0 || d_out % n != 0) {
      throw std::invalid_argument("phm: dimensions " + std::to_string(d_in) + "x" +
                                  std::to_string(d_out) + " are not divisible by n = " +
                                  std::to_string(n));
    }
    const int fm = d_out / n;
    const int fn = d_in / n;
    // A_i start from the fixed algebra when one exists at this n, so the
    // layer reproduces that algebra's product at step 0; otherwise the
    // entries are drawn uniformly from {-1, 0, 1}.
    const bool fixed = (n == 1 || n == 2 || n == 4);
    std::vector<hyperalg::Matrix> tables;
    if (fixed) tables = hyperalg::algebra_matrices(n);
    for (int i = 0; i < n; ++i) {
      Tensor<T> ai({n, n});
      if (fixed) {
        for (std::size_t j = 0; j < ai.values().size(); ++j) {
          ai.values()[j] = static_cast<T>(tables[i].entries[j]);
        }
      } else {
        for (auto& v : ai.values()) {
          v = static_cast<T>(static_cast<double>(rng.next_below(3)) - 1.0);
        }
      }
      ai.set_requires_grad(true);
      a.push_back(std::move(ai));

      Tensor<T> fi({fm, fn});
      detail::glorot_fill(fi, fn, fm, rng);
      fi.set_requires_grad(true);
      f.push_back(std::move(fi));
    }
    bias = Tensor<T>({d_out});
    bias.set_requires_grad(true);
  }

  // W = sum_i A_i ⊗ F_i as a graph node: gradients flow to every A_i and F_i.
  Tensor<T> weight() const {
    Tensor<T> w = kron(a[0], f[0]);
    for (int i = 1; i < n; ++i) w = add(w, kron(a[i], f[i]));
    return w;
  }

  Tensor<T> forward(const Tensor<T>& x) const { return linear(x, weight(), bias); }

  static std::int64_t weight_param_count(int n, int d_in, int d_out) {
    return static_cast<std::int64_t>(n) * n * n +
           static_cast<std::int64_t>(d_in) * d_out / n;
  }

  std::int64_t param_count() const {
    std::int64_t total = bias.numel();
    for (const auto& t : a) total += t.numel();
    for (const auto& t : f) total += t.numel();
    return total;
  }
};

template <typename T>
struct BatchNorm {
  Tensor<T> gamma;         // [d], learnable scale
  Tensor<T> beta;          // [d], learnable shift
  Tensor<T> running_mean;  // [d], buffer
  Tensor<T> running_var;   // [d], buffer
  double eps = 1e-5;
  double momentum = 0.1;

  explicit BatchNorm(int d)
      : gamma(Tensor<T>::full({d}, T(1))),
        beta(Tensor<T>({d})),
        running_mean(Tensor<T>({d})),
        running_var(Tensor<T>::full({d}, T(1))) {
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
  }

  // Training mode normalizes by the batch statistics (biased variance)
  // and folds the unbiased batch variance into the running stats with
  // `momentum`; evaluation mode normalizes by the running stats.
  Tensor<T> forward(const Tensor<T>& x, bool training) {
    detail::require_rank2(x.shape(), "batchnorm");
    const int batch = x.shape()[0];
    const int d = x.shape()[1];
    if (gamma.numel() != d) {
      throw std::invalid_argument("batchnorm: feature width " + std::to_string(d) +
                                  " does not match layer width " + std::to_string(gamma.numel()));
    }
    const auto& xv = x.values();

    if (!training) {
      std::vector<T> out(xv.size());
      std::vector<T> inv_std(d);
      for (int j = 0; j < d; ++j) {
        inv_std[j] = T(1) / std::sqrt(running_var.values()[j] + static_cast<T>(eps));
      }
      std::vector<T> xhat(xv.size());
      for (int i = 0; i < batch; ++i) {
        for (int j = 0; j < d; ++j) {
          const std::size_t k = static_cast<std::size_t>(i) * d + j;
          xhat[k] = (xv[k] - running_mean.values()[j]) * inv_std[j];
          out[k] = gamma.values()[j] * xhat[k] + beta.values()[j];
        }
      }
      Tensor<T> g = gamma, b = beta, xin = x;
      auto backward = [xin, g, b, xhat, inv_std, batch, d](const std::vector<T>& dy) mutable {
        if (g.requires_grad() || b.requires_grad()) {
          std::vector<T> dgamma(d, T(0)), dbeta(d, T(0));
          for (int i = 0; i < batch; ++i) {
            for (int j = 0; j < d; ++j) {
              const std::size_t k = static_cast<std::size_t>(i) * d + j;
              dgamma[j] += dy[k] * xhat[k];
              dbeta[j] += dy[k];
            }
          }
          if (g.requires_grad()) g.accumulate_grad(dgamma);
          if (b.requires_grad()) b.accumulate_grad(dbeta);
        }
        if (xin.requires_grad()) {
          std::vector<T> dx(dy.size());
          for (int i = 0; i < batch; ++i) {
            for (int j = 0; j < d; ++j) {
              const std::size_t k = static_cast<std::size_t>(i) * d + j;
              dx[k] = dy[k] * g.values()[j] * inv_std[j];
            }
          }
          xin.accumulate_grad(dx);
        }
      };
      return Tensor<T>::make_op(x.shape(), std::move(out), {x, gamma, beta}, std::move(backward));
    }

    if (batch < 2) {
      throw std::invalid_argument("batchnorm: training requires a batch of at least 2, got " +
                                  std::to_string(batch));
    }

    std::vector<T> mean(d, T(0)), var(d, T(0)), inv_std(d);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < d; ++j) mean[j] += xv[static_cast<std::size_t>(i) * d + j];
    }
    for (int j = 0; j < d; ++j) mean[j] /= static_cast<T>(batch);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < d; ++j) {
        const T c = xv[static_cast<std::size_t>(i) * d + j] - mean[j];
        var[j] += c * c;
      }
    }
    for (int j = 0; j < d; ++j) {
      var[j] /= static_cast<T>(batch);
      inv_std[j] = T(1) / std::sqrt(var[j] + static_cast<T>(eps));
    }

    std::vector<T> xhat(xv.size());
    std::vector<T> out(xv.size());
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < d; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * d + j;
        xhat[k] = (xv[k] - mean[j]) * inv_std[j];
        out[k] = gamma.values()[j] * xhat[k] + beta.values()[j];
      }
    }

    // Running stats take the unbiased batch variance.
    const T unbias = static_cast<T>(batch) / static_cast<T>(batch - 1);
    for (int j = 0; j < d; ++j) {
      running_mean.values()[j] = static_cast<T>((1.0 - momentum) * running_mean.values()[j] +
                                                momentum * mean[j]);
      running_var.values()[j] = static_cast<T>((1.0 - momentum) * running_var.values()[j] +
                                               momentum * var[j] * unbias);
    }

    Tensor<T> g = gamma, b = beta, xin = x;
    auto backward = [xin, g, b, xhat, inv_std, batch, d](const std::vector<T>& dy) mutable {
      std::vector<T> dgamma(d, T(0)), dbeta(d, T(0));
      for (int i = 0; i < batch; ++i) {
        for (int j = 0; j < d; ++j) {
          const std::size_t k = static_cast<std::size_t>(i) * d + j;
          dgamma[j] += dy[k] * xhat[k];
          dbeta[j] += dy[k];
        }
      }
      if (g.requires_grad()) g.accumulate_grad(dgamma);
      if (b.requires_grad()) b.accumulate_grad(dbeta);
      if (xin.requires_grad()) {
        std::vector<T> dx(dy.size());
        const T inv_b = T(1) / static_cast<T>(batch);
        for (int i = 0; i < batch; ++i) {
          for (int j = 0; j < d; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * d + j;
            dx[k] = g.values()[j] * inv_std[j] * inv_b *
                    (static_cast<T>(batch) * dy[k] - dbeta[j] - xhat[k] * dgamma[j]);
          }
        }
        xin.accumulate_grad(dx);
      }
    };
    return Tensor<T>::make_op(x.shape(), std::move(out), {x, gamma, beta}, std::move(backward));
  }

  std::int64_t param_count() const { return gamma.numel() + beta.numel(); }
};

// Inverted dropout: each element is zeroed with probability `rate` and
// survivors are scaled by 1/(1-rate). Identity in evaluation mode. The
// mask is drawn elementwise in flat index order.
template <typename T>
struct Dropout {
  double rate = 0.25;

  Dropout() = default;
  explicit Dropout(double r) : rate(r) {
    if (r < 0.0 || r >= 1.0) {
      throw std::invalid_argument("dropout: rate must lie in [0,1), got " + std::to_string(r));
    }
  }

  Tensor<T> forward(const Tensor<T>& x, bool training, Rng& rng) const {
    if (!training || rate == 0.0) return x;
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    std::vector<T> mask(x.values().size());
    for (auto& m : mask) m = rng.uniform01() < rate ? T(0) : scale;
    std::vector<T> out(x.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * mask[i];
    auto backward = [x, mask](const std::vector<T>& dy) mutable {
      if (!x.requires_grad()) return;
      std::vector<T> dx(dy.size());
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
      x.accumulate_grad(dx);
    };
    return Tensor<T>::make_op(x.shape(), std::move(out), {x}, std::move(backward));
  }
};

// Row-wise softmax of a [B, C] value array, written into `out`.
template <typename T>
void softmax_rows(const std::vector<T>& logits, int batch, int classes, std::vector<T>& out) {
  out.resize(logits.size());
  for (int i = 0; i < batch; ++i) {
    const T* row = logits.data() + static_cast<std::size_t>(i) * classes;
    T* orow = out.data() + static_cast<std::size_t>(i) * classes;
    T mx = row[0];
    for (int j = 1; j < classes; ++j) mx = row[j] > mx ? row[j] : mx;
    T denom = T(0);
    for (int j = 0; j < classes; ++j) {
      orow[j] = std::exp(row[j] - mx);
      denom += orow[j];
    }
    for (int j = 0; j < classes; ++j) orow[j] /= denom;
  }
}

// Mean over the batch of -log softmax(logits)[target], stabilized by
// max subtraction. Gradient is (softmax - onehot) / B.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets) {
  detail::require_rank2(logits.shape(), "cross_entropy");
  const int batch = logits.shape()[0];
  const int classes = logits.shape()[1];
  if (static_cast<int>(targets.size()) != batch) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) +
                                " targets for batch " + std::to_string(batch));
  }
  for (int t : targets) {
    if (t < 0 || t >= classes) {
      throw std::invalid_argument("cross_entropy: target " + std::to_string(t) +
                                  " out of range [0," + std::to_string(classes) + ")");
    }
  }
  std::vector<T> probs;
  softmax_rows(logits.values(), batch, classes, probs);
  T loss = T(0);
  for (int i = 0; i < batch; ++i) {
    loss -= std::log(probs[static_cast<std::size_t>(i) * classes + targets[i]]);
  }
  loss /= static_cast<T>(batch);

  auto backward = [logits, probs, targets, batch, classes](const std::vector<T>& dy) mutable {
    if (!logits.requires_grad()) return;
    std::vector<T> dx(probs.size());
    const T scale = dy[0] / static_cast<T>(batch);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < classes; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * classes + j;
        dx[k] = (probs[k] - (j == targets[i] ? T(1) : T(0))) * scale;
      }
    }
    logits.accumulate_grad(dx);
  };
  return Tensor<T>::make_op({1}, {loss}, {logits}, std::move(backward));
}

}  // namespace hfn
