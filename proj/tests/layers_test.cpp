// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hfn/hyperalg.hpp"
#include "hfn/layers.hpp"
#include "hfn/ops.hpp"
#include "hfn/rng.hpp"
#include "hfn/tensor.hpp"
#include "testutil.hpp"

using hfn::BatchNorm;
using hfn::Dropout;
using hfn::FcLayer;
using hfn::PhmLayer;
using hfn::Rng;
using hfn::Tensor;

namespace {

Tensor<double> random_tensor(std::vector<int> shape, Rng& rng) {
  std::vector<double> v(hfn::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor<double>(std::move(shape), std::move(v));
}

constexpr double kGradTol = 1e-4;

}  // namespace

TEST_CASE("fc layer init respects the fan bound and zero bias") {
  Rng rng(201);
  FcLayer<double> fc(20, 10, rng);
  const double bound = std::sqrt(6.0 / (20 + 10));
  double max_abs = 0.0;
  for (double w : fc.weight.values()) {
    CHECK(std::abs(w) <= bound);
    max_abs = std::max(max_abs, std::abs(w));
  }
  CHECK(max_abs > 0.0);
  for (double b : fc.bias.values()) CHECK(b == 0.0);
  CHECK(fc.param_count() == 20 * 10 + 10);
  CHECK(fc.weight.requires_grad());
  CHECK(fc.bias.requires_grad());
}

TEST_CASE("phm weight parameter counts follow n^3 + d_in*d_out/n") {
  CHECK(PhmLayer<float>::weight_param_count(2, 64, 32) == 1032);
  CHECK(PhmLayer<float>::weight_param_count(4, 1792, 896) == 401472);
  CHECK(PhmLayer<float>::weight_param_count(4, 224, 112) == 6336);

  // Enumerating the stored tensors must agree with the formula.
  Rng rng(202);
  PhmLayer<float> layer(2, 64, 32, rng);
  std::int64_t stored = 0;
  for (const auto& t : layer.a) stored += t.numel();
  for (const auto& t : layer.f) stored += t.numel();
  CHECK(stored == 1032);
  CHECK(layer.param_count() == 1032 + 32);
}

TEST_CASE("phm to real parameter ratio lies in [1/n, 1/n + n^3/(d_in*d_out)]") {
  const struct {
    int n, d_in, d_out;
  } cases[] = {{2, 64, 32}, {4, 1792, 896}, {4, 224, 112}};
  for (const auto& c : cases) {
    const double phm = static_cast<double>(PhmLayer<float>::weight_param_count(c.n, c.d_in, c.d_out));
    const double real = static_cast<double>(c.d_in) * c.d_out;
    const double ratio = phm / real;
    CHECK(ratio >= 1.0 / c.n);
    CHECK(ratio <= 1.0 / c.n + std::pow(c.n, 3) / real);
  }
}

TEST_CASE("phm layer with n=4 and 1x1 filters reproduces quaternion multiplication bitwise") {
  Rng rng(203);
  PhmLayer<double> layer(4, 4, 4, rng);
  const hfn::hyperalg::HypercomplexNumber q{0.7, -1.3, 2.1, 0.4};
  for (int i = 0; i < 4; ++i) layer.f[i].values()[0] = q.coefficients[i];

  const auto w = layer.weight();
  const auto expect = hfn::hyperalg::hamilton_matrix(q);
  REQUIRE(w.values().size() == expect.entries.size());
  for (std::size_t i = 0; i < expect.entries.size(); ++i) {
    CHECK(w.values()[i] == expect.entries[i]);  // exact, not approximate
  }

  // Applying the layer to r equals the Hamilton product q * r.
  const hfn::hyperalg::HypercomplexNumber r{-0.2, 0.9, 1.1, -2.5};
  Tensor<double> x({1, 4}, r.coefficients);
  const auto y = layer.forward(x);
  const auto direct = hfn::hyperalg::hamilton_product(q, r);
  for (int i = 0; i < 4; ++i) {
    CHECK(y.values()[i] == doctest::Approx(direct.coefficients[i]).epsilon(1e-12));
  }
}

TEST_CASE("phm algebra matrices start at the fixed tables for n in {1,2,4}") {
  Rng rng(204);
  for (int n : {1, 2, 4}) {
    PhmLayer<double> layer(n, 4 * n, 4 * n, rng);
    const auto tables = hfn::hyperalg::algebra_matrices(n);
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < tables[i].entries.size(); ++j) {
        CHECK(layer.a[i].values()[j] == tables[i].entries[j]);
      }
    }
  }
}

TEST_CASE("phm algebra matrices for other n are drawn from {-1,0,1}") {
  Rng rng(205);
  PhmLayer<double> layer(3, 9, 6, rng);
  bool any_nonzero = false;
  for (const auto& ai : layer.a) {
    for (double v : ai.values()) {
      CHECK((v == -1.0 || v == 0.0 || v == 1.0));
      if (v != 0.0) any_nonzero = true;
    }
  }
  CHECK(any_nonzero);
}

TEST_CASE("phm constructor validates n and divisibility") {
  Rng rng(206);
  CHECK_THROWS_AS(PhmLayer<float>(0, 4, 4, rng), std::invalid_argument);
  CHECK_THROWS_AS(PhmLayer<float>(4, 6, 8, rng), std::invalid_argument);
  CHECK_THROWS_AS(PhmLayer<float>(4, 8, 6, rng), std::invalid_argument);
}

TEST_CASE("phm forward equals a dense layer with the assembled kronecker weight") {
  Rng rng(207);
  PhmLayer<double> layer(2, 6, 4, rng);
  // Assemble W = sum_i A_i kron F_i independently of the layer's graph ops.
  hfn::hyperalg::Matrix w(4, 6);
  for (int i = 0; i < 2; ++i) {
    hfn::hyperalg::Matrix ai(2, 2, layer.a[i].values());
    hfn::hyperalg::Matrix fi(2, 3, layer.f[i].values());
    const auto block = hfn::hyperalg::kronecker(ai, fi);
    for (std::size_t e = 0; e < w.entries.size(); ++e) w.entries[e] += block.entries[e];
  }
  auto x = random_tensor({3, 6}, rng);
  const auto y = layer.forward(x);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> row(x.values().begin() + r * 6, x.values().begin() + (r + 1) * 6);
    const auto expect = w.apply(row);
    for (int c = 0; c < 4; ++c) {
      CHECK(y.values()[r * 4 + c] == doctest::Approx(expect[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("phm gradients (including the algebra matrices) match finite differences") {
  Rng rng(208);
  PhmLayer<double> layer(2, 4, 4, rng);
  auto x = random_tensor({3, 4}, rng);
  std::vector<Tensor<double>> leaves{x, layer.a[0], layer.a[1], layer.f[0], layer.f[1],
                                     layer.bias};
  const double err = testutil::max_grad_rel_error(
      leaves, [&]() { return hfn::sum(hfn::relu(layer.forward(x))); });
  CHECK(err <= kGradTol);
}

TEST_CASE("batchnorm training normalizes by batch statistics and updates running stats") {
  BatchNorm<double> bn(2);
  Tensor<double> x({4, 2}, {1, 10, 2, 20, 3, 30, 4, 40});
  const auto y = bn.forward(x, true);

  // Column means of the output are ~0 and biased variances ~1.
  for (int j = 0; j < 2; ++j) {
    double mean = 0, var = 0;
    for (int i = 0; i < 4; ++i) mean += y.values()[i * 2 + j];
    mean /= 4;
    for (int i = 0; i < 4; ++i) {
      const double c = y.values()[i * 2 + j] - mean;
      var += c * c;
    }
    var /= 4;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
  }

  // Running stats: mean update 0.9*0 + 0.1*batch_mean; variance update
  // uses the unbiased batch variance.
  CHECK(bn.running_mean.values()[0] == doctest::Approx(0.1 * 2.5).epsilon(1e-12));
  CHECK(bn.running_mean.values()[1] == doctest::Approx(0.1 * 25.0).epsilon(1e-12));
  const double unbiased0 = (1.25) * 4.0 / 3.0;  // biased var of {1,2,3,4} is 1.25
  CHECK(bn.running_var.values()[0] == doctest::Approx(0.9 + 0.1 * unbiased0).epsilon(1e-12));
}

TEST_CASE("batchnorm evaluation uses the running statistics") {
  BatchNorm<double> bn(2);
  bn.running_mean.values() = {1.0, -2.0};
  bn.running_var.values() = {4.0, 9.0};
  bn.gamma.values() = {2.0, 0.5};
  bn.beta.values() = {0.25, -1.0};
  Tensor<double> x({1, 2}, {3.0, 4.0});
  const auto y = bn.forward(x, false);
  CHECK(y.values()[0] == doctest::Approx(2.0 * (3.0 - 1.0) / std::sqrt(4.0 + 1e-5) + 0.25));
  CHECK(y.values()[1] == doctest::Approx(0.5 * (4.0 + 2.0) / std::sqrt(9.0 + 1e-5) - 1.0));

  // Evaluation must not change the running stats.
  CHECK(bn.running_mean.values() == std::vector<double>{1.0, -2.0});
  CHECK(bn.running_var.values() == std::vector<double>{4.0, 9.0});
}

TEST_CASE("batchnorm rejects single-sample training batches and width mismatches") {
  BatchNorm<double> bn(3);
  Tensor<double> one({1, 3}, {1, 2, 3});
  CHECK_THROWS_AS(bn.forward(one, true), std::invalid_argument);
  CHECK_NOTHROW(bn.forward(one, false));
  Tensor<double> wide({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  CHECK_THROWS_AS(bn.forward(wide, true), std::invalid_argument);
}

TEST_CASE("batchnorm gradients match finite differences in both modes") {
  Rng rng(209);
  for (bool training : {true, false}) {
    CAPTURE(training);
    BatchNorm<double> bn(3);
    // Non-trivial gamma/beta and, for eval mode, non-trivial running stats.
    for (auto& v : bn.gamma.values()) v = rng.uniform(0.5, 1.5);
    for (auto& v : bn.beta.values()) v = rng.uniform(-0.5, 0.5);
    for (auto& v : bn.running_mean.values()) v = rng.uniform(-0.5, 0.5);
    for (auto& v : bn.running_var.values()) v = rng.uniform(0.5, 2.0);
    auto x = random_tensor({5, 3}, rng);
    std::vector<Tensor<double>> leaves{x, bn.gamma, bn.beta};
    const double err = testutil::max_grad_rel_error(
        leaves, [&]() { return hfn::sum(hfn::relu(bn.forward(x, training))); });
    CHECK(err <= kGradTol);
  }
}

TEST_CASE("dropout is the identity in evaluation mode and at rate zero") {
  Rng rng(210);
  auto x = random_tensor({4, 4}, rng);
  Dropout<double> d25(0.25);
  CHECK(d25.forward(x, false, rng).same_node(x));
  Dropout<double> d0(0.0);
  CHECK(d0.forward(x, true, rng).same_node(x));
}

TEST_CASE("dropout zeroes at the configured rate and rescales survivors") {
  Rng rng(211);
  const int n = 10000;
  Tensor<double> x({n}, std::vector<double>(n, 1.0));
  Dropout<double> drop(0.25);
  const auto y = drop.forward(x, true, rng);
  int zeros = 0;
  for (double v : y.values()) {
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
    }
  }
  // Binomial(10000, 0.25) has std ~43; a 200 margin is over 4 sigma.
  CHECK(zeros > 2500 - 200);
  CHECK(zeros < 2500 + 200);
}

TEST_CASE("dropout gradient is the mask") {
  Rng rng(212);
  Tensor<double> x({6}, {1, 2, 3, 4, 5, 6});
  x.set_requires_grad(true);
  Dropout<double> drop(0.5);
  const auto y = drop.forward(x, true, rng);
  hfn::sum(y).backward();
  for (int i = 0; i < 6; ++i) {
    if (y.values()[i] == 0.0) {
      CHECK(x.grad()[i] == 0.0);
    } else {
      CHECK(x.grad()[i] == doctest::Approx(2.0));  // 1/(1-0.5)
    }
  }
}

TEST_CASE("dropout rejects rates outside [0,1)") {
  CHECK_THROWS_AS(Dropout<float>(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Dropout<float>(-0.1), std::invalid_argument);
}

TEST_CASE("cross entropy of uniform logits is ln C") {
  Tensor<double> logits({2, 3}, std::vector<double>(6, 0.42));
  const auto loss = hfn::cross_entropy(logits, {0, 2});
  CHECK(loss.item() == doctest::Approx(1.0986122886681098).epsilon(1e-12));
}

TEST_CASE("cross entropy of a confident correct prediction is near zero") {
  Tensor<double> logits({1, 3}, {20.0, 0.0, 0.0});
  const auto loss = hfn::cross_entropy(logits, {0});
  CHECK(loss.item() < 1e-6);
}

TEST_CASE("cross entropy gradient is (softmax - onehot) / B") {
  Tensor<double> logits({1, 2}, {0.0, 0.0});
  logits.set_requires_grad(true);
  hfn::cross_entropy(logits, {0}).backward();
  CHECK(logits.grad()[0] == doctest::Approx(-0.5));
  CHECK(logits.grad()[1] == doctest::Approx(0.5));
}

TEST_CASE("cross entropy gradients match finite differences") {
  Rng rng(213);
  auto logits = random_tensor({4, 3}, rng);
  const std::vector<int> targets{0, 2, 1, 1};
  const double err = testutil::max_grad_rel_error(
      {logits}, [&]() { return hfn::cross_entropy(logits, targets); });
  CHECK(err <= kGradTol);
}

TEST_CASE("cross entropy validates targets and batch size") {
  Tensor<double> logits({2, 3}, std::vector<double>(6, 0.0));
  CHECK_THROWS_AS(hfn::cross_entropy(logits, {0}), std::invalid_argument);
  try {
    hfn::cross_entropy(logits, {0, 3});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("softmax rows sum to one") {
  std::vector<double> logits{1.0, 2.0, 3.0, -5.0, 0.0, 5.0};
  std::vector<double> probs;
  hfn::softmax_rows(logits, 2, 3, probs);
  for (int i = 0; i < 2; ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) {
      s += probs[i * 3 + j];
      CHECK(probs[i * 3 + j] > 0.0);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}
