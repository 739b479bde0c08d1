// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal dense tensor with reverse-mode automatic differentiation.
// Tensors are cheap handles onto a shared node; ops (ops.hpp) record a
// backward closure and the producing node's parents while grads are
// enabled. backward() walks the recorded graph once in reverse
// topological order, accumulates additively into every reachable
// requires-grad tensor, and frees the graph. No higher-order
// derivatives.
//
// The scalar type is a template parameter: float is the training
// precision, double is used by the gradient-check oracles.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hfn {

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

inline std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

namespace detail {

// Thread-local switch: ops record backward closures only while enabled.
inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}

template <typename T>
struct TensorNode {
  std::vector<int> shape;
  std::vector<T> values;
  std::vector<T> grad;  // allocated lazily, same length as values
  bool requires_grad = false;
  bool graph_freed = false;
  std::function<void(const std::vector<T>&)> backward_fn;  // receives this node's grad
  std::vector<std::shared_ptr<TensorNode>> parents;        // requires-grad parents only
};

}  // namespace detail

// RAII guard disabling graph recording (evaluation-mode forwards).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
  ~NoGradGuard() { detail::grad_enabled_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

template <typename T>
class Tensor {
 public:
  using Node = detail::TensorNode<T>;

  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : node_(std::make_shared<Node>()) {
    node_->shape = std::move(shape);
    node_->values.assign(static_cast<std::size_t>(shape_numel(node_->shape)), T(0));
  }

  Tensor(std::vector<int> shape, std::vector<T> values) : node_(std::make_shared<Node>()) {
    if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
      throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                  " values do not fill shape " + shape_string(shape));
    }
    node_->shape = std::move(shape);
    node_->values = std::move(values);
  }

  static Tensor scalar(T value) { return Tensor({1}, {value}); }

  static Tensor full(std::vector<int> shape, T value) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = value;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->values.size()); }

  std::vector<T>& values() { return node_->values; }
  const std::vector<T>& values() const { return node_->values; }

  T item() const {
    if (numel() != 1) {
      throw std::invalid_argument("item: tensor has shape " + shape_string(shape()));
    }
    return node_->values[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool flag) {
    node_->requires_grad = flag;
    return *this;
  }

  bool has_grad() const { return !node_->grad.empty(); }

  // Gradient accumulator; allocated (zeroed) on first access. Tensors
  // are handles to a shared node, so gradient mutation is const: ops
  // capture const handles and still route gradients into them.
  std::vector<T>& grad() const {
    if (node_->grad.empty()) node_->grad.assign(node_->values.size(), T(0));
    return node_->grad;
  }

  void zero_grad() const {
    if (!node_->grad.empty()) node_->grad.assign(node_->values.size(), T(0));
  }

  // Adds `data` (same length as values) elementwise into the gradient.
  void accumulate_grad(const std::vector<T>& data) const {
    auto& g = grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += data[i];
  }

  // Reverse-mode sweep from this scalar. Gradients of every reachable
  // requires-grad tensor accumulate additively; the recorded graph is
  // released afterwards, so a second call on the same graph throws.
  void backward() {
    if (numel() != 1) {
      throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                  shape_string(shape()));
    }
    if (node_->graph_freed) {
      throw std::runtime_error(
          "backward: graph already freed; differentiating twice through one "
          "graph is unsupported");
    }

    // The order holds strong references: releasing a node's closure and
    // parent links below may otherwise destroy nodes still to be walked.
    std::vector<std::shared_ptr<Node>> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
    stack.emplace_back(node_, 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& top = stack.back();
      Node* n = top.first.get();
      if (top.second < n->parents.size()) {
        std::shared_ptr<Node> parent = n->parents[top.second++];
        if (seen.insert(parent.get()).second) {
          stack.emplace_back(std::move(parent), 0);  // invalidates `top`
        }
      } else {
        order.push_back(std::move(top.first));
        stack.pop_back();
      }
    }
    // order is post-order: parents before children; walk it backwards.
    node_->grad.assign(1, T(1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* n = it->get();
      if (n->backward_fn) {
        if (!n->grad.empty()) n->backward_fn(n->grad);
        n->backward_fn = nullptr;
        n->graph_freed = true;
      }
      n->parents.clear();
    }
    node_->graph_freed = true;
  }

  // Used by ops.hpp to stitch new nodes into the graph.
  static Tensor make_op(std::vector<int> shape, std::vector<T> values,
                        const std::vector<Tensor>& inputs,
                        std::function<void(const std::vector<T>&)> backward_fn) {
    Tensor out(std::move(shape), std::move(values));
    if (!grad_enabled()) return out;
    bool needs = false;
    for (const auto& in : inputs) needs = needs || in.requires_grad();
    if (!needs) return out;
    out.node_->requires_grad = true;
    out.node_->backward_fn = std::move(backward_fn);
    for (const auto& in : inputs) {
      if (in.requires_grad()) out.node_->parents.push_back(in.node_);
    }
    return out;
  }

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<Node> node_;
};

}  // namespace hfn
