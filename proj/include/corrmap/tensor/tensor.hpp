#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace corrmap {

class Rng;

namespace detail {

struct Node {
  std::vector<int> shape;
  int64_t numel = 0;
  std::vector<float> value;
  std::vector<float> grad;  // allocated on first use during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad, accumulates into parents' grads.
  std::function<void(Node&)> backward;

  float* grad_ptr() {
    if (grad.empty()) grad.assign((size_t)numel, 0.0f);
    return grad.data();
  }
};

}  // namespace detail

// Reverse-mode autodiff tensor: a value-semantic handle to a shared graph
// node. Dense float32, row-major. Graphs are built eagerly by the ops in
// corrmap::ops and freed when the last handle to them drops.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, float v);
  static Tensor from_data(std::vector<int> shape, std::vector<float> data);
  static Tensor scalar(float v);
  // Leaf with requires_grad set: a trainable parameter or probed input.
  static Tensor param(std::vector<int> shape, Rng& rng, float stddev);
  static Tensor param_zeros(std::vector<int> shape);
  static Tensor param_full(std::vector<int> shape, float v);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[i]; }
  int ndim() const { return (int)node_->shape.size(); }
  int64_t numel() const { return node_->numel; }

  float* data() { return node_->value.data(); }
  const float* data() const { return node_->value.data(); }
  float item() const;  // scalar tensors only

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }

  // Gradient buffer (allocated zero on demand).
  float* grad() { return node_->grad_ptr(); }
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign((size_t)numel(), 0.0f);
  }

  // Backpropagate from this scalar; accumulates into leaf grads.
  void backward() const;

  std::shared_ptr<detail::Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

// Shared helper for op implementations.
Tensor make_op(std::vector<int> shape,
               std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> backward);

inline int64_t shape_numel(const std::vector<int>& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

}  // namespace detail
}  // namespace corrmap
