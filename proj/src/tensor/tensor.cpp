#include "corrmap/tensor/tensor.hpp"

#include <stdexcept>
#include <unordered_set>

#include "corrmap/core/rng.hpp"

namespace corrmap {

using detail::Node;

namespace {

std::shared_ptr<Node> new_node(std::vector<int> shape) {
  auto n = std::make_shared<Node>();
  n->numel = detail::shape_numel(shape);
  n->shape = std::move(shape);
  n->value.assign((size_t)n->numel, 0.0f);
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
  return Tensor(new_node(std::move(shape)));
}

Tensor Tensor::full(std::vector<int> shape, float v) {
  auto n = new_node(std::move(shape));
  std::fill(n->value.begin(), n->value.end(), v);
  return Tensor(n);
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<float> data) {
  auto n = std::make_shared<Node>();
  n->numel = detail::shape_numel(shape);
  n->shape = std::move(shape);
  if ((int64_t)data.size() != n->numel)
    throw std::invalid_argument("from_data: size mismatch");
  n->value = std::move(data);
  return Tensor(n);
}

Tensor Tensor::scalar(float v) { return full({1}, v); }

Tensor Tensor::param(std::vector<int> shape, Rng& rng, float stddev) {
  auto n = new_node(std::move(shape));
  for (auto& v : n->value) {
    // Truncated normal at 2 sigma, the usual transformer init.
    double x;
    do {
      x = rng.normal();
    } while (std::abs(x) > 2.0);
    v = (float)(x * stddev);
  }
  n->requires_grad = true;
  return Tensor(n);
}

Tensor Tensor::param_zeros(std::vector<int> shape) {
  auto n = new_node(std::move(shape));
  n->requires_grad = true;
  return Tensor(n);
}

Tensor Tensor::param_full(std::vector<int> shape, float v) {
  Tensor t = full(std::move(shape), v);
  t.set_requires_grad(true);
  return t;
}

float Tensor::item() const {
  if (numel() != 1) throw std::logic_error("item() on non-scalar tensor");
  return node_->value[0];
}

void Tensor::backward() const {
  if (numel() != 1) throw std::logic_error("backward() from non-scalar root");
  if (!node_->requires_grad) return;

  // Iterative DFS topo sort over grad-requiring ancestors.
  std::vector<Node*> order;  // postorder: ancestors before descendants
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.push_back({node_.get(), 0});
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second < top.first->parents.size()) {
      Node* p = top.first->parents[top.second++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(top.first);
      stack.pop_back();
    }
  }

  node_->grad_ptr()[0] = 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

namespace detail {

Tensor make_op(std::vector<int> shape, std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->numel = shape_numel(shape);
  n->shape = std::move(shape);
  n->value.assign((size_t)n->numel, 0.0f);
  for (const auto& p : parents) n->requires_grad |= p->requires_grad;
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward = std::move(backward);
  return Tensor(n);
}

}  // namespace detail
}  // namespace corrmap
