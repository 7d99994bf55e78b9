// Copyright 2026 The partscreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tensor/tensor.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

#include "common/error.hpp"

namespace partscreen {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace detail {

std::vector<Node*> reverse_topological_order(Node* root) {
  // Iterative post-order DFS; reversing the post-order gives parents after
  // every consumer.
  std::vector<Node*> post;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p && p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
      continue;
    }
    post.push_back(node);
    stack.pop_back();
  }
  std::reverse(post.begin(), post.end());
  return post;
}

}  // namespace detail

namespace {

std::shared_ptr<detail::Node> new_leaf(const Shape& shape,
                                       std::vector<double> data,
                                       bool requires_grad) {
  require(numel_of(shape) == data.size(), ErrorCode::kShape,
          "tensor data length " + std::to_string(data.size()) +
              " does not match shape " + shape_str(shape));
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return wrap(new_leaf(shape, std::vector<double>(numel_of(shape), 0.0),
                       requires_grad));
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  return wrap(new_leaf(shape, std::vector<double>(numel_of(shape), value),
                       requires_grad));
}

Tensor Tensor::from_data(const Shape& shape, std::vector<double> data,
                         bool requires_grad) {
  return wrap(new_leaf(shape, std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return wrap(new_leaf({}, {value}, requires_grad));
}

const Shape& Tensor::shape() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t i) const {
  const auto& s = shape();
  require(i < s.size(), ErrorCode::kShape, "dimension index out of range");
  return s[i];
}

std::size_t Tensor::numel() const { return numel_of(shape()); }

std::span<const double> Tensor::data() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  require(defined() && node_->leaf, ErrorCode::kInvalidArgument,
          "only leaf tensors can be modified in place");
  return node_->value;
}

double Tensor::item() const {
  require(numel() == 1, ErrorCode::kShape,
          "item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return defined() && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  require(defined() && node_->leaf, ErrorCode::kInvalidArgument,
          "requires_grad can only be toggled on leaves");
  node_->requires_grad = flag;
}

bool Tensor::is_leaf() const { return defined() && node_->leaf; }

bool Tensor::has_grad() const { return defined() && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  require(defined() && node_->leaf, ErrorCode::kInvalidArgument,
          "only leaf gradients can be modified");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (defined()) node_->grad.clear();
}

void Tensor::backward() {
  require(defined(), ErrorCode::kInvalidArgument, "backward on undefined");
  require(numel() == 1, ErrorCode::kShape,
          "backward() needs a scalar, got " + shape_str(shape()));
  require(!node_->consumed, ErrorCode::kInvalidArgument,
          "graph already consumed by a previous backward()");
  if (!node_->requires_grad) return;

  auto order = detail::reverse_topological_order(node_.get());
  node_->grad_buffer()[0] += 1.0;
  for (detail::Node* n : order) {
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Deepest first: dropping a node's parents may free nodes further along
  // the order, which by then have been released already.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->leaf) {
      n->backward = nullptr;
      n->parents.clear();
      n->consumed = true;
    }
  }
}

Tensor Tensor::detach() const {
  // Shares nothing with the graph; a copy keeps leaves mutable independently.
  return from_data(shape(), node_->value, false);
}

Tensor Tensor::clone() const { return detach(); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_mode_enabled() { return g_grad_enabled; }

Tensor make_result(Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, detail::BackwardFn backward) {
  require(numel_of(shape) == value.size(), ErrorCode::kShape,
          "op result length mismatch for shape " + shape_str(shape));
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (const auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor::wrap(std::move(node));
}

}  // namespace partscreen
