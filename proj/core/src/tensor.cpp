// Copyright 2026 The ctraj Authors
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

#include "ctraj/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ctraj/error.hpp"

namespace ctraj
{

namespace
{

thread_local bool g_grad_enabled = true;

}  // namespace

std::size_t shape_numel(const Shape & shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape & shape)
{
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad)
{
  const auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad)
{
  if (shape_numel(shape) != data.size()) {
    throw ShapeError(
      "data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from_data({}, {value}, requires_grad); }

const Shape & Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(int index) const
{
  const auto r = static_cast<int>(rank());
  const int i = index < 0 ? r + index : index;
  if (i < 0 || i >= r) {
    throw ShapeError("dimension index " + std::to_string(index) + " out of range for " + shape_str(shape()));
  }
  return node_->shape[static_cast<std::size_t>(i)];
}

std::size_t Tensor::numel() const { return node_->data.size(); }

std::span<const double> Tensor::data() const { return node_->data; }

std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const
{
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const
{
  return node_->ensure_grad();
}

std::span<double> Tensor::mutable_grad() { return node_->ensure_grad(); }

void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return from_data(shape(), node_->data, false); }

void Tensor::backward() const
{
  if (numel() != 1) {
    throw ShapeError("backward() requires a scalar, got " + shape_str(shape()));
  }
  if (!node_->requires_grad) {
    return;
  }

  // Iterative post-order DFS; reversed order is a valid topological order.
  std::vector<detail::Node *> order;
  std::unordered_set<detail::Node *> visited;
  std::vector<std::pair<detail::Node *, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto & [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node * p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node * n = *it;
    if (n->backward && !n->grad.empty()) {
      n->backward(*n);
    }
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_mode_enabled() { return g_grad_enabled; }

namespace detail
{

Tensor make_result(
  Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
  std::function<void(Node & self)> backward)
{
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (g_grad_enabled) {
    const bool any = std::any_of(
      inputs.begin(), inputs.end(), [](const Tensor & t) { return t.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (auto & t : inputs) {
        node->parents.push_back(t.node());
      }
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

}  // namespace detail

}  // namespace ctraj
