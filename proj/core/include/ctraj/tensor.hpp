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

#ifndef CTRAJ__TENSOR_HPP_
#define CTRAJ__TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ctraj
{

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape & shape);
std::string shape_str(const Shape & shape);

namespace detail
{

struct Node
{
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad{false};
  std::vector<std::shared_ptr<Node>> parents;
  // Reads self.grad and accumulates into the parents' grads.
  std::function<void(Node & self)> backward;

  std::vector<double> & ensure_grad()
  {
    if (grad.empty()) {
      grad.assign(data.size(), 0.0);
    }
    return grad;
  }
};

}  // namespace detail

/**
 * @brief Dense row-major array participating in reverse-mode differentiation.
 *
 * Tensors are handles: copying a Tensor shares the underlying storage and graph
 * node. Values are held in double precision; model parameters are kept
 * float32-representable by the optimizer (see trainer.hpp).
 */
class Tensor
{
public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }

  const Shape & shape() const;
  std::size_t rank() const { return shape().size(); }
  // Negative indices count from the back.
  std::size_t dim(int index) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Mutation is for leaves (parameter init, optimizer updates); mutating an
  // interior node after it was recorded invalidates its backward pass.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  bool has_grad() const;
  // Zeros when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Seeds d(self)/d(self) = 1 and propagates; self must be a scalar.
  void backward() const;

  // Same values, no history, requires_grad=false.
  Tensor detach() const;

  // Internal: op implementations build results through detail helpers.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node> & node() const { return node_; }

private:
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on the current thread for the guard's lifetime.
class NoGradGuard
{
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard & operator=(const NoGradGuard &) = delete;

private:
  bool previous_;
};

bool grad_mode_enabled();

namespace detail
{

// Creates an op result. History and the backward closure are only kept when
// grad mode is on and at least one input requires grad.
Tensor make_result(
  Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
  std::function<void(Node & self)> backward);

inline Node & node_of(const Tensor & t) { return *t.node(); }

}  // namespace detail

}  // namespace ctraj

#endif  // CTRAJ__TENSOR_HPP_
