#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mvts {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  // Allocated lazily; empty means "no gradient yet".
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents' grads.
  std::function<void(Node& self)> backward_fn;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
  // Releases long parent chains iteratively.
  ~Node();

  std::vector<double>& ensure_grad();
  bool is_leaf() const { return parents.empty(); }
};

}  // namespace detail

// Dense row-major float64 tensor with reverse-mode differentiation.
//
// Tensor is a cheap handle; copies alias the same storage. Ops never mutate
// their inputs, so after construction only leaf data (through the optimizer)
// and grad buffers change.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct access to leaf storage for initialization and optimizer updates.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  // Empty span when no gradient has been accumulated.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Reverse-mode accumulation from a one-element root into every reachable
  // tensor that requires grad. Leaf grads accumulate across calls.
  void backward() const;

  // Copy of the values with no graph attached.
  Tensor detach() const;

  const detail::Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const noexcept { return node_; }

 private:
  detail::Node& checked() const;
  std::shared_ptr<detail::Node> node_;
};

// True unless a NoGradGuard is active on this thread.
bool grad_enabled();

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

using BackwardFn = std::function<void(Node& self)>;

// Wraps freshly computed values into a tensor, recording `inputs` as parents
// when recording is enabled and any of them requires grad.
Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs, BackwardFn fn);
Tensor make_result(Shape shape, std::vector<double> data, std::span<const Tensor> inputs, BackwardFn fn);

// Gradient buffer of a parent, allocated on first touch. Null when the parent
// does not take gradients.
double* grad_target(const Tensor& t);

}  // namespace detail

}  // namespace mvts
