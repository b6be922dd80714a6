#include "mvts/tensor.hpp"

#include <sstream>
#include <unordered_set>
#include <utility>

#include "mvts/error.hpp"

namespace mvts {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

detail::Node::~Node() {
  std::vector<std::shared_ptr<Node>> pending = std::move(parents);
  backward_fn = nullptr;
  while (!pending.empty()) {
    std::shared_ptr<Node> n = std::move(pending.back());
    pending.pop_back();
    if (n.use_count() != 1) continue;
    // Sole owner: detach its parents first so its destruction does not recurse.
    for (auto& p : n->parents) pending.push_back(std::move(p));
    n->parents.clear();
    n->backward_fn = nullptr;
  }
}

std::vector<double>& detail::Node::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw DimensionError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_string(shape));
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from_data({}, {value}, requires_grad); }

detail::Node& Tensor::checked() const {
  if (!node_) throw UsageError("operation on an undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::size_t Tensor::size(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size())
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return checked().data.size(); }

std::span<const double> Tensor::data() const { return checked().data; }

std::span<double> Tensor::mutable_data() { return checked().data; }

double Tensor::item() const {
  const auto& n = checked();
  if (n.data.size() != 1) throw UsageError("item() on a tensor of shape " + shape_string(n.shape));
  return n.data[0];
}

bool Tensor::requires_grad() const { return checked().requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  auto& n = checked();
  if (!n.is_leaf()) throw UsageError("requires_grad can only be changed on leaf tensors");
  n.requires_grad = flag;
}

bool Tensor::has_grad() const { return !checked().grad.empty(); }

std::span<const double> Tensor::grad() const { return checked().grad; }

std::span<double> Tensor::mutable_grad() { return checked().ensure_grad(); }

void Tensor::zero_grad() { checked().grad.clear(); }

Tensor Tensor::detach() const {
  const auto& n = checked();
  return from_data(n.shape, n.data, false);
}

void Tensor::backward() const {
  auto& root = checked();
  if (root.data.size() != 1)
    throw UsageError("backward() requires a scalar root, got shape " + shape_string(root.shape));
  if (!root.requires_grad) throw UsageError("backward() from a tensor that does not require grad");

  // Iterative post-order DFS; parents come before children in `order`.
  std::vector<detail::Node*> order;
  std::unordered_set<const detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* n : order)
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  root.ensure_grad()[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->is_leaf() || !n->backward_fn) continue;
    n->backward_fn(*n);
    // Interior gradients are consumed; free them to bound peak memory.
    std::vector<double>().swap(n->grad);
  }
}

namespace detail {

Tensor make_result(Shape shape, std::vector<double> data, std::span<const Tensor> inputs, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (grad_enabled()) {
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (const auto& t : inputs) node->parents.push_back(t.node_ptr());
      node->backward_fn = std::move(fn);
    }
  }
  return Tensor(std::move(node));
}

Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs, BackwardFn fn) {
  return make_result(std::move(shape), std::move(data), std::span<const Tensor>(inputs.begin(), inputs.size()),
                     std::move(fn));
}

double* grad_target(const Tensor& t) {
  auto* n = const_cast<Node*>(t.node());
  if (!n->requires_grad) return nullptr;
  return n->ensure_grad().data();
}

}  // namespace detail

}  // namespace mvts
