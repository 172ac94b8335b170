#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condgan/tensor.hpp"

namespace condgan {

struct GraphNode;

// Handle to a node of a define-by-run computation graph.
//
// A graph is built fresh for every forward pass: leaves wrap input or
// parameter tensors, and every differentiable op returns a new Var that
// remembers its parents.  Values are immutable once produced.
class Var {
 public:
  Var() = default;

  /// Graph leaf.  Gradients are only accumulated for leaves created with
  /// requires_grad and for nodes downstream of them.
  static Var leaf(Tensor value, bool requires_grad = false);
  static Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient of the most recent backward() pass, if this node was reached.
  const std::optional<Tensor>& grad() const;
  std::string_view op_tag() const;
  std::vector<Var> parents() const;
  bool requires_grad() const;
  bool valid() const noexcept { return node_ != nullptr; }

  // Used by op implementations.
  // Receives the node (its value, parents and upstream gradient in `grad`)
  // and writes one optional contribution per parent.
  using BackwardFn = std::function<void(const GraphNode& self, std::vector<std::optional<Tensor>>& parent_grads)>;
  static Var make(Tensor value, std::string op_tag, std::vector<Var> parents, BackwardFn backward);

 private:
  explicit Var(std::shared_ptr<GraphNode> node) : node_(std::move(node)) {}

  std::shared_ptr<GraphNode> node_;

  friend void backward(const Var& loss);
};

struct GraphNode {
  Tensor value;
  std::string op_tag;
  std::vector<std::shared_ptr<GraphNode>> parents;
  std::optional<Tensor> grad;
  bool requires_grad = false;
  Var::BackwardFn backward;
};

/// Reverse-mode sweep from a one-element loss.  Clears stale gradients on
/// every node reachable from `loss`, seeds d(loss)/d(loss) = 1 and
/// accumulates into each reachable node that requires a gradient.
void backward(const Var& loss);

}  // namespace condgan
