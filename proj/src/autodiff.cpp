#include "condgan/autodiff.hpp"

#include <unordered_set>

#include "condgan/errors.hpp"

namespace condgan {

Var Var::leaf(Tensor value, bool requires_grad) {
  require_finite(value, "leaf");
  auto node = std::make_shared<GraphNode>();
  node->value = std::move(value);
  node->op_tag = "leaf";
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

Var Var::make(Tensor value, std::string op_tag, std::vector<Var> parents, BackwardFn backward) {
  require_finite(value, op_tag);
  auto node = std::make_shared<GraphNode>();
  node->value = std::move(value);
  node->op_tag = std::move(op_tag);
  for (auto& p : parents) {
    if (!p.valid()) throw ContractError("op " + node->op_tag + " received an empty Var");
    node->requires_grad = node->requires_grad || p.node_->requires_grad;
    node->parents.push_back(std::move(p.node_));
  }
  if (node->requires_grad) node->backward = std::move(backward);
  return Var(std::move(node));
}

const Tensor& Var::value() const {
  if (!node_) throw ContractError("value() on empty Var");
  return node_->value;
}

const std::optional<Tensor>& Var::grad() const {
  if (!node_) throw ContractError("grad() on empty Var");
  return node_->grad;
}

std::string_view Var::op_tag() const { return node_ ? std::string_view(node_->op_tag) : std::string_view("empty"); }

std::vector<Var> Var::parents() const {
  std::vector<Var> out;
  if (node_) {
    for (const auto& p : node_->parents) out.push_back(Var(p));
  }
  return out;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

namespace {

void add_into(std::optional<Tensor>& slot, Tensor contribution) {
  if (!slot) {
    slot = std::move(contribution);
    return;
  }
  if (slot->shape() != contribution.shape()) {
    throw DimensionError("gradient shape " + to_string(contribution.shape()) + " does not match " +
                         to_string(slot->shape()));
  }
  auto dst = slot->data();
  auto src = contribution.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void backward(const Var& loss) {
  if (!loss.valid()) throw ContractError("backward on empty Var");
  if (loss.value().size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + to_string(loss.shape()));
  }

  // Iterative post-order DFS: parents precede children in `order`.
  std::vector<GraphNode*> order;
  std::unordered_set<GraphNode*> visited;
  std::vector<std::pair<GraphNode*, std::size_t>> stack{{loss.node_.get(), 0}};
  visited.insert(loss.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      GraphNode* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (GraphNode* node : order) node->grad.reset();
  loss.node_->grad = Tensor::filled(loss.shape(), 1.0);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    GraphNode* node = *it;
    if (!node->grad || !node->backward) continue;
    std::vector<std::optional<Tensor>> parent_grads(node->parents.size());
    node->backward(*node, parent_grads);
    for (std::size_t i = 0; i < node->parents.size(); ++i) {
      GraphNode* parent = node->parents[i].get();
      if (parent->requires_grad && parent_grads[i]) add_into(parent->grad, std::move(*parent_grads[i]));
    }
  }
}

}  // namespace condgan
