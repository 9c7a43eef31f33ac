#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "summix/numcore/tensor.hpp"

namespace summix {

template <typename Real>
class Tape;

// A trainable array. Gradients live on the tape that consumed it, keyed by the
// parameter's address.
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
};

template <typename Real>
using ParameterList = std::vector<Parameter<Real>*>;

// Handle to a value produced during a forward pass. Untracked values carry no
// node and receive no gradient.
template <typename Real>
class Var {
 public:
  static constexpr std::size_t kUntracked =
      std::numeric_limits<std::size_t>::max();

  Var() = default;

  const Tensor<Real>& value() const { return *value_; }
  const std::shared_ptr<const Tensor<Real>>& shared() const { return value_; }
  const Shape& shape() const { return value_->shape(); }
  std::size_t node() const { return node_; }
  bool tracked() const { return node_ != kUntracked; }
  explicit operator bool() const { return static_cast<bool>(value_); }

 private:
  friend class Tape<Real>;
  Var(std::shared_ptr<const Tensor<Real>> value, std::size_t node)
      : value_(std::move(value)), node_(node) {}

  std::shared_ptr<const Tensor<Real>> value_;
  std::size_t node_ = kUntracked;
};

// Reverse-mode record of one forward evaluation.
//
// Each recorded op stores a closure computing its vector-Jacobian product.
// backward() runs the closures once in reverse order, accumulating gradients
// additively, so a parameter used several times receives the sum of its
// contributions. A tape is single-threaded and single-use.
template <typename Real>
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor<Real>& grad_out)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  Var<Real> constant(Tensor<Real> value) const {
    return Var<Real>(std::make_shared<const Tensor<Real>>(std::move(value)),
                     Var<Real>::kUntracked);
  }

  // Leaf for a parameter; repeated calls return the same node.
  Var<Real> param(const Parameter<Real>& p) {
    if (!recording_) {
      return Var<Real>(
          std::shared_ptr<const Tensor<Real>>(std::shared_ptr<void>(), &p.value),
          Var<Real>::kUntracked);
    }
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Var<Real>(nodes_[it->second].leaf, it->second);
    // Non-owning alias: the parameter outlives the tape.
    std::shared_ptr<const Tensor<Real>> alias(std::shared_ptr<void>(), &p.value);
    const std::size_t id = push_node(p.value.shape(), nullptr);
    nodes_[id].leaf = alias;
    param_nodes_.emplace(&p, id);
    return Var<Real>(alias, id);
  }

  // Records an op output. `inputs` decides whether the output is tracked;
  // `saved` lists the tensors the closure keeps alive for backward, for
  // retained-memory accounting.
  Var<Real> record(Tensor<Real> value, std::initializer_list<const Var<Real>*> inputs,
                   std::initializer_list<const Tensor<Real>*> saved,
                   Backward backward) {
    auto out = std::make_shared<const Tensor<Real>>(std::move(value));
    return record_shared(std::move(out), inputs, saved, std::move(backward));
  }

  Var<Real> record_shared(std::shared_ptr<const Tensor<Real>> out,
                          std::initializer_list<const Var<Real>*> inputs,
                          std::initializer_list<const Tensor<Real>*> saved,
                          Backward backward) {
    bool any = false;
    for (const Var<Real>* v : inputs) any = any || v->tracked();
    if (!recording_ || !any) return Var<Real>(std::move(out), Var<Real>::kUntracked);
    for (const Tensor<Real>* t : saved) note_saved(t);
    const std::size_t id = push_node(out->shape(), std::move(backward));
    return Var<Real>(std::move(out), id);
  }

  // Same as record() with a runtime-sized input list.
  Var<Real> record_many(Tensor<Real> value, const std::vector<const Var<Real>*>& inputs,
                        std::initializer_list<const Tensor<Real>*> saved,
                        Backward backward) {
    bool any = false;
    for (const Var<Real>* v : inputs) any = any || v->tracked();
    auto out = std::make_shared<const Tensor<Real>>(std::move(value));
    if (!recording_ || !any) return Var<Real>(std::move(out), Var<Real>::kUntracked);
    for (const Tensor<Real>* t : saved) note_saved(t);
    const std::size_t id = push_node(out->shape(), std::move(backward));
    return Var<Real>(std::move(out), id);
  }

  // Gradient buffer of a tracked var, zero-initialised on first access.
  // Returns nullptr for untracked vars so callers can skip work.
  Tensor<Real>* grad_slot(const Var<Real>& v) {
    if (!v.tracked()) return nullptr;
    Node& n = nodes_[v.node()];
    if (n.grad.empty() && numel(n.shape) > 0) n.grad = Tensor<Real>(n.shape);
    return &n.grad;
  }

  void backward(const Var<Real>& loss) {
    if (backward_done_) throw Error("Tape::backward called twice on the same tape");
    backward_done_ = true;
    if (!loss.tracked()) return;
    if (loss.value().size() != 1) {
      throw DimensionError("Tape::backward", "loss size", loss.value().size(),
                           "scalar size", 1);
    }
    grad_slot(loss)->fill(Real(1));
    for (std::size_t i = loss.node() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.empty()) continue;
      Backward fn = std::move(n.backward);
      n.backward = nullptr;
      Tensor<Real> g = std::move(n.grad);
      n.grad = Tensor<Real>();
      fn(*this, g);
    }
  }

  // Accumulated gradient of `p`; zeros when `p` never reached the loss.
  Tensor<Real> grad(const Parameter<Real>& p) const {
    auto it = param_nodes_.find(&p);
    if (it == param_nodes_.end() || nodes_[it->second].grad.empty()) {
      return Tensor<Real>(p.value.shape());
    }
    return nodes_[it->second].grad;
  }

  bool touched(const Parameter<Real>& p) const { return param_nodes_.count(&p) > 0; }

  std::size_t num_nodes() const { return nodes_.size(); }

  // Floats kept alive by recorded closures for backward (each tensor once).
  std::size_t retained_floats() const { return retained_floats_; }

 private:
  struct Node {
    Shape shape;
    Backward backward;
    Tensor<Real> grad;
    std::shared_ptr<const Tensor<Real>> leaf;
  };

  std::size_t push_node(Shape shape, Backward backward) {
    nodes_.push_back(Node{std::move(shape), std::move(backward), {}, {}});
    return nodes_.size() - 1;
  }

  void note_saved(const Tensor<Real>* t) {
    if (t && seen_.insert(t).second) retained_floats_ += t->size();
  }

  bool recording_;
  bool backward_done_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Real>*, std::size_t> param_nodes_;
  std::unordered_set<const Tensor<Real>*> seen_;
  std::size_t retained_floats_ = 0;
};

}  // namespace summix
