// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/numerics/graph.hpp"

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/kernels.hpp"

namespace aesmpn::numerics {

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value in constant tensor " + shape_string(value.shape()));
  nodes_.push_back(Node{"constant", std::move(value), {}, nullptr, false, std::nullopt});
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(ParamId id) {
  const ParamStore& store = params();
  if (id >= store.size()) throw ContractError("parameter id " + std::to_string(id) + " out of range");
  if (param_nodes_.size() < store.size()) param_nodes_.resize(store.size());
  if (param_nodes_[id]) return Var(this, *param_nodes_[id]);
  nodes_.push_back(Node{"param", store.value(id), {}, nullptr, true, id});
  param_nodes_[id] = nodes_.size() - 1;
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by " + std::string(op) + " " + shape_string(value.shape()));
  }
  bool requires_grad = false;
  for (std::size_t in : inputs) requires_grad = requires_grad || nodes_[in].requires_grad;
  nodes_.push_back(Node{std::string(op), std::move(value), std::move(inputs),
                        requires_grad ? std::move(backward) : BackwardFn{}, requires_grad, std::nullopt});
  return Var(this, nodes_.size() - 1);
}

GradMap Graph::backward(Var loss) const {
  if (loss.graph_ != this) throw ContractError("loss does not belong to this graph");
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  GradMap out(params());
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id()] = Tensor::filled(loss.shape(), 1.0);

  const auto& k = kernels::active();
  std::vector<Tensor*> slots;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (grads[i].empty()) continue;
    const Node& node = nodes_[i];
    if (node.param) {
      Tensor& dst = out[*node.param];
      k.axpy(dst.size(), 1.0, grads[i].raw(), dst.raw());
    } else if (node.backward) {
      slots.assign(node.inputs.size(), nullptr);
      for (std::size_t s = 0; s < node.inputs.size(); ++s) {
        const std::size_t in = node.inputs[s];
        if (!nodes_[in].requires_grad) continue;
        if (grads[in].empty()) grads[in] = Tensor(nodes_[in].value.shape());
        slots[s] = &grads[in];
      }
      node.backward(*this, i, grads[i], slots);
    }
    // Release as soon as consumed; each node is visited once.
    grads[i] = Tensor();
  }
  return out;
}

const ParamStore& Graph::params() const {
  if (params_ == nullptr) throw ContractError("graph has no parameter store bound");
  return *params_;
}

std::optional<Var> Graph::memo(std::string_view key) const {
  const auto it = memo_.find(key);
  if (it == memo_.end()) return std::nullopt;
  return Var(const_cast<Graph*>(this), it->second);
}

std::size_t Graph::noted(std::string_view block) const {
  const auto it = notes_.find(block);
  return it == notes_.end() ? 0 : it->second;
}

}  // namespace aesmpn::numerics
