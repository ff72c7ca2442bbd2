// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aesmpn/numerics/param_store.hpp"
#include "aesmpn/numerics/tensor.hpp"

namespace aesmpn::numerics {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run computation graph for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so inputs always precede the nodes
/// that consume them and the sequence is a topological order. A graph is
/// single-threaded; build one per forward pass.
class Graph {
 public:
  /// Accumulates d(loss)/d(input) into input_grads[i] given d(loss)/d(output).
  /// Entries are nullptr for inputs that do not need a gradient.
  using BackwardFn =
      std::function<void(const Graph& graph, std::size_t self, const Tensor& grad_out, std::span<Tensor* const> input_grads)>;

  Graph() = default;
  explicit Graph(const ParamStore& params) : params_(&params) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf node for a trainable parameter; repeated calls return the same node.
  Var param(ParamId id);

  /// Appends an op node. Throws NumericError if value has NaN/Inf entries.
  Var record(std::string_view op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  /// Gradients of a scalar loss for every parameter of the bound store.
  GradMap backward(Var loss) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  std::size_t input(std::size_t id, std::size_t slot) const { return nodes_[id].inputs[slot]; }
  std::string_view op(std::size_t id) const { return nodes_[id].op; }
  const ParamStore& params() const;

  /// Per-graph memo for derived nodes (e.g. a transposed weight) keyed by name.
  std::optional<Var> memo(std::string_view key) const;
  void remember(std::string_view key, Var v) { memo_[std::string(key)] = v.id(); }

  /// Counts invocations of a composite building block (e.g. an LSTM step).
  void note(std::string_view block) { ++notes_[std::string(block)]; }
  std::size_t noted(std::string_view block) const;

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::optional<ParamId> param;
  };

  const ParamStore* params_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<std::optional<std::size_t>> param_nodes_;
  std::map<std::string, std::size_t, std::less<>> notes_;
  std::map<std::string, std::size_t, std::less<>> memo_;
};

}  // namespace aesmpn::numerics
