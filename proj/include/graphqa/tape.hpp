#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "graphqa/params.hpp"
#include "graphqa/tensor.hpp"

namespace graphqa {

using NodeId = std::size_t;

// Single-pass computation tape. Nodes are appended during the forward
// pass; backward() replays them once in reverse, accumulating gradients
// additively. One tape per forward/backward pass, confined to one thread.
class Tape {
 public:
  struct Node {
    Tensor value;
    Tensor grad;
    const char* op;
    std::function<void(Tape&)> backward;  // empty for leaves
  };

  NodeId leaf(Tensor v, const char* tag = "leaf");

  // Leaf bound to a store parameter; backward adds into p.grad.
  NodeId param(Param& p);

  // Leaf copy of another node's value: gradient does not flow past it.
  NodeId detach(NodeId x);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  Tensor& grad(NodeId id) { return nodes_[id].grad; }
  const char* op_tag(NodeId id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and visits every node exactly once in
  // reverse creation order. root must be scalar.
  void backward(NodeId root);

  // --- elementwise / arithmetic ---
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double k);
  NodeId smul(NodeId s, NodeId x);  // scalar node times tensor node
  NodeId sum(const std::vector<NodeId>& xs);
  NodeId mean(const std::vector<NodeId>& xs);
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);

  // --- linear algebra ---
  NodeId matmul(NodeId a, NodeId b);
  NodeId matvec(NodeId w, NodeId v);  // {m,n} x {n} -> {m}
  NodeId vecmat(NodeId v, NodeId w);  // {m} x {m,n} -> {n}
  NodeId dot(NodeId a, NodeId b);     // -> scalar

  // --- shape ---
  NodeId concat(const std::vector<NodeId>& parts);
  NodeId index(NodeId v, std::size_t i);  // -> scalar
  NodeId row(NodeId m, std::size_t r);    // matrix row -> vector
  NodeId stack_rows(const std::vector<NodeId>& rows);

  // --- probability / loss ---
  NodeId softmax(NodeId v);
  NodeId cross_entropy(NodeId logits, std::size_t label);  // vector logits
  NodeId cross_entropy_rows(NodeId logits, const std::vector<std::size_t>& labels);

  // First node (creation order) whose value has a non-finite entry, or
  // npos. Used for divergence diagnostics.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t first_non_finite() const;

 private:
  NodeId push(Tensor value, const char* tag, std::function<void(Tape&)> bwd);
  std::vector<Node> nodes_;
};

// Caches tape.param() node ids by name over one forward pass so each
// parameter appears as a single leaf.
struct Ctx {
  Tape& tape;
  ParameterStore& params;
  std::map<std::string, NodeId> bound;

  Ctx(Tape& t, ParameterStore& p) : tape(t), params(p) {}
  NodeId P(const std::string& name);
};

// Max over all parameter elements of
// |analytic - central difference| / max(1, |analytic|), step 1e-5.
// build must construct a scalar loss from the store's parameters via
// Ctx/tape.param on the tape it is given.
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

GradCheckReport gradcheck(ParameterStore& store, const std::function<NodeId(Tape&)>& build,
                          double step = 1e-5);

}  // namespace graphqa
