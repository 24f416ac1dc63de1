#pragma once

#include <cstddef>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/diagnostics.hpp"
#include "graphqa/dual_graph.hpp"
#include "graphqa/scene_graph.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

// Per-layer vectors for every object (z) and every relation (e).
struct IntraState {
  std::vector<NodeId> z;
  std::vector<NodeId> e;
};

// Undirected first-order neighborhoods: j is a neighbor of i when an edge
// connects them in either direction. Ascending, deduplicated.
std::vector<std::vector<std::size_t>> object_adjacency(const SceneGraph& sg);

// z_i^{ (l+1) } = z_i + ReLU(sum_j alpha_j W z_j), alpha = softmax over N(i)
// of w . [z_j; c_l].  Objects with no neighbors keep their exact node.
std::vector<NodeId> intra_object_step(Ctx& ctx, const std::vector<NodeId>& z,
                                      const std::vector<std::vector<std::size_t>>& adj,
                                      NodeId c_l, std::size_t layer,
                                      Diagnostics* diag = nullptr);

// Same residual-attention form over dual-graph neighborhoods.
std::vector<NodeId> intra_relation_step(Ctx& ctx, const std::vector<NodeId>& e,
                                        const DualGraph& dual, NodeId c_l,
                                        std::size_t layer, Diagnostics* diag = nullptr);

// Runs all cfg.iterations layers (object step then relation step per layer).
IntraState run_intra(Ctx& ctx, const ModelConfig& cfg, const IntraState& init,
                     const std::vector<std::vector<std::size_t>>& adj,
                     const DualGraph& dual, const std::vector<NodeId>& instructions,
                     Diagnostics* diag = nullptr);

// Class logits: objects {N, C_obj} and relations {M, C_rel}.
struct IntraLogits {
  NodeId objects = 0;
  bool has_relations = false;
  NodeId relations = 0;
};
IntraLogits classify_intra(Ctx& ctx, const IntraState& state);

// Mean cross-entropy over objects plus mean cross-entropy over relations.
NodeId loss_intra(Ctx& ctx, const IntraLogits& logits,
                  const std::vector<std::size_t>& object_labels,
                  const std::vector<std::size_t>& relation_labels);

// p_d = ReLU(W [mean z; mean e] + b); the relation pool of an edgeless graph
// is the zero vector.
NodeId readout_intra(Ctx& ctx, const ModelConfig& cfg, const IntraState& state);

void register_intra_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
