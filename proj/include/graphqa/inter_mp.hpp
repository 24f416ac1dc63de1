#pragma once

#include <cstddef>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/diagnostics.hpp"
#include "graphqa/hetero_graph.hpp"
#include "graphqa/scene_graph.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

struct InterState {
  std::vector<NodeId> z;  // per object, {D}
  std::vector<NodeId> e;  // per relation, {D}
};

// W_t = sum_i a_{t,i} B_i from one direction's basis bank.
// direction is "s2r" (object -> relation) or "r2s" (relation -> object).
NodeId category_weight(Ctx& ctx, const ModelConfig& cfg, const char* direction,
                       RelationCategory t);

// e_{u->v} += ReLU(alpha(u,q) W_t z_u + beta(v,q) W_t z_v) with the gates a
// two-way softmax between the endpoint score and the instruction score.
std::vector<NodeId> inter_relation_step(Ctx& ctx, const ModelConfig& cfg,
                                        const InterState& state, const SceneGraph& sg,
                                        const HeteroGraph& h, NodeId c_l,
                                        std::size_t layer, Diagnostics* diag = nullptr);

// z_u += (1/|R|) sum_t ReLU(m_{u,t}) where m_{u,t} aggregates category-t
// incident relation features (both directions, each with its own softmax
// attention) through W_t of the r2s bank.
std::vector<NodeId> inter_object_step(Ctx& ctx, const ModelConfig& cfg,
                                      const InterState& state,
                                      const std::vector<NodeId>& e_next,
                                      const SceneGraph& sg, const HeteroGraph& h,
                                      NodeId c_l, std::size_t layer,
                                      Diagnostics* diag = nullptr);

// cfg.iterations layers of relation step followed by object step.
InterState run_inter(Ctx& ctx, const ModelConfig& cfg, const InterState& init,
                     const SceneGraph& sg, const HeteroGraph& h,
                     const std::vector<NodeId>& instructions,
                     Diagnostics* diag = nullptr);

struct InterLogits {
  NodeId objects = 0;
  bool has_relations = false;
  NodeId relations = 0;
};
InterLogits classify_inter(Ctx& ctx, const InterState& state);

NodeId loss_inter(Ctx& ctx, const InterLogits& logits,
                  const std::vector<std::size_t>& object_labels,
                  const std::vector<std::size_t>& relation_labels);

NodeId readout_inter(Ctx& ctx, const ModelConfig& cfg, const InterState& state);

void register_inter_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
