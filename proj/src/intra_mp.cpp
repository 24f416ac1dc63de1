#include "graphqa/intra_mp.hpp"

#include <algorithm>
#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

void register_intra_params(ParameterStore& params, const ModelConfig& cfg) {
  for (std::size_t l = 0; l < cfg.iterations; ++l) {
    std::string suffix = ".l" + std::to_string(l);
    params.create("intra.obj.msg" + suffix, {cfg.dim, cfg.dim});
    params.create("intra.obj.attn" + suffix, {2 * cfg.dim});
    params.create("intra.rel.msg" + suffix, {cfg.dim, cfg.dim});
    params.create("intra.rel.attn" + suffix, {2 * cfg.dim});
  }
  params.create("intra.cls.obj", {cfg.dim, cfg.n_object_classes});
  params.create("intra.cls.rel", {cfg.dim, cfg.n_relation_classes});
  params.create("intra.readout.w", {cfg.dim, 2 * cfg.dim});
  params.create("intra.readout.b", {cfg.dim});
}

std::vector<std::vector<std::size_t>> object_adjacency(const SceneGraph& sg) {
  std::vector<std::vector<std::size_t>> adj(sg.objects.size());
  for (const RelationEdge& e : sg.edges) {
    adj[e.subject].push_back(e.object);
    adj[e.object].push_back(e.subject);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

namespace {

// Shared residual attention update over arbitrary neighborhoods.
std::vector<NodeId> attention_step(Ctx& ctx, const std::vector<NodeId>& state,
                                   const std::vector<std::vector<std::size_t>>& neighborhoods,
                                   NodeId c_l, const std::string& msg_name,
                                   const std::string& attn_name,
                                   const std::string& diag_prefix, Diagnostics* diag) {
  Tape& t = ctx.tape;
  NodeId w_msg = ctx.P(msg_name);
  NodeId w_attn = ctx.P(attn_name);
  std::vector<NodeId> next(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::vector<std::size_t>& nbrs = neighborhoods[i];
    if (nbrs.empty()) {
      next[i] = state[i];  // empty sum: identical node, bit-exact residual
      continue;
    }
    std::vector<NodeId> scores;
    scores.reserve(nbrs.size());
    for (std::size_t j : nbrs)
      scores.push_back(t.dot(w_attn, t.concat({state[j], c_l})));
    NodeId alpha = t.softmax(t.concat(scores));
    if (diag)
      diag->attention.push_back({diag_prefix + std::to_string(i), t.value(alpha).data});
    std::vector<NodeId> weighted;
    weighted.reserve(nbrs.size());
    for (std::size_t k = 0; k < nbrs.size(); ++k)
      weighted.push_back(t.smul(t.index(alpha, k), t.matvec(w_msg, state[nbrs[k]])));
    next[i] = t.add(state[i], t.relu(t.sum(weighted)));
  }
  return next;
}

}  // namespace

std::vector<NodeId> intra_object_step(Ctx& ctx, const std::vector<NodeId>& z,
                                      const std::vector<std::vector<std::size_t>>& adj,
                                      NodeId c_l, std::size_t layer, Diagnostics* diag) {
  std::string suffix = ".l" + std::to_string(layer);
  return attention_step(ctx, z, adj, c_l, "intra.obj.msg" + suffix,
                        "intra.obj.attn" + suffix,
                        "intra.obj" + suffix + ".node", diag);
}

std::vector<NodeId> intra_relation_step(Ctx& ctx, const std::vector<NodeId>& e,
                                        const DualGraph& dual, NodeId c_l,
                                        std::size_t layer, Diagnostics* diag) {
  if (e.size() != dual.n_relations)
    throw ShapeError("state holds " + std::to_string(e.size()) +
                     " relations, dual graph " + std::to_string(dual.n_relations));
  std::string suffix = ".l" + std::to_string(layer);
  return attention_step(ctx, e, dual.neighbors, c_l, "intra.rel.msg" + suffix,
                        "intra.rel.attn" + suffix,
                        "intra.rel" + suffix + ".rel", diag);
}

IntraState run_intra(Ctx& ctx, const ModelConfig& cfg, const IntraState& init,
                     const std::vector<std::vector<std::size_t>>& adj,
                     const DualGraph& dual, const std::vector<NodeId>& instructions,
                     Diagnostics* diag) {
  if (instructions.size() != cfg.iterations)
    throw ShapeError("expected " + std::to_string(cfg.iterations) +
                     " instructions, got " + std::to_string(instructions.size()));
  IntraState state = init;
  for (std::size_t l = 0; l < cfg.iterations; ++l) {
    state.z = intra_object_step(ctx, state.z, adj, instructions[l], l, diag);
    state.e = intra_relation_step(ctx, state.e, dual, instructions[l], l, diag);
  }
  return state;
}

IntraLogits classify_intra(Ctx& ctx, const IntraState& state) {
  Tape& t = ctx.tape;
  if (state.z.empty()) throw DomainError("cannot classify a graph with no objects");
  IntraLogits out;
  out.objects = t.matmul(t.stack_rows(state.z), ctx.P("intra.cls.obj"));
  if (!state.e.empty()) {
    out.has_relations = true;
    out.relations = t.matmul(t.stack_rows(state.e), ctx.P("intra.cls.rel"));
  }
  return out;
}

NodeId loss_intra(Ctx& ctx, const IntraLogits& logits,
                  const std::vector<std::size_t>& object_labels,
                  const std::vector<std::size_t>& relation_labels) {
  Tape& t = ctx.tape;
  if (t.value(logits.objects).rows() != object_labels.size())
    throw DomainError("need one label per object: " +
                      std::to_string(object_labels.size()) + " labels for " +
                      std::to_string(t.value(logits.objects).rows()) + " objects");
  NodeId l_obj = t.cross_entropy_rows(logits.objects, object_labels);
  if (!logits.has_relations) {
    if (!relation_labels.empty())
      throw DomainError("relation labels given for an edgeless graph");
    return t.add(l_obj, t.leaf(Tensor::scalar(0.0), "loss.rel.empty"));
  }
  if (t.value(logits.relations).rows() != relation_labels.size())
    throw DomainError("need one label per relation: " +
                      std::to_string(relation_labels.size()) + " labels for " +
                      std::to_string(t.value(logits.relations).rows()) + " relations");
  return t.add(l_obj, t.cross_entropy_rows(logits.relations, relation_labels));
}

NodeId readout_intra(Ctx& ctx, const ModelConfig& cfg, const IntraState& state) {
  Tape& t = ctx.tape;
  if (state.z.empty()) throw DomainError("cannot read out a graph with no objects");
  NodeId zpool = t.mean(state.z);
  NodeId epool = state.e.empty()
                     ? t.leaf(Tensor(Shape{cfg.dim}, 0.0), "readout.epool.empty")
                     : t.mean(state.e);
  NodeId pooled = t.concat({zpool, epool});
  return t.relu(t.add(t.matvec(ctx.P("intra.readout.w"), pooled), ctx.P("intra.readout.b")));
}

}  // namespace graphqa
