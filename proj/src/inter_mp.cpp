#include "graphqa/inter_mp.hpp"

#include <array>
#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

void register_inter_params(ParameterStore& params, const ModelConfig& cfg) {
  for (const char* dir : {"s2r", "r2s"}) {
    std::string p = std::string("inter.basis.") + dir;
    for (std::size_t i = 0; i < cfg.basis_blocks; ++i)
      params.create(p + "." + std::to_string(i), {cfg.dim, cfg.dim});
    params.create(std::string("inter.coef.") + dir,
                  {kRelationCategories, cfg.basis_blocks});
  }
  for (std::size_t l = 0; l < cfg.iterations; ++l) {
    std::string suffix = ".l" + std::to_string(l);
    params.create("inter.gate" + suffix, {cfg.dim});
    params.create("inter.r2s.attn" + suffix, {2 * cfg.dim});
  }
  params.create("inter.cls.obj", {cfg.dim, cfg.n_object_classes});
  params.create("inter.cls.rel", {cfg.dim, cfg.n_relation_classes});
  params.create("inter.readout.w", {cfg.dim, 2 * cfg.dim});
  params.create("inter.readout.b", {cfg.dim});
}

NodeId category_weight(Ctx& ctx, const ModelConfig& cfg, const char* direction,
                       RelationCategory t) {
  std::size_t ti = static_cast<std::size_t>(t);
  if (ti >= kRelationCategories)
    throw DomainError("relation category index " + std::to_string(ti) + " out of range");
  Tape& tape = ctx.tape;
  NodeId coef_row = tape.row(ctx.P(std::string("inter.coef.") + direction), ti);
  std::vector<NodeId> terms;
  terms.reserve(cfg.basis_blocks);
  for (std::size_t i = 0; i < cfg.basis_blocks; ++i) {
    NodeId basis = ctx.P(std::string("inter.basis.") + direction + "." + std::to_string(i));
    terms.push_back(tape.smul(tape.index(coef_row, i), basis));
  }
  return tape.sum(terms);
}

namespace {

// One W_t per category actually used, built lazily within a step.
struct WeightCache {
  std::array<NodeId, kRelationCategories> w{};
  std::array<bool, kRelationCategories> built{};

  NodeId get(Ctx& ctx, const ModelConfig& cfg, const char* direction, RelationCategory t) {
    std::size_t ti = static_cast<std::size_t>(t);
    if (!built[ti]) {
      w[ti] = category_weight(ctx, cfg, direction, t);
      built[ti] = true;
    }
    return w[ti];
  }
};

}  // namespace

std::vector<NodeId> inter_relation_step(Ctx& ctx, const ModelConfig& cfg,
                                        const InterState& state, const SceneGraph& sg,
                                        const HeteroGraph& h, NodeId c_l,
                                        std::size_t layer, Diagnostics* diag) {
  Tape& t = ctx.tape;
  NodeId w_gate = ctx.P("inter.gate.l" + std::to_string(layer));
  NodeId s_instr = t.dot(w_gate, c_l);
  WeightCache cache;

  std::vector<NodeId> next(state.e.size());
  for (std::size_t r = 0; r < sg.edges.size(); ++r) {
    const RelationEdge& edge = sg.edges[r];
    NodeId wt = cache.get(ctx, cfg, "s2r", h.relation_category[r]);
    NodeId alpha = t.sigmoid(t.sub(t.dot(w_gate, state.z[edge.subject]), s_instr));
    NodeId beta = t.sigmoid(t.sub(t.dot(w_gate, state.z[edge.object]), s_instr));
    if (diag) {
      std::string base = "inter.gate.l" + std::to_string(layer) + ".rel" + std::to_string(r);
      diag->gates.push_back({base + ".subj", t.value(alpha)[0]});
      diag->gates.push_back({base + ".obj", t.value(beta)[0]});
    }
    NodeId msg = t.add(t.smul(alpha, t.matvec(wt, state.z[edge.subject])),
                       t.smul(beta, t.matvec(wt, state.z[edge.object])));
    next[r] = t.add(state.e[r], t.relu(msg));
  }
  return next;
}

namespace {

// Softmax-attended, W_t-transformed sum over one direction of an object's
// category-t incident relations. Empty lists contribute nothing.
void direction_messages(Ctx& ctx, const std::vector<NodeId>& e_next,
                        const std::vector<std::size_t>& rels, NodeId wt,
                        NodeId w_attn, NodeId c_l, const std::string& diag_tag,
                        Diagnostics* diag, std::vector<NodeId>& out_terms) {
  if (rels.empty()) return;
  Tape& t = ctx.tape;
  std::vector<NodeId> scores;
  scores.reserve(rels.size());
  for (std::size_t r : rels)
    scores.push_back(t.dot(w_attn, t.concat({e_next[r], c_l})));
  NodeId alpha = t.softmax(t.concat(scores));
  if (diag) diag->attention.push_back({diag_tag, t.value(alpha).data});
  for (std::size_t k = 0; k < rels.size(); ++k)
    out_terms.push_back(t.smul(t.index(alpha, k), t.matvec(wt, e_next[rels[k]])));
}

}  // namespace

std::vector<NodeId> inter_object_step(Ctx& ctx, const ModelConfig& cfg,
                                      const InterState& state,
                                      const std::vector<NodeId>& e_next,
                                      const SceneGraph& sg, const HeteroGraph& h,
                                      NodeId c_l, std::size_t layer, Diagnostics* diag) {
  (void)sg;
  Tape& t = ctx.tape;
  NodeId w_attn = ctx.P("inter.r2s.attn.l" + std::to_string(layer));
  WeightCache cache;

  std::vector<NodeId> next(state.z.size());
  for (std::size_t u = 0; u < state.z.size(); ++u) {
    std::vector<NodeId> category_terms;
    for (std::size_t ti = 0; ti < kRelationCategories; ++ti) {
      RelationCategory cat = static_cast<RelationCategory>(ti);
      const std::vector<std::size_t>& out_rels = h.out_edges[u][ti];
      const std::vector<std::size_t>& in_rels = h.in_edges[u][ti];
      if (out_rels.empty() && in_rels.empty()) continue;
      NodeId wt = cache.get(ctx, cfg, "r2s", cat);
      std::string base = "inter.r2s.l" + std::to_string(layer) + ".obj" +
                         std::to_string(u) + ".cat" + std::to_string(ti);
      std::vector<NodeId> terms;
      direction_messages(ctx, e_next, out_rels, wt, w_attn, c_l, base + ".out", diag, terms);
      direction_messages(ctx, e_next, in_rels, wt, w_attn, c_l, base + ".in", diag, terms);
      category_terms.push_back(t.relu(t.sum(terms)));
    }
    if (category_terms.empty()) {
      next[u] = state.z[u];  // no incident relations: exact identity
      continue;
    }
    next[u] = t.add(state.z[u],
                    t.scale(t.sum(category_terms), 1.0 / double(kRelationCategories)));
  }
  return next;
}

InterState run_inter(Ctx& ctx, const ModelConfig& cfg, const InterState& init,
                     const SceneGraph& sg, const HeteroGraph& h,
                     const std::vector<NodeId>& instructions, Diagnostics* diag) {
  if (instructions.size() != cfg.iterations)
    throw ShapeError("expected " + std::to_string(cfg.iterations) +
                     " instructions, got " + std::to_string(instructions.size()));
  InterState state = init;
  for (std::size_t l = 0; l < cfg.iterations; ++l) {
    std::vector<NodeId> e_next = inter_relation_step(ctx, cfg, state, sg, h,
                                                     instructions[l], l, diag);
    state.z = inter_object_step(ctx, cfg, state, e_next, sg, h, instructions[l], l, diag);
    state.e = std::move(e_next);
  }
  return state;
}

InterLogits classify_inter(Ctx& ctx, const InterState& state) {
  Tape& t = ctx.tape;
  if (state.z.empty()) throw DomainError("cannot classify a graph with no objects");
  InterLogits out;
  out.objects = t.matmul(t.stack_rows(state.z), ctx.P("inter.cls.obj"));
  if (!state.e.empty()) {
    out.has_relations = true;
    out.relations = t.matmul(t.stack_rows(state.e), ctx.P("inter.cls.rel"));
  }
  return out;
}

NodeId loss_inter(Ctx& ctx, const InterLogits& logits,
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

NodeId readout_inter(Ctx& ctx, const ModelConfig& cfg, const InterState& state) {
  Tape& t = ctx.tape;
  if (state.z.empty()) throw DomainError("cannot read out a graph with no objects");
  NodeId zpool = t.mean(state.z);
  NodeId epool = state.e.empty()
                     ? t.leaf(Tensor(Shape{cfg.dim}, 0.0), "readout.epool.empty")
                     : t.mean(state.e);
  NodeId pooled = t.concat({zpool, epool});
  return t.relu(t.add(t.matvec(ctx.P("inter.readout.w"), pooled), ctx.P("inter.readout.b")));
}

}  // namespace graphqa
