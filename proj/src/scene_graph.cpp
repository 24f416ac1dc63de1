#include "graphqa/scene_graph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

void BoundingBox::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(x1) || !in01(y1) || !in01(x2) || !in01(y2))
    throw DomainError("bounding box corner outside [0,1]");
  if (x1 > x2 || y1 > y2)
    throw DomainError("bounding box has inverted corners");
}

Tensor BoundingBox::as_vector() const {
  return Tensor::vec({x1, y1, x2, y2});
}

BoundingBox box_union(const BoundingBox& a, const BoundingBox& b) {
  BoundingBox u;
  u.x1 = std::min(a.x1, b.x1);
  u.y1 = std::min(a.y1, b.y1);
  u.x2 = std::max(a.x2, b.x2);
  u.y2 = std::max(a.y2, b.y2);
  return u;
}

void SceneGraph::validate(const ModelConfig& cfg) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const ObjectNode& o = objects[i];
    if (o.id != i)
      throw DomainError("object ids must be dense and ordered: slot " +
                        std::to_string(i) + " holds id " + std::to_string(o.id));
    if (o.class_id >= cfg.n_object_classes)
      throw DomainError("object class " + std::to_string(o.class_id) +
                        " out of range");
    if (o.visual.size() != cfg.visual_dim)
      throw DomainError("object " + std::to_string(i) + " visual vector has " +
                        std::to_string(o.visual.size()) + " entries, expected " +
                        std::to_string(cfg.visual_dim));
    o.box.validate();
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const RelationEdge& e : edges) {
    if (e.subject >= objects.size() || e.object >= objects.size())
      throw DomainError("relation endpoint out of range");
    if (e.subject == e.object)
      throw DomainError("relation may not loop object " +
                        std::to_string(e.subject) + " to itself");
    if (e.class_id >= cfg.n_relation_classes)
      throw DomainError("relation class " + std::to_string(e.class_id) +
                        " out of range");
    if (!seen.insert({e.subject, e.object}).second)
      throw DomainError("duplicate relation " + std::to_string(e.subject) +
                        "->" + std::to_string(e.object));
  }
}

void register_scene_params(ParameterStore& params, const ModelConfig& cfg) {
  params.create("sg.wv", {cfg.visual_proj_dim, cfg.visual_dim});
  params.create("sg.wb", {cfg.box_proj_dim, 4});
  params.create("sg.wc", {cfg.dim, cfg.visual_proj_dim + cfg.box_proj_dim +
                                       cfg.class_embed_dim});
  params.create("sg.wr", {cfg.dim, 2 * cfg.dim + 4});
  params.create("embed.object_class", {cfg.n_object_classes, cfg.class_embed_dim});
}

NodeId object_feature(Ctx& ctx, const ModelConfig& cfg, const ObjectNode& node) {
  (void)cfg;
  Tape& t = ctx.tape;
  NodeId visual = t.leaf(Tensor::vec(node.visual), "object.visual");
  NodeId box = t.leaf(node.box.as_vector(), "object.box");

  NodeId pv = t.matvec(ctx.P("sg.wv"), visual);
  NodeId pb = t.matvec(ctx.P("sg.wb"), box);
  NodeId cls = t.row(ctx.P("embed.object_class"), node.class_id);
  NodeId stacked = t.concat({pv, pb, cls});
  return t.matvec(ctx.P("sg.wc"), stacked);
}

NodeId relation_feature(Ctx& ctx, const ModelConfig& cfg, const SceneGraph& sg,
                        const RelationEdge& edge, NodeId subject_feature,
                        NodeId object_feature_node) {
  (void)cfg;
  Tape& t = ctx.tape;
  BoundingBox u =
      box_union(sg.objects[edge.subject].box, sg.objects[edge.object].box);
  NodeId ubox = t.leaf(u.as_vector(), "relation.union_box");
  NodeId stacked = t.concat({subject_feature, object_feature_node, ubox});
  return t.matvec(ctx.P("sg.wr"), stacked);
}

InitialFeatures build_initial_features(Ctx& ctx, const ModelConfig& cfg,
                                       const SceneGraph& sg) {
  sg.validate(cfg);
  InitialFeatures out;
  out.objects.reserve(sg.objects.size());
  for (const ObjectNode& node : sg.objects)
    out.objects.push_back(object_feature(ctx, cfg, node));
  out.edges.reserve(sg.edges.size());
  for (const RelationEdge& e : sg.edges)
    out.edges.push_back(relation_feature(ctx, cfg, sg, e, out.objects[e.subject],
                                         out.objects[e.object]));
  return out;
}

}  // namespace graphqa
