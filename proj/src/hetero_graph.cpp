#include "graphqa/hetero_graph.hpp"

#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

const char* to_string(ObjectCategory c) {
  switch (c) {
    case ObjectCategory::Person: return "person";
    case ObjectCategory::NonPerson: return "non-person";
  }
  return "?";
}

const char* to_string(RelationCategory c) {
  switch (c) {
    case RelationCategory::Spatial: return "spatial";
    case RelationCategory::Temporal: return "temporal";
    case RelationCategory::Contact: return "contact";
  }
  return "?";
}

void CategoryMap::validate(const ModelConfig& cfg) const {
  if (object_class_to_category.size() != cfg.n_object_classes)
    throw ConfigError("category map covers " +
                      std::to_string(object_class_to_category.size()) +
                      " object classes, model has " +
                      std::to_string(cfg.n_object_classes));
  if (relation_class_to_category.size() != cfg.n_relation_classes)
    throw ConfigError("category map covers " +
                      std::to_string(relation_class_to_category.size()) +
                      " relation classes, model has " +
                      std::to_string(cfg.n_relation_classes));
}

ObjectCategory assign_object_category(const std::vector<double>& class_logits,
                                      const CategoryMap& map) {
  if (class_logits.size() != map.object_class_to_category.size())
    throw ShapeError("got " + std::to_string(class_logits.size()) +
                     " object logits for a map over " +
                     std::to_string(map.object_class_to_category.size()) +
                     " classes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < class_logits.size(); ++i)
    if (class_logits[i] > class_logits[best]) best = i;
  return map.object_class_to_category[best];
}

void register_hetero_params(ParameterStore& params, const ModelConfig& cfg) {
  params.create("hetero.cat", {kRelationCategories, cfg.dim});
}

NodeId relation_category_logits(Ctx& ctx, NodeId x_uv) {
  return ctx.tape.softmax(ctx.tape.matvec(ctx.P("hetero.cat"), x_uv));
}

HeteroGraph build_hetero_graph(Ctx& ctx, const SceneGraph& sg,
                               const InitialFeatures& features,
                               const CategoryMap& map,
                               const std::vector<std::size_t>& object_class_ids,
                               bool teacher_forced, Diagnostics* diag) {
  if (object_class_ids.size() != sg.objects.size())
    throw ShapeError("got " + std::to_string(object_class_ids.size()) +
                     " object class ids for " + std::to_string(sg.objects.size()) +
                     " objects");
  HeteroGraph h;
  h.object_category.reserve(sg.objects.size());
  for (std::size_t id : object_class_ids) {
    if (id >= map.object_class_to_category.size())
      throw LookupError("object class " + std::to_string(id) + " not in category map");
    h.object_category.push_back(map.object_class_to_category[id]);
  }

  h.relation_category.reserve(sg.edges.size());
  for (std::size_t r = 0; r < sg.edges.size(); ++r) {
    if (teacher_forced) {
      std::size_t cls = sg.edges[r].class_id;
      if (cls >= map.relation_class_to_category.size())
        throw LookupError("relation class " + std::to_string(cls) +
                          " not in category map");
      h.relation_category.push_back(map.relation_class_to_category[cls]);
    } else {
      NodeId probs = relation_category_logits(ctx, features.edges[r]);
      const Tensor& p = ctx.tape.value(probs);
      if (diag) diag->attention.push_back({"hetero.cat.rel" + std::to_string(r), p.data});
      h.relation_category.push_back(static_cast<RelationCategory>(argmax(p.data)));
    }
  }

  h.out_edges.resize(sg.objects.size());
  h.in_edges.resize(sg.objects.size());
  for (std::size_t r = 0; r < sg.edges.size(); ++r) {
    std::size_t t = static_cast<std::size_t>(h.relation_category[r]);
    h.out_edges[sg.edges[r].subject][t].push_back(r);
    h.in_edges[sg.edges[r].object][t].push_back(r);
  }
  return h;
}

}  // namespace graphqa
