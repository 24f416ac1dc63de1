#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "graphqa/diagnostics.hpp"
#include "graphqa/scene_graph.hpp"

namespace graphqa {

enum class ObjectCategory : std::size_t { Person = 0, NonPerson = 1 };
enum class RelationCategory : std::size_t { Spatial = 0, Temporal = 1, Contact = 2 };

inline constexpr std::size_t kObjectCategories = 2;
inline constexpr std::size_t kRelationCategories = 3;

const char* to_string(ObjectCategory c);
const char* to_string(RelationCategory c);

// Total maps from fine-grained class ids to coarse categories.
struct CategoryMap {
  std::vector<ObjectCategory> object_class_to_category;      // length = #object classes
  std::vector<RelationCategory> relation_class_to_category;  // length = #relation classes

  // ConfigError unless every class id below the configured counts is mapped.
  void validate(const ModelConfig& cfg) const;
};

// Argmax over class logits, then category lookup.  Ties go to the lower class id.
ObjectCategory assign_object_category(const std::vector<double>& class_logits,
                                      const CategoryMap& map);

// Softmax over the three relation categories from a relation feature (dim D).
NodeId relation_category_logits(Ctx& ctx, NodeId x_uv);

// Scene graph plus a coarse category on every object and relation, with the
// incidence structure the typed message passing consumes.
struct HeteroGraph {
  std::vector<ObjectCategory> object_category;      // per object id
  std::vector<RelationCategory> relation_category;  // per relation index

  // out_edges[u][t]: relation indices with subject u and category t, ascending.
  // in_edges[v][t]: relation indices with object v and category t, ascending.
  std::vector<std::array<std::vector<std::size_t>, kRelationCategories>> out_edges;
  std::vector<std::array<std::vector<std::size_t>, kRelationCategories>> in_edges;
};

// Categories come from the ground-truth class ids through `map` when
// `teacher_forced`, otherwise from argmax of the learned category classifier
// applied to each relation feature (object categories always map from the
// provided per-object class ids, which the caller chooses: ground truth during
// training, classifier argmax at inference).
HeteroGraph build_hetero_graph(Ctx& ctx, const SceneGraph& sg,
                               const InitialFeatures& features,
                               const CategoryMap& map,
                               const std::vector<std::size_t>& object_class_ids,
                               bool teacher_forced, Diagnostics* diag = nullptr);

void register_hetero_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
