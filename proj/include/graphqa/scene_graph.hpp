#pragma once

#include <cstddef>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

// Axis-aligned box with corners normalized to [0, 1].
struct BoundingBox {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  void validate() const;  // DomainError on out-of-range or inverted corners
  Tensor as_vector() const;  // {4} = [x1, y1, x2, y2]
};

// Tight box around two boxes: componentwise min of the low corners and max
// of the high corners.
BoundingBox box_union(const BoundingBox& a, const BoundingBox& b);

struct ObjectNode {
  std::size_t id = 0;
  std::size_t class_id = 0;
  std::vector<double> visual;  // length visual_dim
  BoundingBox box;
};

struct RelationEdge {
  std::size_t subject = 0;  // object id, edge direction subject -> object
  std::size_t object = 0;
  std::size_t class_id = 0;
};

struct SceneGraph {
  std::vector<ObjectNode> objects;
  std::vector<RelationEdge> edges;

  // Checks: ids dense 0..N-1 in order, endpoints in range, no self loops,
  // at most one edge per ordered pair, class ids below the configured counts,
  // visual vectors of the expected width, boxes valid.
  void validate(const ModelConfig& cfg) const;
};

// Tape-resident initial features for every object and relation.
struct InitialFeatures {
  std::vector<NodeId> objects;  // x_i, each {D}
  std::vector<NodeId> edges;    // x_{i->j}, each {D}, aligned with sg.edges
};

// x_i = W_c [W_v v_i ; W_b b_i ; c_i] with c_i the class embedding row.
NodeId object_feature(Ctx& ctx, const ModelConfig& cfg, const ObjectNode& node);

// x_{i->j} = W_r [x_i ; x_j ; b_{ij}] with b_{ij} the union box of the endpoints.
NodeId relation_feature(Ctx& ctx, const ModelConfig& cfg, const SceneGraph& sg,
                        const RelationEdge& edge, NodeId subject_feature,
                        NodeId object_feature_node);

InitialFeatures build_initial_features(Ctx& ctx, const ModelConfig& cfg,
                                       const SceneGraph& sg);

// Registers every parameter the feature assembly uses (call once per store).
void register_scene_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
