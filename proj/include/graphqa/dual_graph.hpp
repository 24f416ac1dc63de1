#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "graphqa/scene_graph.hpp"

namespace graphqa {

// One undirected adjacency between two relations that share an endpoint.
struct DualEdge {
  std::size_t a = 0;  // relation index, a < b
  std::size_t b = 0;
  std::size_t shared_object = 0;  // smallest object id the two relations share
};

// Relations become nodes; two relations are adjacent when they touch a common
// object, regardless of the direction either relation points.
struct DualGraph {
  std::size_t n_relations = 0;
  std::vector<DualEdge> edges;                       // a < b, sorted, unique
  std::vector<std::vector<std::size_t>> neighbors;   // per relation, ascending

  const std::vector<std::size_t>& neighbors_of(std::size_t relation) const;
};

DualGraph build_dual_graph(const SceneGraph& sg);

}  // namespace graphqa
