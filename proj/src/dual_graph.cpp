#include "graphqa/dual_graph.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

const std::vector<std::size_t>& DualGraph::neighbors_of(std::size_t relation) const {
  if (relation >= n_relations)
    throw LookupError("no relation with index " + std::to_string(relation) +
                      " in dual graph of " + std::to_string(n_relations));
  return neighbors[relation];
}

DualGraph build_dual_graph(const SceneGraph& sg) {
  DualGraph dual;
  dual.n_relations = sg.edges.size();
  dual.neighbors.assign(dual.n_relations, {});

  // Incidence lists: for each object, which relations touch it.  Every pair of
  // relations within one list shares that object, so only those pairs need to
  // be considered.  A pair sharing both endpoints shows up in two lists; the
  // map keeps one dual edge and the smaller shared object id wins.
  std::vector<std::vector<std::size_t>> incident(sg.objects.size());
  for (std::size_t r = 0; r < sg.edges.size(); ++r) {
    incident[sg.edges[r].subject].push_back(r);
    incident[sg.edges[r].object].push_back(r);
  }

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (std::size_t obj = 0; obj < incident.size(); ++obj) {
    const std::vector<std::size_t>& rels = incident[obj];
    for (std::size_t i = 0; i < rels.size(); ++i) {
      for (std::size_t j = i + 1; j < rels.size(); ++j) {
        std::size_t a = std::min(rels[i], rels[j]);
        std::size_t b = std::max(rels[i], rels[j]);
        if (a == b) continue;  // same relation listed via both endpoints? impossible: no self loops
        auto [it, inserted] = shared.insert({{a, b}, obj});
        if (!inserted) it->second = std::min(it->second, obj);
      }
    }
  }

  dual.edges.reserve(shared.size());
  for (const auto& [pair, obj] : shared) {
    dual.edges.push_back({pair.first, pair.second, obj});
    dual.neighbors[pair.first].push_back(pair.second);
    dual.neighbors[pair.second].push_back(pair.first);
  }
  for (auto& list : dual.neighbors) std::sort(list.begin(), list.end());
  return dual;
}

}  // namespace graphqa
