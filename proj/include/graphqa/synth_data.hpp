#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphqa/hetero_graph.hpp"
#include "graphqa/question_encoder.hpp"
#include "graphqa/scene_graph.hpp"

namespace graphqa {

// Generator knobs. A fixed world (per-class visual prototypes, vocabulary,
// relation rule) is shared by every seed so that differently-seeded splits
// test generalization rather than memorizing a new world.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t count = 200;
  std::size_t n_object_classes = 10;   // class 0 is the single person class
  std::size_t n_relation_classes = 9;  // three contiguous category blocks
  std::size_t visual_dim = 32;
  std::size_t min_objects = 4;
  std::size_t max_objects = 8;
  double edge_prob = 0.15;     // per ordered object pair
  double visual_noise = 0.1;   // stddev around the class prototype
  // question template mix (relative weights)
  double w_rel_query = 1.0;
  double w_obj_query = 1.0;
  double w_verify = 1.0;
  double w_choice = 1.0;

  void validate() const;  // ConfigError on inconsistency
};

struct Sample {
  std::size_t id = 0;
  SceneGraph graph;
  Question question;
};

struct Dataset {
  std::vector<std::string> vocab;         // question token id -> word
  std::vector<std::string> answer_vocab;  // open-answer id -> word
  CategoryMap category_map;
  std::size_t n_object_classes = 0;
  std::size_t n_relation_classes = 0;
  std::size_t visual_dim = 0;
  std::vector<Sample> samples;
};

// Relation class of any generated edge is a fixed function of its endpoint
// classes, so relation identity is recoverable from object appearance.
std::size_t relation_rule(std::size_t subj_class, std::size_t obj_class,
                          std::size_t n_relation_classes);

// Object class 0 -> Person, rest NonPerson; relation classes in three
// contiguous, equal blocks -> Spatial, Temporal, Contact.
CategoryMap default_category_map(std::size_t n_object_classes,
                                 std::size_t n_relation_classes);

Dataset generate(const SynthConfig& cfg);

void write_jsonl(const Dataset& data, const std::string& path);
Dataset read_jsonl(const std::string& path);

// --- answer-derivation oracles (what a question's answer must be, read
//     directly off the scene graph) ---

// The single relation class among edges whose endpoints have these classes,
// or nullopt when absent/ambiguous.
std::optional<std::size_t> unique_relation_class_between(const SceneGraph& g,
                                                         std::size_t subj_class,
                                                         std::size_t obj_class);

// The single object class reached from a subj_class node via rel_class,
// or nullopt when absent/ambiguous.
std::optional<std::size_t> unique_object_class_for(const SceneGraph& g,
                                                   std::size_t subj_class,
                                                   std::size_t rel_class);

bool relation_exists(const SceneGraph& g, std::size_t subj_class, std::size_t rel_class,
                     std::size_t obj_class);

// Re-derives the expected answer of any generated sample from its scene
// graph and question tokens alone; nullopt when the question is not
// answerable by the template rules (never the case for generator output).
std::optional<std::size_t> derive_answer(const Dataset& data, const Sample& s);

}  // namespace graphqa
