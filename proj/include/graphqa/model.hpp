#pragma once

#include <cstdint>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/diagnostics.hpp"
#include "graphqa/synth_data.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

struct ForwardResult {
  // Logged loss and its three components: loss = loss_intra + loss_inter +
  // loss_answer, summed left to right. Disabled branches contribute exact
  // zero-leaf components.
  NodeId loss = 0;
  NodeId loss_intra = 0;
  NodeId loss_inter = 0;
  NodeId loss_answer = 0;
  // What backward() should run on: the logged loss plus the relation-category
  // classifier's auxiliary term (trained on detached features, so it adjusts
  // only its own weights and is deliberately excluded from the logged loss).
  NodeId objective = 0;

  std::size_t predicted_answer = 0;  // answer-vocab id (open) or choice index

  // Per-object / per-relation class distributions for metrics (plain values;
  // the intra+inter mode averages the two classifiers' distributions).
  std::vector<std::vector<double>> object_probs;
  std::vector<std::vector<double>> relation_probs;
};

class Model {
 public:
  // cfg.vocab_size / cfg.answer_vocab_size must already reflect the dataset.
  Model(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

  // One full pass over a sample. `training` selects teacher forcing for the
  // heterogeneous graph's categories; at inference they come from the learned
  // classifiers. Fills diag with every attention distribution and gate.
  ForwardResult forward(Tape& tape, const Sample& sample, const CategoryMap& map,
                        bool training, Diagnostics* diag = nullptr);

 private:
  ModelConfig cfg_;
  ParameterStore store_;
};

// Model dimensions implied by a dataset (vocab sizes, class counts, visual dim).
ModelConfig config_for_dataset(ModelConfig base, const Dataset& data);

}  // namespace graphqa
