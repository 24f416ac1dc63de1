#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/metrics.hpp"
#include "graphqa/model.hpp"
#include "graphqa/synth_data.hpp"

namespace graphqa {

struct TrainConfig {
  double lr = 0.008;
  std::size_t batch_size = 6;
  double weight_decay = 1e-5;
  std::size_t epochs = 300;
  double ema_decay = 0.999;  // 0 disables the moving average
  std::uint64_t seed = 0;
  Mode mode = Mode::IntraInter;
  std::size_t iterations = 3;
  std::size_t basis_blocks = 4;
  std::size_t dim = 64;
  // Stop once training accuracy reaches this (confirmed by a clean pass);
  // values above 1 disable early stopping.
  double target_accuracy = 2.0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double loss_intra = 0.0;
  double loss_inter = 0.0;
  double loss_answer = 0.0;
  double accuracy = 0.0;  // running training accuracy over the epoch
  // whether loss == loss_intra + loss_inter + loss_answer held bitwise at
  // every step of the epoch
  bool additive = true;

  std::string to_json() const;
};

struct Checkpoint {
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<double> value;
    std::vector<double> m, v;   // Adam moments
    std::vector<double> ema;    // empty when EMA disabled
  };

  std::size_t format_version = 1;
  ModelConfig model;
  std::uint64_t seed = 0;
  double ema_decay = 0.0;
  std::size_t adam_step = 0;
  std::string rng_state;
  std::vector<Entry> entries;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<EpochStats> log;
};

// Adam (beta 0.9/0.999, eps 1e-8) with decoupled weight decay over the
// summed loss; deterministic given the seed. Aborts with a DomainError
// naming the first non-finite tensor if the loss diverges.
TrainOutcome train(const TrainConfig& cfg, const Dataset& data);

// Deterministic evaluation with bias-corrected EMA weights when present.
// QA accuracy plus relation-triplet recall against ground-truth edges.
RecallReport evaluate(const Checkpoint& ckpt, const Dataset& data);

// Trains one model per entry of `levels` (message-passing iteration counts)
// under identical budgets and reports held-out accuracy for each.
std::vector<std::pair<std::size_t, double>> sweep_iterations(
    const TrainConfig& base, const Dataset& train_data, const Dataset& eval_data,
    const std::vector<std::size_t>& levels);

}  // namespace graphqa
