#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace graphqa {

// One labeled relation instance: edge endpoints plus a relation class.
struct Triplet {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::size_t relation_class = 0;

  bool operator==(const Triplet&) const = default;
};

struct RankedPrediction {
  Triplet triplet;
  double confidence = 0.0;
  std::size_t id = 0;  // tie order: higher confidence first, then lower id
};

// |top-K ∩ GT| / |GT| on one instance; predictions are ranked internally by
// (confidence desc, id asc). Ground-truth duplicates count once.
double recall_at_k(std::vector<RankedPrediction> predictions,
                   const std::vector<Triplet>& ground_truth, std::size_t k);

// Unweighted mean over relation classes present in the ground truth of that
// class's recall within the global top-K.
double mean_recall_at_k(const std::vector<RankedPrediction>& predictions,
                        const std::vector<Triplet>& ground_truth, std::size_t k);

// Exact-match fraction.
double qa_accuracy(const std::vector<std::size_t>& predictions,
                   const std::vector<std::size_t>& answers);

// Dataset-level aggregate. R@K averages per-sample recalls; per-class recalls
// pool hits/totals over the whole dataset and mR@K averages those over
// classes with at least one ground-truth instance.
struct RecallReport {
  double r50 = 0.0, r100 = 0.0;
  double mr50 = 0.0, mr100 = 0.0;
  std::vector<double> class_recall_50;   // indexed by relation class
  std::vector<double> class_recall_100;
  std::vector<std::size_t> class_support;  // ground-truth count per class
  double accuracy = 0.0;
  std::size_t n_samples = 0;

  std::string to_json() const;
  std::string to_table() const;  // aligned plain text
};

// Incremental builder fed one evaluated sample at a time.
class RecallAccumulator {
 public:
  explicit RecallAccumulator(std::size_t n_relation_classes);

  void add_sample(const std::vector<RankedPrediction>& predictions,
                  const std::vector<Triplet>& ground_truth);
  void add_answer(bool correct);

  RecallReport finish() const;

 private:
  std::size_t n_classes_;
  double sum_r50_ = 0.0, sum_r100_ = 0.0;
  std::size_t graph_samples_ = 0;
  std::vector<std::size_t> hits50_, hits100_, support_;
  std::size_t answers_ = 0, correct_ = 0;
};

}  // namespace graphqa
