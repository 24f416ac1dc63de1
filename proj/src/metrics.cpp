#include "graphqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "graphqa/errors.hpp"

#include <json.hpp>

namespace graphqa {

namespace {

using TripletKey = std::tuple<std::size_t, std::size_t, std::size_t>;

TripletKey key(const Triplet& t) { return {t.subject, t.object, t.relation_class}; }

void rank(std::vector<RankedPrediction>& preds) {
  std::sort(preds.begin(), preds.end(), [](const RankedPrediction& a, const RankedPrediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.id < b.id;
  });
}

}  // namespace

double recall_at_k(std::vector<RankedPrediction> predictions,
                   const std::vector<Triplet>& ground_truth, std::size_t k) {
  if (ground_truth.empty()) throw DomainError("recall is undefined without ground truth");
  rank(predictions);
  std::set<TripletKey> gt;
  for (const Triplet& t : ground_truth) gt.insert(key(t));
  std::size_t denom = gt.size();
  std::set<TripletKey> seen;
  std::size_t hits = 0;
  std::size_t limit = std::min<std::size_t>(k, predictions.size());
  for (std::size_t i = 0; i < limit; ++i) {
    TripletKey tk = key(predictions[i].triplet);
    if (gt.count(tk) && seen.insert(tk).second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(denom);
}

double mean_recall_at_k(const std::vector<RankedPrediction>& predictions,
                        const std::vector<Triplet>& ground_truth, std::size_t k) {
  if (ground_truth.empty()) throw DomainError("mean recall is undefined without ground truth");
  std::set<std::size_t> classes;
  for (const Triplet& t : ground_truth) classes.insert(t.relation_class);
  double total = 0.0;
  for (std::size_t c : classes) {
    std::vector<Triplet> gt_c;
    for (const Triplet& t : ground_truth)
      if (t.relation_class == c) gt_c.push_back(t);
    // same global top-K ranking; only class-c entries can match class-c GT
    total += recall_at_k(predictions, gt_c, k);
  }
  return total / static_cast<double>(classes.size());
}

double qa_accuracy(const std::vector<std::size_t>& predictions,
                   const std::vector<std::size_t>& answers) {
  if (predictions.size() != answers.size())
    throw DomainError("got " + std::to_string(predictions.size()) + " predictions for " +
                      std::to_string(answers.size()) + " answers");
  if (predictions.empty()) throw DomainError("accuracy of an empty prediction set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == answers[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

RecallAccumulator::RecallAccumulator(std::size_t n_relation_classes)
    : n_classes_(n_relation_classes),
      hits50_(n_relation_classes, 0),
      hits100_(n_relation_classes, 0),
      support_(n_relation_classes, 0) {}

void RecallAccumulator::add_sample(const std::vector<RankedPrediction>& predictions,
                                   const std::vector<Triplet>& ground_truth) {
  if (ground_truth.empty()) return;  // no relation instances to score
  sum_r50_ += recall_at_k(predictions, ground_truth, 50);
  sum_r100_ += recall_at_k(predictions, ground_truth, 100);
  ++graph_samples_;

  std::vector<RankedPrediction> ranked = predictions;
  rank(ranked);
  for (std::size_t k : {std::size_t{50}, std::size_t{100}}) {
    std::set<TripletKey> gt;
    for (const Triplet& t : ground_truth) gt.insert(key(t));
    std::set<TripletKey> matched;
    std::size_t limit = std::min<std::size_t>(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i) {
      TripletKey tk = key(ranked[i].triplet);
      if (gt.count(tk) && matched.insert(tk).second) {
        std::size_t c = ranked[i].triplet.relation_class;
        if (c < n_classes_) (k == 50 ? hits50_ : hits100_)[c] += 1;
      }
    }
  }
  std::set<TripletKey> counted;
  for (const Triplet& t : ground_truth)
    if (t.relation_class < n_classes_ && counted.insert(key(t)).second)
      support_[t.relation_class] += 1;
}

void RecallAccumulator::add_answer(bool correct) {
  ++answers_;
  if (correct) ++correct_;
}

RecallReport RecallAccumulator::finish() const {
  RecallReport r;
  r.n_samples = answers_;
  r.class_support = support_;
  r.class_recall_50.assign(n_classes_, 0.0);
  r.class_recall_100.assign(n_classes_, 0.0);
  if (graph_samples_ > 0) {
    r.r50 = sum_r50_ / static_cast<double>(graph_samples_);
    r.r100 = sum_r100_ / static_cast<double>(graph_samples_);
  }
  std::size_t present = 0;
  double m50 = 0.0, m100 = 0.0;
  for (std::size_t c = 0; c < n_classes_; ++c) {
    if (support_[c] == 0) continue;
    r.class_recall_50[c] = static_cast<double>(hits50_[c]) / static_cast<double>(support_[c]);
    r.class_recall_100[c] = static_cast<double>(hits100_[c]) / static_cast<double>(support_[c]);
    m50 += r.class_recall_50[c];
    m100 += r.class_recall_100[c];
    ++present;
  }
  if (present > 0) {
    r.mr50 = m50 / static_cast<double>(present);
    r.mr100 = m100 / static_cast<double>(present);
  }
  if (answers_ > 0) r.accuracy = static_cast<double>(correct_) / static_cast<double>(answers_);
  return r;
}

std::string RecallReport::to_json() const {
  nlohmann::json j;
  j["r50"] = r50;
  j["r100"] = r100;
  j["mr50"] = mr50;
  j["mr100"] = mr100;
  j["accuracy"] = accuracy;
  j["n_samples"] = n_samples;
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < class_support.size(); ++c) {
    if (class_support[c] == 0) continue;
    per_class.push_back({{"class", c},
                         {"support", class_support[c]},
                         {"recall50", class_recall_50[c]},
                         {"recall100", class_recall_100[c]}});
  }
  j["per_class"] = per_class;
  return j.dump();
}

std::string RecallReport::to_table() const {
  std::ostringstream os;
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%6.2f", v * 100.0);
    return std::string(buf);
  };
  os << "metric      value\n";
  os << "R@50       " << pct(r50) << "\n";
  os << "R@100      " << pct(r100) << "\n";
  os << "mR@50      " << pct(mr50) << "\n";
  os << "mR@100     " << pct(mr100) << "\n";
  os << "accuracy   " << pct(accuracy) << "\n";
  os << "samples    " << n_samples << "\n";
  os << "\nclass  support  R@50    R@100\n";
  for (std::size_t c = 0; c < class_support.size(); ++c) {
    if (class_support[c] == 0) continue;
    char line[80];
    std::snprintf(line, sizeof(line), "%5zu  %7zu  %6.2f  %6.2f\n", c, class_support[c],
                  class_recall_50[c] * 100.0, class_recall_100[c] * 100.0);
    os << line;
  }
  return os.str();
}

}  // namespace graphqa
