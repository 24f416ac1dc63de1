#include "graphqa/model.hpp"

#include <string>

#include "graphqa/answer_head.hpp"
#include "graphqa/dual_graph.hpp"
#include "graphqa/errors.hpp"
#include "graphqa/inter_mp.hpp"
#include "graphqa/intra_mp.hpp"

namespace graphqa {

ModelConfig config_for_dataset(ModelConfig base, const Dataset& data) {
  base.vocab_size = data.vocab.size();
  base.answer_vocab_size = data.answer_vocab.size();
  base.n_object_classes = data.n_object_classes;
  base.n_relation_classes = data.n_relation_classes;
  base.visual_dim = data.visual_dim;
  return base;
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg), store_(seed) {
  if (cfg_.vocab_size == 0 || cfg_.answer_vocab_size == 0)
    throw ConfigError("model needs nonzero vocabulary sizes (set from the dataset)");
  // Every parameter exists in every mode so checkpoints stay interchangeable.
  register_scene_params(store_, cfg_);
  register_question_params(store_, cfg_);
  register_intra_params(store_, cfg_);
  register_inter_params(store_, cfg_);
  register_hetero_params(store_, cfg_);
  register_answer_params(store_, cfg_);
}

namespace {

// Class distributions for metrics, as plain values. `a` and optionally `b`
// are logits matrices over the same rows; with both present the two softmax
// distributions are averaged.
std::vector<std::vector<double>> row_distributions(Tape& tape, NodeId a, bool has_b,
                                                   NodeId b) {
  const Tensor& A = tape.value(a);
  std::vector<std::vector<double>> out;
  out.reserve(A.rows());
  for (std::size_t r = 0; r < A.rows(); ++r) {
    std::vector<double> row(A.data.begin() + static_cast<std::ptrdiff_t>(r * A.cols()),
                            A.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * A.cols()));
    std::vector<double> p = softmax_values(row);
    if (has_b) {
      const Tensor& B = tape.value(b);
      std::vector<double> rowb(B.data.begin() + static_cast<std::ptrdiff_t>(r * B.cols()),
                               B.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * B.cols()));
      std::vector<double> pb = softmax_values(rowb);
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.5 * (p[i] + pb[i]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

ForwardResult Model::forward(Tape& tape, const Sample& sample, const CategoryMap& map,
                             bool training, Diagnostics* diag) {
  map.validate(cfg_);
  Ctx ctx(tape, store_);
  const SceneGraph& g = sample.graph;
  InitialFeatures feats = build_initial_features(ctx, cfg_, g);

  EncodedQuestion enc = encode_question(ctx, cfg_, sample.question.tokens);
  std::vector<NodeId> instructions;
  instructions.reserve(cfg_.iterations);
  for (std::size_t l = 0; l < cfg_.iterations; ++l)
    instructions.push_back(question_instruction(ctx, cfg_, enc, l, diag));

  std::vector<std::size_t> object_labels, relation_labels;
  for (const ObjectNode& o : g.objects) object_labels.push_back(o.class_id);
  for (const RelationEdge& e : g.edges) relation_labels.push_back(e.class_id);

  bool use_intra = cfg_.mode != Mode::Inter;
  bool use_inter = cfg_.mode != Mode::Intra;

  ForwardResult out;
  NodeId p_d = 0, p_h = 0;
  IntraLogits intra_logits;
  InterLogits inter_logits;

  if (use_intra) {
    DualGraph dual = build_dual_graph(g);
    std::vector<std::vector<std::size_t>> adj = object_adjacency(g);
    IntraState init{feats.objects, feats.edges};
    IntraState fin = run_intra(ctx, cfg_, init, adj, dual, instructions, diag);
    intra_logits = classify_intra(ctx, fin);
    out.loss_intra = loss_intra(ctx, intra_logits, object_labels, relation_labels);
    p_d = readout_intra(ctx, cfg_, fin);
  } else {
    out.loss_intra = tape.leaf(Tensor::scalar(0.0), "loss.intra.disabled");
    p_d = tape.leaf(Tensor(Shape{cfg_.dim}, 0.0), "readout.intra.disabled");
  }

  bool have_aux = false;
  NodeId aux = 0;
  if (use_inter) {
    // Object categories: ground truth while training; at inference from the
    // object classifier (intra's when that stack ran, else inter's applied to
    // the initial features). The categories steer only bookkeeping, so this
    // is computed on plain values.
    std::vector<std::size_t> class_ids;
    if (training) {
      class_ids = object_labels;
    } else if (use_intra) {
      const Tensor& logits = tape.value(intra_logits.objects);
      for (std::size_t r = 0; r < logits.rows(); ++r) {
        std::vector<double> row(
            logits.data.begin() + static_cast<std::ptrdiff_t>(r * logits.cols()),
            logits.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * logits.cols()));
        class_ids.push_back(argmax(row));
      }
    } else {
      const Tensor& w = store_.get("inter.cls.obj").value;  // {D, C}
      for (NodeId f : feats.objects) {
        const Tensor& x = tape.value(f);
        std::vector<double> scores(w.cols(), 0.0);
        for (std::size_t d = 0; d < w.rows(); ++d)
          for (std::size_t c = 0; c < w.cols(); ++c) scores[c] += x[d] * w.at(d, c);
        class_ids.push_back(argmax(scores));
      }
    }
    HeteroGraph h = build_hetero_graph(ctx, g, feats, map, class_ids, training, diag);

    InterState init{feats.objects, feats.edges};
    InterState fin = run_inter(ctx, cfg_, init, g, h, instructions, diag);
    inter_logits = classify_inter(ctx, fin);
    out.loss_inter = loss_inter(ctx, inter_logits, object_labels, relation_labels);
    p_h = readout_inter(ctx, cfg_, fin);

    // The category classifier never feeds the teacher-forced training path,
    // so train it on the side against the ground-truth categories; detaching
    // its inputs keeps this from steering the feature stack.
    if (!g.edges.empty()) {
      std::vector<NodeId> rows;
      std::vector<std::size_t> cat_labels;
      NodeId w_cat = ctx.P("hetero.cat");
      for (std::size_t r = 0; r < g.edges.size(); ++r) {
        rows.push_back(tape.matvec(w_cat, tape.detach(feats.edges[r])));
        cat_labels.push_back(static_cast<std::size_t>(
            map.relation_class_to_category[g.edges[r].class_id]));
      }
      aux = tape.cross_entropy_rows(tape.stack_rows(rows), cat_labels);
      have_aux = true;
    }
  } else {
    out.loss_inter = tape.leaf(Tensor::scalar(0.0), "loss.inter.disabled");
    p_h = tape.leaf(Tensor(Shape{cfg_.dim}, 0.0), "readout.inter.disabled");
  }

  NodeId fused = fuse_readouts(ctx, p_d, p_h, enc.summary, diag);
  const Question& q = sample.question;
  if (q.type == QuestionType::Open) {
    if (q.answer >= cfg_.answer_vocab_size)
      throw DomainError("answer id " + std::to_string(q.answer) +
                        " outside answer vocabulary");
    NodeId logits = open_logits(ctx, fused, enc.summary);
    out.loss_answer = tape.cross_entropy(logits, q.answer);
    out.predicted_answer = argmax(tape.value(logits).data);
  } else {
    if (q.choices.size() != 5)
      throw DomainError("multiple choice question needs exactly 5 choices, got " +
                        std::to_string(q.choices.size()));
    std::vector<NodeId> encoded;
    encoded.reserve(5);
    for (const std::vector<std::size_t>& choice : q.choices)
      encoded.push_back(encode_question(ctx, cfg_, choice).summary);
    ChoiceScores cs = choice_scores(ctx, fused, encoded);
    if (diag) diag->attention.push_back({"answer.choice", tape.value(cs.probs).data});
    if (q.answer >= 5)
      throw DomainError("choice answer index " + std::to_string(q.answer) + " out of range");
    out.loss_answer = tape.cross_entropy(cs.scores, q.answer);
    out.predicted_answer = cs.predicted;
  }

  out.loss = total_loss(ctx, out.loss_intra, out.loss_inter, out.loss_answer);
  out.objective = have_aux ? tape.add(out.loss, aux) : out.loss;

  if (use_intra && use_inter) {
    out.object_probs = row_distributions(tape, intra_logits.objects, true, inter_logits.objects);
    if (intra_logits.has_relations)
      out.relation_probs =
          row_distributions(tape, intra_logits.relations, true, inter_logits.relations);
  } else if (use_intra) {
    out.object_probs = row_distributions(tape, intra_logits.objects, false, 0);
    if (intra_logits.has_relations)
      out.relation_probs = row_distributions(tape, intra_logits.relations, false, 0);
  } else {
    out.object_probs = row_distributions(tape, inter_logits.objects, false, 0);
    if (inter_logits.has_relations)
      out.relation_probs = row_distributions(tape, inter_logits.relations, false, 0);
  }
  return out;
}

}  // namespace graphqa
