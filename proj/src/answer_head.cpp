#include "graphqa/answer_head.hpp"

#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

void register_answer_params(ParameterStore& params, const ModelConfig& cfg) {
  params.create("ans.wq", {cfg.dim, cfg.dim});
  params.create("ans.open", {cfg.answer_vocab_size, cfg.dim});
}

NodeId fuse_readouts(Ctx& ctx, NodeId p_d, NodeId p_h, NodeId q, Diagnostics* diag) {
  Tape& t = ctx.tape;
  NodeId wq_q = t.matvec(ctx.P("ans.wq"), q);
  NodeId lambda_d = t.softmax(t.mul(p_d, wq_q));
  NodeId gamma_h = t.softmax(t.mul(p_h, wq_q));
  if (diag) {
    diag->attention.push_back({"answer.lambda_d", t.value(lambda_d).data});
    diag->attention.push_back({"answer.gamma_h", t.value(gamma_h).data});
  }
  return t.add(t.mul(lambda_d, p_d), t.mul(gamma_h, p_h));
}

NodeId open_logits(Ctx& ctx, NodeId c, NodeId q) {
  Tape& t = ctx.tape;
  return t.matvec(ctx.P("ans.open"), t.relu(t.mul(c, q)));
}

ChoiceScores choice_scores(Ctx& ctx, NodeId c, const std::vector<NodeId>& encoded_choices) {
  if (encoded_choices.size() != 5)
    throw DomainError("multiple choice needs exactly 5 encoded choices, got " +
                      std::to_string(encoded_choices.size()));
  Tape& t = ctx.tape;
  std::vector<NodeId> scores;
  scores.reserve(5);
  for (NodeId a : encoded_choices) scores.push_back(t.dot(c, a));
  ChoiceScores out;
  out.scores = t.concat(scores);
  out.probs = t.softmax(out.scores);
  out.predicted = argmax(t.value(out.probs).data);
  return out;
}

NodeId total_loss(Ctx& ctx, NodeId l_d, NodeId l_h, NodeId l_a) {
  Tape& t = ctx.tape;
  for (NodeId part : {l_d, l_h, l_a})
    if (!t.value(part).all_finite())
      throw DomainError(std::string("non-finite loss component '") + t.op_tag(part) + "'");
  return t.add(t.add(l_d, l_h), l_a);
}

}  // namespace graphqa
