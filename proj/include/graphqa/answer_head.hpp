#pragma once

#include <cstddef>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/diagnostics.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

// c = lambda_d ⊙ p_d + gamma_h ⊙ p_h where each gate is a softmax over the
// feature dimension of (readout ⊙ W_q q).  Gate distributions are recorded
// as "answer.lambda_d" / "answer.gamma_h" when diag is given.
NodeId fuse_readouts(Ctx& ctx, NodeId p_d, NodeId p_h, NodeId q,
                     Diagnostics* diag = nullptr);

// Open-ended answer logits y = W_o ReLU(c ⊙ q) over the answer vocabulary.
NodeId open_logits(Ctx& ctx, NodeId c, NodeId q);

// Five-way scores z_i = softmax(dot(c, a_i)); predicted = argmax (lowest
// index on ties).
struct ChoiceScores {
  NodeId scores = 0;  // pre-softmax, {5}
  NodeId probs = 0;   // softmax, {5}
  std::size_t predicted = 0;
};
ChoiceScores choice_scores(Ctx& ctx, NodeId c, const std::vector<NodeId>& encoded_choices);

// L = L_d + L_h + L_a, summed left to right; DomainError on non-finite input.
NodeId total_loss(Ctx& ctx, NodeId l_d, NodeId l_h, NodeId l_a);

void register_answer_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
