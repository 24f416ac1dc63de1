#pragma once

#include <cstddef>
#include <vector>

#include "graphqa/config.hpp"
#include "graphqa/diagnostics.hpp"
#include "graphqa/tape.hpp"

namespace graphqa {

enum class QuestionType { Open, Choice };

struct Question {
  std::vector<std::size_t> tokens;  // vocabulary indices, length >= 1
  QuestionType type = QuestionType::Open;
  std::vector<std::vector<std::size_t>> choices;  // exactly 5 when type == Choice
  std::size_t answer = 0;  // answer-vocab id (open) or choice index (choice)
};

struct EncodedQuestion {
  std::vector<NodeId> hidden;  // h_s, each {D}
  NodeId summary = 0;          // q, {D}
};

// Bidirectional recurrence, each direction D/2 wide:
//   h_s = W_x x_s + ReLU(W_h h_{s-1} + b_h)
// h_s stacks the two directions; the summary projects [h_1; h_S] down to D.
EncodedQuestion encode_question(Ctx& ctx, const ModelConfig& cfg,
                                const std::vector<std::size_t>& tokens);

// Instruction for iteration l (0-based): attention over hidden states driven
// by a per-iteration view of the summary.  Records the attention weights
// under tag "instruction.l<l>" when diag is given.
NodeId question_instruction(Ctx& ctx, const ModelConfig& cfg,
                            const EncodedQuestion& enc, std::size_t l,
                            Diagnostics* diag = nullptr);

void register_question_params(ParameterStore& params, const ModelConfig& cfg);

}  // namespace graphqa
