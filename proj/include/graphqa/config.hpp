#pragma once

#include <cstddef>
#include <string>

namespace graphqa {

// Which message-passing stacks are active.
enum class Mode { Intra, Inter, IntraInter };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);  // "intra" | "inter" | "intra+inter"

struct ModelConfig {
  std::size_t dim = 64;        // shared model width D
  std::size_t visual_dim = 32;
  std::size_t visual_proj_dim = 32;
  std::size_t box_proj_dim = 16;
  std::size_t class_embed_dim = 16;
  std::size_t word_dim = 32;
  std::size_t iterations = 3;    // message-passing iterations L
  std::size_t basis_blocks = 4;  // basis matrices per direction
  std::size_t n_object_classes = 10;
  std::size_t n_relation_classes = 9;
  std::size_t vocab_size = 0;         // from the dataset header
  std::size_t answer_vocab_size = 0;  // from the dataset header
  Mode mode = Mode::IntraInter;

  std::size_t encoder_hidden() const { return dim / 2; }  // per direction
};

// Scaled-down dimensions for finite-difference checks.
ModelConfig tiny_model_config();

}  // namespace graphqa
