#include "graphqa/config.hpp"

#include "graphqa/errors.hpp"

namespace graphqa {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Intra: return "intra";
    case Mode::Inter: return "inter";
    case Mode::IntraInter: return "intra+inter";
  }
  throw ConfigError("unknown mode enum value");
}

Mode parse_mode(const std::string& s) {
  if (s == "intra") return Mode::Intra;
  if (s == "inter") return Mode::Inter;
  if (s == "intra+inter") return Mode::IntraInter;
  throw ConfigError("unknown mode '" + s + "' (expected intra, inter, or intra+inter)");
}

ModelConfig tiny_model_config() {
  ModelConfig c;
  c.dim = 8;
  c.visual_dim = 4;
  c.visual_proj_dim = 4;
  c.box_proj_dim = 4;
  c.class_embed_dim = 4;
  c.word_dim = 4;
  c.iterations = 2;
  c.basis_blocks = 2;
  return c;
}

}  // namespace graphqa
