#pragma once

#include <string>
#include <vector>

namespace graphqa {

// Probe record filled in during a forward pass so tests can audit every
// normalized attention distribution and every pairwise gate the model emits.
struct AttentionRecord {
  std::string tag;              // e.g. "instruction.l0", "intra.obj.l1.node3"
  std::vector<double> weights;  // post-softmax values
};

struct GateRecord {
  std::string tag;  // e.g. "inter.gate.l0.rel2.obj1"
  double value = 0.0;
};

struct Diagnostics {
  std::vector<AttentionRecord> attention;
  std::vector<GateRecord> gates;

  void clear() {
    attention.clear();
    gates.clear();
  }
};

}  // namespace graphqa
