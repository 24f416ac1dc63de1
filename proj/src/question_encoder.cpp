#include "graphqa/question_encoder.hpp"

#include <string>

#include "graphqa/errors.hpp"

namespace graphqa {

void register_question_params(ParameterStore& params, const ModelConfig& cfg) {
  std::size_t h = cfg.encoder_hidden();
  if (h * 2 != cfg.dim) throw ConfigError("model dim must be even for the bidirectional encoder");
  params.create("embed.word", {cfg.vocab_size, cfg.word_dim});
  for (const char* dir : {"fwd", "bwd"}) {
    std::string p = std::string("enc.") + dir;
    params.create(p + ".wx", {h, cfg.word_dim});
    params.create(p + ".wh", {h, h});
    params.create(p + ".bh", {h});
  }
  params.create("enc.sum", {cfg.dim, 2 * cfg.dim});
  params.create("instr.proj", {cfg.dim, cfg.dim});
  params.create("instr.score", {cfg.dim});
  for (std::size_t l = 0; l < cfg.iterations; ++l)
    params.create("instr.focus.l" + std::to_string(l), {cfg.dim, cfg.dim});
}

namespace {

// One direction of the recurrence over the given embedding order.
std::vector<NodeId> run_direction(Ctx& ctx, const ModelConfig& cfg,
                                  const std::vector<NodeId>& embeds,
                                  const std::string& prefix) {
  Tape& t = ctx.tape;
  NodeId wx = ctx.P(prefix + ".wx");
  NodeId wh = ctx.P(prefix + ".wh");
  NodeId bh = ctx.P(prefix + ".bh");
  NodeId prev = t.leaf(Tensor(Shape{cfg.encoder_hidden()}, 0.0), "enc.h0");
  std::vector<NodeId> states;
  states.reserve(embeds.size());
  for (NodeId x : embeds) {
    NodeId h = t.add(t.matvec(wx, x), t.relu(t.add(t.matvec(wh, prev), bh)));
    states.push_back(h);
    prev = h;
  }
  return states;
}

}  // namespace

EncodedQuestion encode_question(Ctx& ctx, const ModelConfig& cfg,
                                const std::vector<std::size_t>& tokens) {
  if (tokens.empty()) throw DomainError("cannot encode an empty token sequence");
  Tape& t = ctx.tape;
  NodeId table = ctx.P("embed.word");
  std::vector<NodeId> embeds;
  embeds.reserve(tokens.size());
  for (std::size_t tok : tokens) {
    if (tok >= cfg.vocab_size)
      throw DomainError("token id " + std::to_string(tok) + " outside vocabulary of " +
                        std::to_string(cfg.vocab_size));
    embeds.push_back(t.row(table, tok));
  }

  std::vector<NodeId> fwd = run_direction(ctx, cfg, embeds, "enc.fwd");
  std::vector<NodeId> rev(embeds.rbegin(), embeds.rend());
  std::vector<NodeId> bwd_rev = run_direction(ctx, cfg, rev, "enc.bwd");

  EncodedQuestion out;
  std::size_t S = tokens.size();
  out.hidden.reserve(S);
  for (std::size_t s = 0; s < S; ++s)
    out.hidden.push_back(t.concat({fwd[s], bwd_rev[S - 1 - s]}));
  out.summary = t.matvec(ctx.P("enc.sum"), t.concat({out.hidden.front(), out.hidden.back()}));
  return out;
}

NodeId question_instruction(Ctx& ctx, const ModelConfig& cfg,
                            const EncodedQuestion& enc, std::size_t l,
                            Diagnostics* diag) {
  if (l >= cfg.iterations)
    throw DomainError("instruction iteration " + std::to_string(l) + " out of range");
  Tape& t = ctx.tape;
  NodeId guided = t.relu(t.matvec(ctx.P("instr.proj"), enc.summary));
  NodeId focus = t.matvec(ctx.P("instr.focus.l" + std::to_string(l)), guided);
  NodeId score_w = ctx.P("instr.score");

  std::vector<NodeId> scores;
  scores.reserve(enc.hidden.size());
  for (NodeId h : enc.hidden) scores.push_back(t.dot(score_w, t.mul(h, focus)));
  NodeId alpha = t.softmax(t.concat(scores));
  if (diag)
    diag->attention.push_back({"instruction.l" + std::to_string(l), t.value(alpha).data});

  std::vector<NodeId> weighted;
  weighted.reserve(enc.hidden.size());
  for (std::size_t s = 0; s < enc.hidden.size(); ++s)
    weighted.push_back(t.smul(t.index(alpha, s), enc.hidden[s]));
  return t.sum(weighted);
}

}  // namespace graphqa
