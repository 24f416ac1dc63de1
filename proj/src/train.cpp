#include "graphqa/train.hpp"

#include <cmath>
#include <fstream>

#include "graphqa/errors.hpp"
#include "graphqa/rng.hpp"

#include <json.hpp>

namespace graphqa {

void TrainConfig::validate() const {
  if (lr < 0.0) throw ConfigError("learning rate must be nonnegative");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be nonnegative");
  if (epochs == 0) throw ConfigError("epoch count must be positive");
  if (ema_decay < 0.0 || ema_decay >= 1.0)
    throw ConfigError("EMA decay must lie in [0, 1)");
  if (iterations == 0) throw ConfigError("need at least one message-passing iteration");
  if (basis_blocks == 0) throw ConfigError("need at least one basis block");
  if (dim == 0 || dim % 2 != 0) throw ConfigError("model dim must be positive and even");
}

std::string EpochStats::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["loss_intra"] = loss_intra;
  j["loss_inter"] = loss_inter;
  j["loss_answer"] = loss_answer;
  j["accuracy"] = accuracy;
  j["additive"] = additive;
  return j.dump();
}

namespace {

struct AdamState {
  std::vector<Tensor> m, v, ema;
  std::size_t t = 0;
};

void adam_step(ParameterStore& store, AdamState& st, const TrainConfig& cfg,
               std::size_t batch_count) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.t += 1;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  double inv_batch = 1.0 / static_cast<double>(batch_count);
  for (std::size_t pi = 0; pi < store.all().size(); ++pi) {
    Param& p = *store.all()[pi];
    Tensor& m = st.m[pi];
    Tensor& v = st.v[pi];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      double g = p.grad[i] * inv_batch;
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      double update = cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      p.value[i] -= update;
      p.value[i] -= cfg.lr * cfg.weight_decay * p.value[i];
    }
    if (cfg.ema_decay > 0.0) {
      Tensor& ema = st.ema[pi];
      for (std::size_t i = 0; i < p.value.numel(); ++i)
        ema[i] = cfg.ema_decay * ema[i] + (1.0 - cfg.ema_decay) * p.value[i];
    }
  }
}

double teacher_forced_accuracy(Model& model, const Dataset& data) {
  std::size_t correct = 0;
  for (const Sample& s : data.samples) {
    Tape tape;
    ForwardResult fwd = model.forward(tape, s, data.category_map, /*training=*/true);
    if (fwd.predicted_answer == s.question.answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.samples.size());
}

Checkpoint snapshot(const Model& model, const TrainConfig& cfg, const AdamState& st,
                    const std::string& rng_state) {
  Checkpoint ckpt;
  ckpt.model = model.config();
  ckpt.seed = cfg.seed;
  ckpt.ema_decay = cfg.ema_decay;
  ckpt.adam_step = st.t;
  ckpt.rng_state = rng_state;
  const auto& params = model.params().all();
  ckpt.entries.reserve(params.size());
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Checkpoint::Entry e;
    e.name = params[pi]->name;
    e.shape = params[pi]->value.shape;
    e.value = params[pi]->value.data;
    e.m = st.m[pi].data;
    e.v = st.v[pi].data;
    if (cfg.ema_decay > 0.0) e.ema = st.ema[pi].data;
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

}  // namespace

TrainOutcome train(const TrainConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (data.samples.empty()) throw DomainError("cannot train on an empty dataset");

  ModelConfig mc;
  mc.dim = cfg.dim;
  mc.iterations = cfg.iterations;
  mc.basis_blocks = cfg.basis_blocks;
  mc.mode = cfg.mode;
  mc = config_for_dataset(mc, data);
  Model model(mc, cfg.seed);

  AdamState st;
  for (const auto& p : model.params().all()) {
    st.m.emplace_back(p->value.shape);
    st.v.emplace_back(p->value.shape);
    if (cfg.ema_decay > 0.0) st.ema.emplace_back(p->value.shape);
  }

  Rng shuffle_rng(hash64("train-shuffle") ^ cfg.seed);
  std::vector<std::size_t> order(data.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainOutcome outcome;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = shuffle_rng.below(i);
      std::swap(order[i - 1], order[j]);
    }

    EpochStats stats;
    stats.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(start + cfg.batch_size, order.size());
      model.params().zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = data.samples[order[k]];
        Tape tape;
        ForwardResult fwd = model.forward(tape, s, data.category_map, /*training=*/true);
        double l = tape.value(fwd.loss)[0];
        if (!std::isfinite(l)) {
          std::size_t bad = tape.first_non_finite();
          std::string culprit = bad == Tape::npos ? "(loss only)" : tape.op_tag(bad);
          throw DomainError("training diverged at epoch " + std::to_string(epoch) +
                            ", sample " + std::to_string(s.id) +
                            ": first non-finite tensor from op '" + culprit + "'");
        }
        double sum = (tape.value(fwd.loss_intra)[0] + tape.value(fwd.loss_inter)[0]) +
                     tape.value(fwd.loss_answer)[0];
        if (sum != l) stats.additive = false;
        stats.loss += l;
        stats.loss_intra += tape.value(fwd.loss_intra)[0];
        stats.loss_inter += tape.value(fwd.loss_inter)[0];
        stats.loss_answer += tape.value(fwd.loss_answer)[0];
        if (fwd.predicted_answer == s.question.answer) ++correct;
        tape.backward(fwd.objective);
      }
      adam_step(model.params(), st, cfg, end - start);
    }

    double n = static_cast<double>(data.samples.size());
    stats.loss /= n;
    stats.loss_intra /= n;
    stats.loss_inter /= n;
    stats.loss_answer /= n;
    stats.accuracy = static_cast<double>(correct) / n;
    outcome.log.push_back(stats);

    if (stats.accuracy >= cfg.target_accuracy &&
        teacher_forced_accuracy(model, data) >= cfg.target_accuracy)
      break;
  }

  outcome.checkpoint = snapshot(model, cfg, st, shuffle_rng.state());
  return outcome;
}

RecallReport evaluate(const Checkpoint& ckpt, const Dataset& data) {
  if (data.samples.empty()) throw DomainError("cannot evaluate on an empty dataset");
  Model model(ckpt.model, ckpt.seed);

  std::size_t loaded = 0;
  for (const Checkpoint::Entry& e : ckpt.entries) {
    if (!model.params().has(e.name))
      throw FormatError("checkpoint parameter '" + e.name + "' unknown to this model");
    Param& p = model.params().get(e.name);
    if (p.value.shape != e.shape)
      throw FormatError("checkpoint parameter '" + e.name + "' has shape " +
                        shape_str(e.shape) + ", model expects " + shape_str(p.value.shape));
    if (!e.ema.empty() && ckpt.adam_step > 0) {
      // bias-corrected shadow: the EMA starts at zero, so early averages are
      // scaled back up by 1 - decay^t
      double correction =
          1.0 - std::pow(ckpt.ema_decay, static_cast<double>(ckpt.adam_step));
      for (std::size_t i = 0; i < p.value.numel(); ++i) p.value[i] = e.ema[i] / correction;
    } else {
      p.value.data = e.value;
    }
    ++loaded;
  }
  if (loaded != model.params().all().size())
    throw FormatError("checkpoint covers " + std::to_string(loaded) + " of " +
                      std::to_string(model.params().all().size()) + " parameters");

  RecallAccumulator acc(ckpt.model.n_relation_classes);
  for (const Sample& s : data.samples) {
    Tape tape;
    ForwardResult fwd = model.forward(tape, s, data.category_map, /*training=*/false);
    acc.add_answer(fwd.predicted_answer == s.question.answer);

    std::vector<RankedPrediction> preds;
    std::vector<Triplet> gt;
    for (std::size_t r = 0; r < s.graph.edges.size(); ++r) {
      const RelationEdge& e = s.graph.edges[r];
      const std::vector<double>& probs = fwd.relation_probs[r];
      std::size_t cls = argmax(probs);
      preds.push_back({{e.subject, e.object, cls}, probs[cls], r});
      gt.push_back({e.subject, e.object, e.class_id});
    }
    acc.add_sample(preds, gt);
  }
  return acc.finish();
}

std::vector<std::pair<std::size_t, double>> sweep_iterations(
    const TrainConfig& base, const Dataset& train_data, const Dataset& eval_data,
    const std::vector<std::size_t>& levels) {
  std::vector<std::pair<std::size_t, double>> results;
  for (std::size_t l : levels) {
    TrainConfig cfg = base;
    cfg.iterations = l;
    TrainOutcome outcome = train(cfg, train_data);
    RecallReport report = evaluate(outcome.checkpoint, eval_data);
    results.push_back({l, report.accuracy});
  }
  return results;
}

// ---------------------------------------------------------------------------
// Checkpoint persistence
// ---------------------------------------------------------------------------

namespace {

nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"dim", c.dim},
          {"visual_dim", c.visual_dim},
          {"visual_proj_dim", c.visual_proj_dim},
          {"box_proj_dim", c.box_proj_dim},
          {"class_embed_dim", c.class_embed_dim},
          {"word_dim", c.word_dim},
          {"iterations", c.iterations},
          {"basis_blocks", c.basis_blocks},
          {"n_object_classes", c.n_object_classes},
          {"n_relation_classes", c.n_relation_classes},
          {"vocab_size", c.vocab_size},
          {"answer_vocab_size", c.answer_vocab_size},
          {"mode", to_string(c.mode)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.visual_dim = j.at("visual_dim").get<std::size_t>();
  c.visual_proj_dim = j.at("visual_proj_dim").get<std::size_t>();
  c.box_proj_dim = j.at("box_proj_dim").get<std::size_t>();
  c.class_embed_dim = j.at("class_embed_dim").get<std::size_t>();
  c.word_dim = j.at("word_dim").get<std::size_t>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.basis_blocks = j.at("basis_blocks").get<std::size_t>();
  c.n_object_classes = j.at("n_object_classes").get<std::size_t>();
  c.n_relation_classes = j.at("n_relation_classes").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.answer_vocab_size = j.at("answer_vocab_size").get<std::size_t>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  return c;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  nlohmann::json j;
  j["format_version"] = format_version;
  j["model"] = model_config_to_json(model);
  j["seed"] = seed;
  j["ema_decay"] = ema_decay;
  j["adam_step"] = adam_step;
  j["rng_state"] = rng_state;
  nlohmann::json params = nlohmann::json::array();
  for (const Entry& e : entries) {
    nlohmann::json je = {{"name", e.name}, {"shape", e.shape}, {"value", e.value},
                         {"m", e.m},       {"v", e.v}};
    if (!e.ema.empty()) je["ema"] = e.ema;
    params.push_back(std::move(je));
  }
  j["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << j.dump() << "\n";
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.format_version = j.at("format_version").get<std::size_t>();
    if (ckpt.format_version != 1)
      throw FormatError("unsupported checkpoint format_version " +
                        std::to_string(ckpt.format_version));
    ckpt.model = model_config_from_json(j.at("model"));
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.ema_decay = j.at("ema_decay").get<double>();
    ckpt.adam_step = j.at("adam_step").get<std::size_t>();
    ckpt.rng_state = j.at("rng_state").get<std::string>();
    for (const auto& je : j.at("params")) {
      Checkpoint::Entry e;
      e.name = je.at("name").get<std::string>();
      e.shape = je.at("shape").get<Shape>();
      e.value = je.at("value").get<std::vector<double>>();
      e.m = je.at("m").get<std::vector<double>>();
      e.v = je.at("v").get<std::vector<double>>();
      if (je.contains("ema")) e.ema = je.at("ema").get<std::vector<double>>();
      ckpt.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  return ckpt;
}

}  // namespace graphqa
