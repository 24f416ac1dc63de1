// End-to-end behavior of the training loop, checkpointing, and evaluation:
// determinism, persistence, optimizer edge cases, and mode isolation.
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "graphqa/errors.hpp"
#include "graphqa/model.hpp"
#include "graphqa/synth_data.hpp"
#include "graphqa/train.hpp"

#include <json.hpp>

using namespace graphqa;

namespace {

std::string temp_path() {
  static int counter = 0;
  return "harness_tmp_" + std::to_string(counter++) + ".json";
}

SynthConfig small_data_config(std::uint64_t seed, std::size_t count) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.count = count;
  cfg.visual_dim = 6;
  cfg.min_objects = 3;
  cfg.max_objects = 5;
  cfg.edge_prob = 0.4;
  return cfg;
}

SynthConfig choice_data_config(std::uint64_t seed, std::size_t count) {
  SynthConfig cfg = small_data_config(seed, count);
  cfg.w_rel_query = 0.0;
  cfg.w_obj_query = 0.0;
  cfg.w_verify = 0.0;
  cfg.w_choice = 1.0;
  return cfg;
}

TrainConfig small_train_config() {
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.iterations = 2;
  cfg.basis_blocks = 2;
  cfg.epochs = 2;
  cfg.seed = 7;
  return cfg;
}

bool entries_equal(const Checkpoint::Entry& a, const Checkpoint::Entry& b) {
  return a.name == b.name && a.shape == b.shape && a.value == b.value &&
         a.m == b.m && a.v == b.v && a.ema == b.ema;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("configuration validation rejects unusable settings") {
  auto bad = [](auto&& tweak) {
    TrainConfig cfg;
    tweak(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  bad([](TrainConfig& c) { c.lr = -0.1; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.weight_decay = -1.0; });
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.ema_decay = 1.0; });
  bad([](TrainConfig& c) { c.ema_decay = -0.5; });
  bad([](TrainConfig& c) { c.iterations = 0; });
  bad([](TrainConfig& c) { c.basis_blocks = 0; });
  bad([](TrainConfig& c) { c.dim = 0; });
  bad([](TrainConfig& c) { c.dim = 7; });

  TrainConfig ok;
  CHECK_NOTHROW(ok.validate());

  Dataset empty;
  CHECK_THROWS_AS(train(ok, empty), DomainError);
  Checkpoint ckpt;
  CHECK_THROWS_AS(evaluate(ckpt, empty), DomainError);
}

TEST_CASE("a zero learning rate leaves every parameter at its initialization") {
  Dataset data = generate(small_data_config(11, 12));
  TrainConfig cfg = small_train_config();
  cfg.lr = 0.0;
  cfg.epochs = 1;
  cfg.ema_decay = 0.0;
  TrainOutcome outcome = train(cfg, data);

  ModelConfig mc;
  mc.dim = cfg.dim;
  mc.iterations = cfg.iterations;
  mc.basis_blocks = cfg.basis_blocks;
  mc.mode = cfg.mode;
  mc = config_for_dataset(mc, data);
  Model fresh(mc, cfg.seed);

  REQUIRE(outcome.checkpoint.entries.size() == fresh.params().all().size());
  for (const Checkpoint::Entry& e : outcome.checkpoint.entries) {
    REQUIRE(fresh.params().has(e.name));
    const Param& p = fresh.params().get(e.name);
    CHECK(e.value == p.value.data);  // bitwise
    CHECK(e.ema.empty());
  }
  CHECK(outcome.checkpoint.adam_step > 0);
}

TEST_CASE("training twice with one configuration is bit-identical") {
  Dataset data = generate(small_data_config(3, 18));
  TrainConfig cfg = small_train_config();
  TrainOutcome a = train(cfg, data);
  TrainOutcome b = train(cfg, data);

  REQUIRE(a.log.size() == b.log.size());
  REQUIRE(a.log.size() == cfg.epochs);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].epoch == i + 1);
    CHECK(a.log[i].additive);
    CHECK(a.log[i].to_json() == b.log[i].to_json());
  }
  CHECK(a.checkpoint.adam_step == b.checkpoint.adam_step);
  CHECK(a.checkpoint.rng_state == b.checkpoint.rng_state);
  REQUIRE(a.checkpoint.entries.size() == b.checkpoint.entries.size());
  for (std::size_t i = 0; i < a.checkpoint.entries.size(); ++i)
    CHECK(entries_equal(a.checkpoint.entries[i], b.checkpoint.entries[i]));
}

TEST_CASE("checkpoints survive a save/load round trip and evaluate identically") {
  Dataset data = generate(small_data_config(5, 12));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 1;
  TrainOutcome outcome = train(cfg, data);
  CHECK_FALSE(outcome.checkpoint.entries[0].ema.empty());

  std::string path = temp_path();
  outcome.checkpoint.save(path);
  Checkpoint loaded = Checkpoint::load(path);
  std::remove(path.c_str());

  CHECK(loaded.format_version == outcome.checkpoint.format_version);
  CHECK(loaded.seed == outcome.checkpoint.seed);
  CHECK(loaded.ema_decay == outcome.checkpoint.ema_decay);
  CHECK(loaded.adam_step == outcome.checkpoint.adam_step);
  CHECK(loaded.rng_state == outcome.checkpoint.rng_state);
  REQUIRE(loaded.entries.size() == outcome.checkpoint.entries.size());
  for (std::size_t i = 0; i < loaded.entries.size(); ++i)
    CHECK(entries_equal(loaded.entries[i], outcome.checkpoint.entries[i]));

  RecallReport direct = evaluate(outcome.checkpoint, data);
  RecallReport reloaded = evaluate(loaded, data);
  CHECK(direct.to_json() == reloaded.to_json());

  // Evaluation itself is repeatable.
  CHECK(evaluate(loaded, data).to_json() == reloaded.to_json());
}

TEST_CASE("disabled message-passing stacks contribute exactly zero loss") {
  Dataset data = generate(small_data_config(9, 10));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 1;

  cfg.mode = Mode::Intra;
  TrainOutcome intra = train(cfg, data);
  CHECK(intra.log[0].loss_inter == 0.0);
  CHECK(intra.log[0].loss_intra > 0.0);
  CHECK(intra.log[0].additive);

  cfg.mode = Mode::Inter;
  TrainOutcome inter = train(cfg, data);
  CHECK(inter.log[0].loss_intra == 0.0);
  CHECK(inter.log[0].loss_inter > 0.0);
  CHECK(inter.log[0].additive);
}

TEST_CASE("an untrained model scores near chance on balanced five-way choices") {
  Dataset data = generate(choice_data_config(21, 400));
  TrainConfig cfg = small_train_config();
  cfg.lr = 0.0;  // evaluation sees the raw initialization
  cfg.epochs = 1;
  cfg.ema_decay = 0.0;
  TrainOutcome outcome = train(cfg, data);
  RecallReport report = evaluate(outcome.checkpoint, data);
  CHECK(report.accuracy > 0.10);
  CHECK(report.accuracy < 0.32);
}

TEST_CASE("early stopping halts once the accuracy target is met") {
  Dataset data = generate(small_data_config(13, 10));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 50;
  cfg.target_accuracy = 0.0;  // trivially satisfied after the first epoch
  TrainOutcome outcome = train(cfg, data);
  CHECK(outcome.log.size() == 1);
}

TEST_CASE("tampered checkpoints are rejected with clear errors") {
  Dataset data = generate(small_data_config(17, 8));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 1;
  TrainOutcome outcome = train(cfg, data);

  Checkpoint renamed = outcome.checkpoint;
  renamed.entries[0].name = "no.such.parameter";
  CHECK_THROWS_AS(evaluate(renamed, data), FormatError);

  Checkpoint truncated = outcome.checkpoint;
  truncated.entries.pop_back();
  CHECK_THROWS_AS(evaluate(truncated, data), FormatError);

  Checkpoint reshaped = outcome.checkpoint;
  reshaped.entries[0].shape = Shape{1};
  CHECK_THROWS_AS(evaluate(reshaped, data), FormatError);

  Checkpoint versioned = outcome.checkpoint;
  versioned.format_version = 2;
  std::string vpath = temp_path();
  versioned.save(vpath);
  CHECK_THROWS_AS(Checkpoint::load(vpath), FormatError);
  std::remove(vpath.c_str());

  CHECK_THROWS_AS(Checkpoint::load("no_such_checkpoint_file.json"), ConfigError);

  std::string garbled = temp_path();
  {
    std::ofstream out(garbled);
    out << "this is not a checkpoint\n";
  }
  CHECK_THROWS_AS(Checkpoint::load(garbled), FormatError);
  std::remove(garbled.c_str());
}

TEST_CASE("the iteration sweep trains one model per level in order") {
  Dataset train_data = generate(small_data_config(23, 10));
  Dataset eval_data = generate(small_data_config(24, 10));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 1;
  auto results = sweep_iterations(cfg, train_data, eval_data, {2, 1});
  REQUIRE(results.size() == 2);
  CHECK(results[0].first == 2);
  CHECK(results[1].first == 1);
  for (const auto& [level, acc] : results) {
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
  }
}

TEST_CASE("epoch statistics serialize every field") {
  EpochStats stats;
  stats.epoch = 4;
  stats.loss = 1.5;
  stats.loss_intra = 0.5;
  stats.loss_inter = 0.25;
  stats.loss_answer = 0.75;
  stats.accuracy = 0.625;
  stats.additive = true;
  nlohmann::json j = nlohmann::json::parse(stats.to_json());
  CHECK(j.at("epoch") == 4);
  CHECK(j.at("loss") == 1.5);
  CHECK(j.at("loss_intra") == 0.5);
  CHECK(j.at("loss_inter") == 0.25);
  CHECK(j.at("loss_answer") == 0.75);
  CHECK(j.at("accuracy") == 0.625);
  CHECK(j.at("additive") == true);
}

}  // TEST_SUITE
