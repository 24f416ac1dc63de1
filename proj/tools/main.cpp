#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphqa/dual_graph.hpp"
#include "graphqa/errors.hpp"
#include "graphqa/model.hpp"
#include "graphqa/synth_data.hpp"
#include "graphqa/train.hpp"

namespace {

using namespace graphqa;

struct CliOptions {
  // generate
  SynthConfig synth;
  std::string out_path;
  // train / eval / sweep
  TrainConfig train_cfg;
  std::string data_path;
  std::string heldout_path;
  std::string ckpt_path;
  std::string log_path;
  std::string mode_str = "intra+inter";
  std::vector<std::size_t> levels = {1, 2, 3, 4, 5};
  // gradcheck
  std::uint64_t gradcheck_seed = 1;
  // inspect-dual
  std::size_t sample_index = 0;
};

void add_train_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--seed", opt.train_cfg.seed, "Training seed");
  cmd->add_option("--mode", opt.mode_str, "Message-passing mode")
      ->check(CLI::IsMember({"intra", "inter", "intra+inter"}));
  cmd->add_option("--lr", opt.train_cfg.lr, "Learning rate");
  cmd->add_option("--batch", opt.train_cfg.batch_size, "Batch size");
  cmd->add_option("--epochs", opt.train_cfg.epochs, "Maximum epochs");
  cmd->add_option("--weight-decay", opt.train_cfg.weight_decay, "Decoupled weight decay");
  cmd->add_option("--ema", opt.train_cfg.ema_decay, "EMA decay (0 disables)");
  cmd->add_option("--iterations", opt.train_cfg.iterations, "Message-passing iterations");
  cmd->add_option("--basis", opt.train_cfg.basis_blocks, "Basis blocks per direction");
  cmd->add_option("--dim", opt.train_cfg.dim, "Model width");
  cmd->add_option("--target-acc", opt.train_cfg.target_accuracy,
                  "Early-stop training accuracy (>1 disables)");
}

int run_generate(const CliOptions& opt) {
  Dataset data = generate(opt.synth);
  write_jsonl(data, opt.out_path);
  std::cout << "wrote " << data.samples.size() << " samples to " << opt.out_path << "\n";
  return 0;
}

int run_train(CliOptions& opt) {
  opt.train_cfg.mode = parse_mode(opt.mode_str);
  Dataset data = read_jsonl(opt.data_path);
  TrainOutcome outcome = train(opt.train_cfg, data);
  for (const EpochStats& s : outcome.log) std::cout << s.to_json() << "\n";
  if (!opt.log_path.empty()) {
    std::ofstream log(opt.log_path);
    if (!log) throw ConfigError("cannot open '" + opt.log_path + "' for writing");
    for (const EpochStats& s : outcome.log) log << s.to_json() << "\n";
  }
  outcome.checkpoint.save(opt.ckpt_path);
  std::cout << "checkpoint saved to " << opt.ckpt_path << " after "
            << outcome.log.size() << " epochs\n";
  return 0;
}

int run_eval(const CliOptions& opt) {
  Checkpoint ckpt = Checkpoint::load(opt.ckpt_path);
  Dataset data = read_jsonl(opt.data_path);
  RecallReport report = evaluate(ckpt, data);
  std::cout << report.to_table();
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw ConfigError("cannot open '" + opt.out_path + "' for writing");
    out << report.to_json() << "\n";
  }
  return 0;
}

int run_sweep(CliOptions& opt) {
  opt.train_cfg.mode = parse_mode(opt.mode_str);
  Dataset train_data = read_jsonl(opt.data_path);
  Dataset heldout = read_jsonl(opt.heldout_path);
  auto results = sweep_iterations(opt.train_cfg, train_data, heldout, opt.levels);
  nlohmann::json j = nlohmann::json::array();
  std::cout << "iterations  heldout-accuracy\n";
  for (auto [l, acc] : results) {
    std::printf("%10zu  %.4f\n", l, acc);
    j.push_back({{"iterations", l}, {"accuracy", acc}});
  }
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw ConfigError("cannot open '" + opt.out_path + "' for writing");
    out << j.dump() << "\n";
  }
  return 0;
}

int run_gradcheck(const CliOptions& opt) {
  SynthConfig sc;
  sc.seed = opt.gradcheck_seed;
  sc.count = 1;
  sc.visual_dim = 4;
  sc.min_objects = 4;
  sc.max_objects = 5;
  sc.edge_prob = 0.3;
  Dataset data = generate(sc);

  ModelConfig mc = tiny_model_config();
  mc = config_for_dataset(mc, data);
  Model model(mc, opt.gradcheck_seed);
  auto build = [&](Tape& tape) {
    return model.forward(tape, data.samples[0], data.category_map, /*training=*/true).loss;
  };
  GradCheckReport report = gradcheck(model.params(), build);
  std::printf("max relative error %.3e (param %s[%zu])\n", report.max_rel_error,
              report.worst_param.c_str(), report.worst_index);
  return report.max_rel_error < 1e-4 ? 0 : 1;
}

int run_inspect_dual(const CliOptions& opt) {
  Dataset data = read_jsonl(opt.data_path);
  if (opt.sample_index >= data.samples.size())
    throw DomainError("sample index " + std::to_string(opt.sample_index) +
                      " out of range for " + std::to_string(data.samples.size()) +
                      " samples");
  const SceneGraph& g = data.samples[opt.sample_index].graph;
  DualGraph dual = build_dual_graph(g);
  std::cout << "sample " << opt.sample_index << ": " << g.objects.size() << " objects, "
            << g.edges.size() << " relations\n";
  for (std::size_t r = 0; r < g.edges.size(); ++r)
    std::cout << "  relation " << r << ": " << g.edges[r].subject << " -> "
              << g.edges[r].object << " (class " << g.edges[r].class_id << ")\n";
  std::cout << "dual graph: " << dual.n_relations << " nodes, " << dual.edges.size()
            << " adjacencies\n";
  for (const DualEdge& e : dual.edges)
    std::cout << "  " << e.a << " -- " << e.b << " via object " << e.shared_object << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene-graph question answering with question-guided message passing"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file (sections per subcommand)");

  CliOptions opt;

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--out", opt.out_path, "Output JSONL path")->required();
  gen->add_option("--seed", opt.synth.seed, "Generator seed");
  gen->add_option("--count", opt.synth.count, "Number of samples");
  gen->add_option("--object-classes", opt.synth.n_object_classes, "Object class count");
  gen->add_option("--relation-classes", opt.synth.n_relation_classes, "Relation class count");
  gen->add_option("--visual-dim", opt.synth.visual_dim, "Visual feature width");
  gen->add_option("--objects-min", opt.synth.min_objects, "Minimum objects per scene");
  gen->add_option("--objects-max", opt.synth.max_objects, "Maximum objects per scene");
  gen->add_option("--edge-prob", opt.synth.edge_prob, "Relation probability per object pair");
  gen->add_option("--noise", opt.synth.visual_noise, "Visual noise level");
  gen->add_option("--w-rel-query", opt.synth.w_rel_query, "Relation-query template weight");
  gen->add_option("--w-obj-query", opt.synth.w_obj_query, "Object-query template weight");
  gen->add_option("--w-verify", opt.synth.w_verify, "Verification template weight");
  gen->add_option("--w-choice", opt.synth.w_choice, "5-way choice template weight");

  CLI::App* tr = app.add_subcommand("train", "Train a model on a dataset");
  tr->add_option("--data", opt.data_path, "Training dataset (JSONL)")->required();
  tr->add_option("--out", opt.ckpt_path, "Checkpoint output path")->required();
  tr->add_option("--log", opt.log_path, "Per-epoch JSONL log path");
  add_train_flags(tr, opt);

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--ckpt", opt.ckpt_path, "Checkpoint path")->required();
  ev->add_option("--data", opt.data_path, "Evaluation dataset (JSONL)")->required();
  ev->add_option("--out", opt.out_path, "Report JSON output path");

  CLI::App* sw = app.add_subcommand("sweep", "Train across iteration counts");
  sw->add_option("--data", opt.data_path, "Training dataset (JSONL)")->required();
  sw->add_option("--heldout", opt.heldout_path, "Held-out dataset (JSONL)")->required();
  sw->add_option("--levels", opt.levels, "Iteration counts to sweep")->delimiter(',');
  sw->add_option("--out", opt.out_path, "Sweep result JSON path");
  add_train_flags(sw, opt);

  CLI::App* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
  gc->add_option("--seed", opt.gradcheck_seed, "Seed for the probe sample and weights");

  CLI::App* insp = app.add_subcommand("inspect-dual", "Print a sample's dual graph");
  insp->add_option("--data", opt.data_path, "Dataset (JSONL)")->required();
  insp->add_option("--index", opt.sample_index, "Sample index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 2;
  }

  try {
    if (gen->parsed()) return run_generate(opt);
    if (tr->parsed()) return run_train(opt);
    if (ev->parsed()) return run_eval(opt);
    if (sw->parsed()) return run_sweep(opt);
    if (gc->parsed()) return run_gradcheck(opt);
    if (insp->parsed()) return run_inspect_dual(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
