// The synthetic dataset generator and its JSON-lines serialization: seeded
// determinism, answer consistency against the independent scene-graph
// oracles, structural guarantees, round-trip identity, and parse errors.
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "graphqa/errors.hpp"
#include "graphqa/synth_data.hpp"

using namespace graphqa;

namespace {

// Unique temp path per call; removed by each test when done.
std::string temp_path(const char* tag) {
  static int counter = 0;
  return std::string("synth_test_") + tag + "_" + std::to_string(counter++) + ".jsonl";
}

SynthConfig quick_config(std::uint64_t seed, std::size_t count) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.count = count;
  cfg.visual_dim = 6;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::string all, line;
  while (std::getline(in, line)) all += line + "\n";
  return all;
}

}  // namespace

TEST_SUITE("synth_data") {

TEST_CASE("relation_rule is deterministic and in range") {
  for (std::size_t a = 0; a < 10; ++a)
    for (std::size_t b = 0; b < 10; ++b) {
      std::size_t r = relation_rule(a, b, 9);
      CHECK(r < 9);
      CHECK(r == relation_rule(a, b, 9));
      CHECK(r == (3 * a + 5 * b) % 9);
    }
}

TEST_CASE("default_category_map partitions classes into the three blocks") {
  CategoryMap map = default_category_map(10, 9);
  REQUIRE(map.object_class_to_category.size() == 10);
  CHECK(map.object_class_to_category[0] == ObjectCategory::Person);
  for (std::size_t c = 1; c < 10; ++c)
    CHECK(map.object_class_to_category[c] == ObjectCategory::NonPerson);
  REQUIRE(map.relation_class_to_category.size() == 9);
  for (std::size_t r = 0; r < 9; ++r)
    CHECK(map.relation_class_to_category[r] ==
          static_cast<RelationCategory>(r / 3));
}

TEST_CASE("identical seeds generate identical datasets") {
  SynthConfig cfg = quick_config(77, 30);
  Dataset a = generate(cfg);
  Dataset b = generate(cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.vocab == b.vocab);
  CHECK(a.answer_vocab == b.answer_vocab);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].question.tokens == b.samples[i].question.tokens);
    CHECK(a.samples[i].question.answer == b.samples[i].question.answer);
    REQUIRE(a.samples[i].graph.objects.size() == b.samples[i].graph.objects.size());
    for (std::size_t o = 0; o < a.samples[i].graph.objects.size(); ++o)
      CHECK(a.samples[i].graph.objects[o].visual ==
            b.samples[i].graph.objects[o].visual);
  }

  Dataset c = generate(quick_config(78, 30));
  bool any_difference = false;
  for (std::size_t i = 0; i < c.samples.size() && !any_difference; ++i)
    any_difference = c.samples[i].question.tokens != a.samples[i].question.tokens ||
                     c.samples[i].graph.objects.size() != a.samples[i].graph.objects.size();
  CHECK(any_difference);
}

TEST_CASE("zero visual noise collapses each class onto its prototype") {
  SynthConfig cfg = quick_config(5, 40);
  cfg.visual_noise = 0.0;
  Dataset data = generate(cfg);
  std::map<std::size_t, std::vector<double>> proto;
  for (const Sample& s : data.samples)
    for (const ObjectNode& node : s.graph.objects) {
      auto [it, fresh] = proto.emplace(node.class_id, node.visual);
      if (!fresh) CHECK(it->second == node.visual);
    }
  CHECK(proto.size() > 1);
}

TEST_CASE("every generated edge follows the class rule") {
  Dataset data = generate(quick_config(6, 50));
  for (const Sample& s : data.samples)
    for (const RelationEdge& e : s.graph.edges) {
      std::size_t sc = s.graph.objects[e.subject].class_id;
      std::size_t oc = s.graph.objects[e.object].class_id;
      CHECK(e.class_id == relation_rule(sc, oc, data.n_relation_classes));
    }
}

TEST_CASE("graphs respect the configured size bounds and carry an edge") {
  SynthConfig cfg = quick_config(7, 60);
  cfg.min_objects = 3;
  cfg.max_objects = 5;
  Dataset data = generate(cfg);
  ModelConfig mc = tiny_model_config();
  mc.visual_dim = cfg.visual_dim;
  mc.n_object_classes = cfg.n_object_classes;
  mc.n_relation_classes = cfg.n_relation_classes;
  for (const Sample& s : data.samples) {
    CHECK(s.graph.objects.size() >= 3);
    CHECK(s.graph.objects.size() <= 5);
    CHECK(!s.graph.edges.empty());
    CHECK_NOTHROW(s.graph.validate(mc));
  }
}

TEST_CASE("stored answers agree with the derivation oracle on every sample") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Dataset data = generate(quick_config(seed, 120));
    for (const Sample& s : data.samples) {
      auto derived = derive_answer(data, s);
      REQUIRE(derived.has_value());
      CHECK(*derived == s.question.answer);
    }
  }
}

TEST_CASE("choice questions carry exactly five single-token distinct choices") {
  SynthConfig cfg = quick_config(9, 80);
  cfg.w_rel_query = cfg.w_obj_query = cfg.w_verify = 0.0;
  cfg.w_choice = 1.0;
  Dataset data = generate(cfg);
  for (const Sample& s : data.samples) {
    REQUIRE(s.question.type == QuestionType::Choice);
    REQUIRE(s.question.choices.size() == 5);
    CHECK(s.question.answer < 5);
    std::set<std::size_t> distinct;
    for (const auto& choice : s.question.choices) {
      REQUIRE(choice.size() == 1);
      distinct.insert(choice[0]);
    }
    CHECK(distinct.size() == 5);
  }
}

TEST_CASE("object class frequencies stay near uniform") {
  SynthConfig cfg = quick_config(10, 1200);
  Dataset data = generate(cfg);
  std::vector<std::size_t> counts(cfg.n_object_classes, 0);
  std::size_t total = 0;
  for (const Sample& s : data.samples)
    for (const ObjectNode& node : s.graph.objects) {
      ++counts[node.class_id];
      ++total;
    }
  double expected = double(total) / double(cfg.n_object_classes);
  for (std::size_t c = 0; c < cfg.n_object_classes; ++c) {
    CHECK(double(counts[c]) > 0.8 * expected);
    CHECK(double(counts[c]) < 1.2 * expected);
  }
}

TEST_CASE("write/read round-trip is the identity") {
  Dataset data = generate(quick_config(11, 40));
  std::string path = temp_path("roundtrip");
  write_jsonl(data, path);
  Dataset back = read_jsonl(path);

  CHECK(back.vocab == data.vocab);
  CHECK(back.answer_vocab == data.answer_vocab);
  CHECK(back.n_object_classes == data.n_object_classes);
  CHECK(back.n_relation_classes == data.n_relation_classes);
  CHECK(back.visual_dim == data.visual_dim);
  CHECK(back.category_map.object_class_to_category ==
        data.category_map.object_class_to_category);
  CHECK(back.category_map.relation_class_to_category ==
        data.category_map.relation_class_to_category);
  REQUIRE(back.samples.size() == data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& a = data.samples[i];
    const Sample& b = back.samples[i];
    CHECK(a.id == b.id);
    CHECK(a.question.tokens == b.question.tokens);
    CHECK(a.question.type == b.question.type);
    CHECK(a.question.choices == b.question.choices);
    CHECK(a.question.answer == b.question.answer);
    REQUIRE(a.graph.objects.size() == b.graph.objects.size());
    for (std::size_t o = 0; o < a.graph.objects.size(); ++o) {
      CHECK(a.graph.objects[o].class_id == b.graph.objects[o].class_id);
      CHECK(a.graph.objects[o].visual == b.graph.objects[o].visual);  // bitwise
      CHECK(a.graph.objects[o].box.x1 == b.graph.objects[o].box.x1);
      CHECK(a.graph.objects[o].box.y2 == b.graph.objects[o].box.y2);
    }
    REQUIRE(a.graph.edges.size() == b.graph.edges.size());
    for (std::size_t r = 0; r < a.graph.edges.size(); ++r) {
      CHECK(a.graph.edges[r].subject == b.graph.edges[r].subject);
      CHECK(a.graph.edges[r].object == b.graph.edges[r].object);
      CHECK(a.graph.edges[r].class_id == b.graph.edges[r].class_id);
    }
  }

  // Serializing the reread dataset reproduces the file byte for byte.
  std::string path2 = temp_path("roundtrip");
  write_jsonl(back, path2);
  CHECK(slurp(path) == slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("parse errors carry the offending line number") {
  std::string path = temp_path("badline");
  {
    Dataset data = generate(quick_config(12, 2));
    write_jsonl(data, path);
    std::ofstream out(path, std::ios::app);
    out << "{ not json\n";
  }
  try {
    read_jsonl(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 4);  // header + 2 samples + bad line
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("missing fields and bad version are distinct failures") {
  std::string missing = temp_path("missingfield");
  {
    Dataset data = generate(quick_config(13, 1));
    write_jsonl(data, missing);
    std::ofstream out(missing, std::ios::app);
    out << R"({"id": 5, "objects": []})" << "\n";  // no relations/question
  }
  CHECK_THROWS_AS(read_jsonl(missing), ParseError);
  std::remove(missing.c_str());

  std::string bad_version = temp_path("version");
  {
    std::ofstream out(bad_version);
    out << R"({"format_version": 2, "vocab": {"question": [], "answer": []}})" << "\n";
  }
  CHECK_THROWS_AS(read_jsonl(bad_version), FormatError);
  std::remove(bad_version.c_str());
}

TEST_CASE("empty and header-only files") {
  std::string empty = temp_path("empty");
  { std::ofstream out(empty); }
  Dataset none = read_jsonl(empty);
  CHECK(none.samples.empty());
  CHECK(none.vocab.empty());
  std::remove(empty.c_str());

  std::string header_only = temp_path("header");
  {
    Dataset data = generate(quick_config(14, 3));
    data.samples.clear();
    write_jsonl(data, header_only);
  }
  Dataset hdr = read_jsonl(header_only);
  CHECK(hdr.samples.empty());
  CHECK(!hdr.vocab.empty());
  CHECK(hdr.n_relation_classes == 9);
  std::remove(header_only.c_str());
}

TEST_CASE("nonexistent files are a configuration error") {
  CHECK_THROWS_AS(read_jsonl("does/not/exist.jsonl"), ConfigError);
}

TEST_CASE("config validation rejects inconsistent settings") {
  SynthConfig ok = quick_config(1, 5);
  CHECK_NOTHROW(ok.validate());

  SynthConfig bad = ok;
  bad.n_object_classes = 1;  // need at least two classes to pose questions
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.n_relation_classes = 7;  // must split into three equal category blocks
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.min_objects = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.max_objects = 2;
  bad.min_objects = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.edge_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.visual_noise = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.w_rel_query = bad.w_obj_query = bad.w_verify = bad.w_choice = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.w_rel_query = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("the vocabulary covers templates, objects, and relations") {
  Dataset data = generate(quick_config(15, 5));
  // 9 template words + 10 object names + 9 relation names
  CHECK(data.vocab.size() == 28);
  CHECK(data.vocab[0] == "what");
  CHECK(data.answer_vocab.size() == 9 + 10 + 2);  // relations, objects, yes, no
  for (const Sample& s : data.samples) {
    for (std::size_t tok : s.question.tokens) CHECK(tok < data.vocab.size());
    if (s.question.type == QuestionType::Open)
      CHECK(s.question.answer < data.answer_vocab.size());
  }
}

}  // TEST_SUITE
