#include "graphqa/synth_data.hpp"

#include <algorithm>
#include <fstream>

#include "graphqa/errors.hpp"
#include "graphqa/rng.hpp"

#include <json.hpp>

namespace graphqa {

namespace {

// Question vocabulary layout: template words, then object class names, then
// relation class names. Answer vocabulary: relation names, object names,
// "yes", "no". Both layouts are fixed by this module and mirrored by the
// derivation oracle below.
const char* kTemplateWords[] = {"what", "relation", "between", "and", "which",
                                "object", "does", "is", "there"};
constexpr std::size_t kNumTemplateWords = 9;

const char* kObjectNames[] = {"person", "cup",   "sword", "book", "door",
                              "horse",  "table", "flag",  "lamp", "stone"};
const char* kRelationNames[] = {"above",  "below", "beside",   "before",  "after",
                                "during", "holding", "touching", "carrying"};

std::string object_name(std::size_t c) {
  if (c < std::size(kObjectNames)) return kObjectNames[c];
  return "thing" + std::to_string(c);
}

std::string relation_name(std::size_t r, std::size_t n_relation_classes) {
  if (n_relation_classes == std::size(kRelationNames) && r < n_relation_classes)
    return kRelationNames[r];
  return "rel" + std::to_string(r);
}

std::size_t object_token(std::size_t c) { return kNumTemplateWords + c; }
std::size_t relation_token(std::size_t r, std::size_t n_obj) {
  return kNumTemplateWords + n_obj + r;
}

// answer-vocab ids
std::size_t relation_answer(std::size_t r) { return r; }
std::size_t object_answer(std::size_t c, std::size_t n_rel) { return n_rel + c; }
std::size_t yes_answer(std::size_t n_rel, std::size_t n_obj) { return n_rel + n_obj; }
std::size_t no_answer(std::size_t n_rel, std::size_t n_obj) { return n_rel + n_obj + 1; }

// Visual prototypes are a property of the shared world, not of a seed.
std::vector<std::vector<double>> class_prototypes(std::size_t n_classes, std::size_t dim) {
  Rng rng(hash64("object-class-prototypes"));
  std::vector<std::vector<double>> protos(n_classes, std::vector<double>(dim));
  for (auto& p : protos)
    for (double& v : p) v = rng.normal();
  return protos;
}

}  // namespace

std::size_t relation_rule(std::size_t subj_class, std::size_t obj_class,
                          std::size_t n_relation_classes) {
  return (3 * subj_class + 5 * obj_class) % n_relation_classes;
}

CategoryMap default_category_map(std::size_t n_object_classes,
                                 std::size_t n_relation_classes) {
  CategoryMap map;
  map.object_class_to_category.reserve(n_object_classes);
  for (std::size_t c = 0; c < n_object_classes; ++c)
    map.object_class_to_category.push_back(c == 0 ? ObjectCategory::Person
                                                  : ObjectCategory::NonPerson);
  std::size_t block = n_relation_classes / kRelationCategories;
  map.relation_class_to_category.reserve(n_relation_classes);
  for (std::size_t r = 0; r < n_relation_classes; ++r)
    map.relation_class_to_category.push_back(
        static_cast<RelationCategory>(std::min(r / block, kRelationCategories - 1)));
  return map;
}

void SynthConfig::validate() const {
  if (n_object_classes < 2) throw ConfigError("need at least 2 object classes");
  if (n_relation_classes < kRelationCategories ||
      n_relation_classes % kRelationCategories != 0)
    throw ConfigError("relation class count must be a positive multiple of " +
                      std::to_string(kRelationCategories));
  if (min_objects < 2) throw ConfigError("scenes need at least 2 objects for an edge");
  if (max_objects < min_objects) throw ConfigError("max_objects below min_objects");
  if (edge_prob < 0.0 || edge_prob > 1.0) throw ConfigError("edge_prob outside [0,1]");
  if (visual_noise < 0.0) throw ConfigError("visual_noise must be nonnegative");
  if (visual_dim == 0) throw ConfigError("visual_dim must be positive");
  if (w_rel_query < 0 || w_obj_query < 0 || w_verify < 0 || w_choice < 0)
    throw ConfigError("template weights must be nonnegative");
  if (w_rel_query + w_obj_query + w_verify + w_choice <= 0.0)
    throw ConfigError("at least one template weight must be positive");
  if (w_choice > 0 && n_relation_classes < 5)
    throw ConfigError("5-way choice questions need at least 5 relation classes");
}

std::optional<std::size_t> unique_relation_class_between(const SceneGraph& g,
                                                         std::size_t subj_class,
                                                         std::size_t obj_class) {
  std::optional<std::size_t> found;
  for (const RelationEdge& e : g.edges) {
    if (g.objects[e.subject].class_id != subj_class ||
        g.objects[e.object].class_id != obj_class)
      continue;
    if (found && *found != e.class_id) return std::nullopt;
    found = e.class_id;
  }
  return found;
}

std::optional<std::size_t> unique_object_class_for(const SceneGraph& g,
                                                   std::size_t subj_class,
                                                   std::size_t rel_class) {
  std::optional<std::size_t> found;
  for (const RelationEdge& e : g.edges) {
    if (g.objects[e.subject].class_id != subj_class || e.class_id != rel_class) continue;
    std::size_t oc = g.objects[e.object].class_id;
    if (found && *found != oc) return std::nullopt;
    found = oc;
  }
  return found;
}

bool relation_exists(const SceneGraph& g, std::size_t subj_class, std::size_t rel_class,
                     std::size_t obj_class) {
  for (const RelationEdge& e : g.edges)
    if (g.objects[e.subject].class_id == subj_class && e.class_id == rel_class &&
        g.objects[e.object].class_id == obj_class)
      return true;
  return false;
}

namespace {

SceneGraph random_graph(Rng& rng, const SynthConfig& cfg,
                        const std::vector<std::vector<double>>& protos) {
  SceneGraph g;
  std::size_t n = cfg.min_objects +
                  rng.below(cfg.max_objects - cfg.min_objects + 1);
  g.objects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ObjectNode o;
    o.id = i;
    o.class_id = rng.below(cfg.n_object_classes);
    o.visual.resize(cfg.visual_dim);
    for (std::size_t d = 0; d < cfg.visual_dim; ++d)
      o.visual[d] = protos[o.class_id][d] + cfg.visual_noise * rng.normal();
    o.box.x1 = rng.uniform(0.0, 0.8);
    o.box.y1 = rng.uniform(0.0, 0.8);
    o.box.x2 = o.box.x1 + rng.uniform(0.05, 0.2);
    o.box.y2 = o.box.y1 + rng.uniform(0.05, 0.2);
    g.objects.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!rng.bernoulli(cfg.edge_prob)) continue;
      g.edges.push_back({i, j,
                         relation_rule(g.objects[i].class_id, g.objects[j].class_id,
                                       cfg.n_relation_classes)});
    }
  if (g.edges.empty()) {
    std::size_t i = rng.below(n);
    std::size_t j = rng.below(n - 1);
    if (j >= i) ++j;
    g.edges.push_back({i, j,
                       relation_rule(g.objects[i].class_id, g.objects[j].class_id,
                                     cfg.n_relation_classes)});
  }
  return g;
}

enum class Template { RelQuery, ObjQuery, Verify, Choice };

Template pick_template(Rng& rng, const SynthConfig& cfg) {
  double total = cfg.w_rel_query + cfg.w_obj_query + cfg.w_verify + cfg.w_choice;
  double x = rng.uniform() * total;
  if ((x -= cfg.w_rel_query) < 0) return Template::RelQuery;
  if ((x -= cfg.w_obj_query) < 0) return Template::ObjQuery;
  if ((x -= cfg.w_verify) < 0) return Template::Verify;
  return Template::Choice;
}

std::size_t word_id(const std::vector<std::string>& vocab, const std::string& w) {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (vocab[i] == w) return i;
  throw LookupError("word '" + w + "' not in vocabulary");
}

}  // namespace

Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  Dataset data;
  data.n_object_classes = cfg.n_object_classes;
  data.n_relation_classes = cfg.n_relation_classes;
  data.visual_dim = cfg.visual_dim;
  data.category_map = default_category_map(cfg.n_object_classes, cfg.n_relation_classes);

  for (const char* w : kTemplateWords) data.vocab.push_back(w);
  for (std::size_t c = 0; c < cfg.n_object_classes; ++c)
    data.vocab.push_back(object_name(c));
  for (std::size_t r = 0; r < cfg.n_relation_classes; ++r)
    data.vocab.push_back(relation_name(r, cfg.n_relation_classes));

  for (std::size_t r = 0; r < cfg.n_relation_classes; ++r)
    data.answer_vocab.push_back(relation_name(r, cfg.n_relation_classes));
  for (std::size_t c = 0; c < cfg.n_object_classes; ++c)
    data.answer_vocab.push_back(object_name(c));
  data.answer_vocab.push_back("yes");
  data.answer_vocab.push_back("no");

  std::vector<std::vector<double>> protos =
      class_prototypes(cfg.n_object_classes, cfg.visual_dim);
  std::size_t n_obj = cfg.n_object_classes, n_rel = cfg.n_relation_classes;

  Rng rng(cfg.seed);
  data.samples.reserve(cfg.count);
  for (std::size_t id = 0; id < cfg.count; ++id) {
    Sample s;
    s.id = id;
    s.graph = random_graph(rng, cfg, protos);
    const SceneGraph& g = s.graph;

    Template tmpl = pick_template(rng, cfg);
    const RelationEdge& e = g.edges[rng.below(g.edges.size())];
    std::size_t a_cls = g.objects[e.subject].class_id;
    std::size_t b_cls = g.objects[e.object].class_id;

    // An edge's class is forced by its endpoint classes, so a relation query
    // about (a_cls, b_cls) always has exactly one true answer. An object
    // query can still be ambiguous (two classes may share a relation-rule
    // residue); fall back to the always-derivable relation query then.
    if (tmpl == Template::ObjQuery) {
      auto derived = unique_object_class_for(g, a_cls, e.class_id);
      if (!derived || *derived != b_cls) tmpl = Template::RelQuery;
    }

    Question& q = s.question;
    switch (tmpl) {
      case Template::RelQuery:
        q.type = QuestionType::Open;
        q.tokens = {0 /*what*/, 1 /*relation*/, 2 /*between*/, object_token(a_cls),
                    3 /*and*/, object_token(b_cls)};
        q.answer = relation_answer(e.class_id);
        break;
      case Template::ObjQuery:
        q.type = QuestionType::Open;
        q.tokens = {4 /*which*/, 5 /*object*/, 6 /*does*/, object_token(a_cls),
                    relation_token(e.class_id, n_obj)};
        q.answer = object_answer(b_cls, n_rel);
        break;
      case Template::Verify: {
        q.type = QuestionType::Open;
        bool yes = rng.bernoulli(0.5);
        std::size_t r = e.class_id;
        if (!yes) {
          std::size_t offset = 1 + rng.below(n_rel - 1);
          r = (e.class_id + offset) % n_rel;
        }
        q.tokens = {7 /*is*/, 8 /*there*/, relation_token(r, n_obj), 2 /*between*/,
                    object_token(a_cls), 3 /*and*/, object_token(b_cls)};
        bool exists = relation_exists(g, a_cls, r, b_cls);
        q.answer = exists ? yes_answer(n_rel, n_obj) : no_answer(n_rel, n_obj);
        break;
      }
      case Template::Choice: {
        q.type = QuestionType::Choice;
        q.tokens = {0, 1, 2, object_token(a_cls), 3, object_token(b_cls)};
        std::vector<std::size_t> distractors;
        for (std::size_t r = 0; r < n_rel; ++r)
          if (r != e.class_id) distractors.push_back(r);
        // Fisher-Yates prefix: pick 4 distinct wrong relations
        for (std::size_t k = 0; k < 4; ++k) {
          std::size_t pick = k + rng.below(distractors.size() - k);
          std::swap(distractors[k], distractors[pick]);
        }
        std::size_t correct_pos = rng.below(5);
        q.choices.clear();
        std::size_t di = 0;
        for (std::size_t pos = 0; pos < 5; ++pos) {
          std::size_t r = (pos == correct_pos) ? e.class_id : distractors[di++];
          q.choices.push_back({relation_token(r, n_obj)});
        }
        q.answer = correct_pos;
        break;
      }
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

std::optional<std::size_t> derive_answer(const Dataset& data, const Sample& s) {
  const std::vector<std::size_t>& toks = s.question.tokens;
  if (toks.empty() || toks[0] >= data.vocab.size()) return std::nullopt;
  std::size_t n_obj = data.n_object_classes, n_rel = data.n_relation_classes;
  auto obj_class_of = [&](std::size_t tok) -> std::optional<std::size_t> {
    if (tok < kNumTemplateWords || tok >= kNumTemplateWords + n_obj) return std::nullopt;
    return tok - kNumTemplateWords;
  };
  auto rel_class_of = [&](std::size_t tok) -> std::optional<std::size_t> {
    if (tok < kNumTemplateWords + n_obj || tok >= kNumTemplateWords + n_obj + n_rel)
      return std::nullopt;
    return tok - kNumTemplateWords - n_obj;
  };

  const std::string& head = data.vocab[toks[0]];
  if (head == "what" && toks.size() == 6) {
    auto a = obj_class_of(toks[3]), b = obj_class_of(toks[5]);
    if (!a || !b) return std::nullopt;
    auto r = unique_relation_class_between(s.graph, *a, *b);
    if (!r) return std::nullopt;
    if (s.question.type == QuestionType::Open) return relation_answer(*r);
    // multiple choice: the index whose single token names the derived relation
    std::size_t expected_tok = relation_token(*r, n_obj);
    for (std::size_t i = 0; i < s.question.choices.size(); ++i)
      if (s.question.choices[i].size() == 1 && s.question.choices[i][0] == expected_tok)
        return i;
    return std::nullopt;
  }
  if (head == "which" && toks.size() == 5) {
    auto a = obj_class_of(toks[3]);
    auto r = rel_class_of(toks[4]);
    if (!a || !r) return std::nullopt;
    auto b = unique_object_class_for(s.graph, *a, *r);
    if (!b) return std::nullopt;
    return object_answer(*b, n_rel);
  }
  if (head == "is" && toks.size() == 7) {
    auto r = rel_class_of(toks[2]);
    auto a = obj_class_of(toks[4]);
    auto b = obj_class_of(toks[6]);
    if (!r || !a || !b) return std::nullopt;
    return relation_exists(s.graph, *a, *r, *b) ? yes_answer(n_rel, n_obj)
                                                : no_answer(n_rel, n_obj);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON-lines serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json sample_to_json(const Sample& s) {
  nlohmann::json j;
  j["id"] = s.id;
  nlohmann::json objs = nlohmann::json::array();
  for (const ObjectNode& o : s.graph.objects) {
    objs.push_back({{"id", o.id},
                    {"class_id", o.class_id},
                    {"visual", o.visual},
                    {"bbox", {o.box.x1, o.box.y1, o.box.x2, o.box.y2}}});
  }
  j["objects"] = std::move(objs);
  nlohmann::json rels = nlohmann::json::array();
  for (const RelationEdge& e : s.graph.edges)
    rels.push_back({{"subj", e.subject}, {"obj", e.object}, {"class_id", e.class_id}});
  j["relations"] = std::move(rels);
  nlohmann::json q;
  q["tokens"] = s.question.tokens;
  q["type"] = s.question.type == QuestionType::Open ? "open" : "choice";
  if (s.question.type == QuestionType::Choice) q["choices"] = s.question.choices;
  q["answer"] = s.question.answer;
  j["question"] = std::move(q);
  return j;
}

Sample sample_from_json(const nlohmann::json& j) {
  Sample s;
  s.id = j.at("id").get<std::size_t>();
  for (const auto& jo : j.at("objects")) {
    ObjectNode o;
    o.id = jo.at("id").get<std::size_t>();
    o.class_id = jo.at("class_id").get<std::size_t>();
    o.visual = jo.at("visual").get<std::vector<double>>();
    auto bbox = jo.at("bbox").get<std::vector<double>>();
    if (bbox.size() != 4) throw std::runtime_error("bbox must have 4 numbers");
    o.box = {bbox[0], bbox[1], bbox[2], bbox[3]};
    s.graph.objects.push_back(std::move(o));
  }
  for (const auto& je : j.at("relations")) {
    s.graph.edges.push_back({je.at("subj").get<std::size_t>(),
                             je.at("obj").get<std::size_t>(),
                             je.at("class_id").get<std::size_t>()});
  }
  const auto& jq = j.at("question");
  s.question.tokens = jq.at("tokens").get<std::vector<std::size_t>>();
  std::string type = jq.at("type").get<std::string>();
  if (type == "open") {
    s.question.type = QuestionType::Open;
  } else if (type == "choice") {
    s.question.type = QuestionType::Choice;
    s.question.choices = jq.at("choices").get<std::vector<std::vector<std::size_t>>>();
    if (s.question.choices.size() != 5)
      throw std::runtime_error("choice question must carry exactly 5 choices");
  } else {
    throw std::runtime_error("unknown question type '" + type + "'");
  }
  s.question.answer = jq.at("answer").get<std::size_t>();
  return s;
}

}  // namespace

void write_jsonl(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  nlohmann::json header;
  header["format_version"] = 1;
  header["vocab"] = {{"question", data.vocab}, {"answer", data.answer_vocab}};
  std::vector<std::size_t> ocat, rcat;
  for (ObjectCategory c : data.category_map.object_class_to_category)
    ocat.push_back(static_cast<std::size_t>(c));
  for (RelationCategory c : data.category_map.relation_class_to_category)
    rcat.push_back(static_cast<std::size_t>(c));
  header["category_map"] = {{"objects", ocat}, {"relations", rcat}};
  header["dims"] = {{"visual_dim", data.visual_dim},
                    {"n_object_classes", data.n_object_classes},
                    {"n_relation_classes", data.n_relation_classes}};
  out << header.dump() << "\n";
  for (const Sample& s : data.samples) out << sample_to_json(s).dump() << "\n";
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

Dataset read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  Dataset data;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) return data;  // empty file: empty stream
  ++line_no;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("bad header: ") + e.what());
  }
  try {
    std::size_t version = header.at("format_version").get<std::size_t>();
    if (version != 1)
      throw FormatError("unsupported format_version " + std::to_string(version));
    data.vocab = header.at("vocab").at("question").get<std::vector<std::string>>();
    data.answer_vocab = header.at("vocab").at("answer").get<std::vector<std::string>>();
    for (std::size_t c : header.at("category_map").at("objects").get<std::vector<std::size_t>>()) {
      if (c >= kObjectCategories) throw FormatError("object category out of range");
      data.category_map.object_class_to_category.push_back(static_cast<ObjectCategory>(c));
    }
    for (std::size_t c :
         header.at("category_map").at("relations").get<std::vector<std::size_t>>()) {
      if (c >= kRelationCategories) throw FormatError("relation category out of range");
      data.category_map.relation_class_to_category.push_back(static_cast<RelationCategory>(c));
    }
    data.visual_dim = header.at("dims").at("visual_dim").get<std::size_t>();
    data.n_object_classes = header.at("dims").at("n_object_classes").get<std::size_t>();
    data.n_relation_classes = header.at("dims").at("n_relation_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("bad header: ") + e.what());
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      data.samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return data;
}

}  // namespace graphqa
