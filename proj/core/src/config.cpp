#include "newsrec/config.hpp"

#include <fstream>
#include <sstream>

#include "newsrec/error.hpp"

namespace newsrec {

const std::map<std::string, std::string>& RunConfig::schema() {
  static const std::map<std::string, std::string> kSchema = {
      {"seed", "42"},
      // resource paths (empty = unset; commands require what they need)
      {"data.snapshot", ""},
      {"data.triples", ""},
      {"data.entity_vec", ""},
      {"data.embeddings", ""},
      {"data.word_vec", ""},
      {"data.vocab_min_freq", "2"},
      {"mind.news", ""},
      {"mind.behaviors_train", ""},
      {"mind.behaviors_eval", ""},
      // training
      {"train.neg_k", "4"},
      {"train.batch_size", "64"},
      {"train.lr", "0.0001"},
      {"train.max_epochs", "10"},
      {"train.patience", "3"},
      {"train.history_max", "50"},
      // model geometry and branches
      {"model.use_kg", "true"},
      {"model.use_llm", "true"},
      {"model.d_word", "300"},
      {"model.d_gen", "400"},
      {"model.llm_layers", "4"},
      {"model.llm_proj", "500"},
      {"model.llm_dim", "0"},  // 0 = read D from the embedding store
      {"model.entity_dim", "100"},
      {"kg.hops", "2"},
      {"kg.max_neighbors", "20"},
      {"kg.num_heads", "3"},
      {"kg.out_dim", "128"},
      {"kg.query_source", "llm"},
      {"kg.include_source_hop", "false"},
      // synthetic data generation
      {"synth.mode", "mixed"},
      {"synth.users", "200"},
      {"synth.news", "500"},
      {"synth.topics", "8"},
      {"synth.entities_per_topic", "24"},
      {"synth.entities_per_news", "3"},
      {"synth.history_len", "8"},
      {"synth.train_per_user", "4"},
      {"synth.eval_per_user", "2"},
      {"synth.candidates", "6"},
      {"synth.positives", "2"},
      {"synth.title_len", "8"},
      {"synth.abstract_len", "16"},
      {"synth.word_pool", "400"},
      {"synth.llm_dim", "16"},
      {"synth.entity_dim", "100"},
      {"synth.noise", "0"},
      {"synth.edge_prob", "0.35"},
  };
  return kSchema;
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.kv_ = schema();
  return cfg;
}

namespace {
void apply_line(RunConfig* cfg, const std::string& raw, int lineno) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  size_t begin = line.find_first_not_of(" \t");
  if (begin == std::string::npos) return;
  if (line[begin] == '#') return;
  const size_t eq = line.find('=', begin);
  if (eq == std::string::npos) {
    throw ConfigError("config line " + std::to_string(lineno) +
                      ": expected key=value, got '" + line + "'");
  }
  std::string key = line.substr(begin, eq - begin);
  while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
  std::string value = line.substr(eq + 1);
  size_t vbegin = value.find_first_not_of(" \t");
  value = vbegin == std::string::npos ? "" : value.substr(vbegin);
  while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) {
    value.pop_back();
  }
  cfg->set(key, value);
}
}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  RunConfig cfg = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) apply_line(&cfg, line, ++lineno);
  return cfg;
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg = defaults();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) apply_line(&cfg, line, ++lineno);
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!schema().count(key)) {
    throw ConfigError("unknown config key: " + key);
  }
  kv_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

int64_t RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const int64_t out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs an integer, got '" + v + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs a number, got '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + key + " needs true/false, got '" + v + "'");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << '=' << v << '\n';
  return os.str();
}

uint64_t RunConfig::seed() const {
  return static_cast<uint64_t>(get_int("seed"));
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.neg_k = static_cast<int32_t>(get_int("train.neg_k"));
  tc.batch_size = static_cast<int32_t>(get_int("train.batch_size"));
  tc.lr = get_double("train.lr");
  tc.max_epochs = static_cast<int32_t>(get_int("train.max_epochs"));
  tc.patience = static_cast<int32_t>(get_int("train.patience"));
  tc.seed = seed();
  tc.history_max = static_cast<int32_t>(get_int("train.history_max"));
  tc.vocab_min_freq = static_cast<int32_t>(get_int("data.vocab_min_freq"));
  tc.word_vec_path = get("data.word_vec");

  ModelConfig& m = tc.model;
  m.use_kg = get_bool("model.use_kg");
  m.use_llm = get_bool("model.use_llm");
  m.d_word = static_cast<int32_t>(get_int("model.d_word"));
  m.d_gen = static_cast<int32_t>(get_int("model.d_gen"));
  m.llm_layers = static_cast<int32_t>(get_int("model.llm_layers"));
  m.llm_proj = static_cast<int32_t>(get_int("model.llm_proj"));
  m.llm_dim = static_cast<int32_t>(get_int("model.llm_dim"));
  m.entity_dim = static_cast<int32_t>(get_int("model.entity_dim"));
  m.kg_hops = static_cast<int32_t>(get_int("kg.hops"));
  m.kg_heads = static_cast<int32_t>(get_int("kg.num_heads"));
  m.kg_out = static_cast<int32_t>(get_int("kg.out_dim"));
  m.kg_max_neighbors = static_cast<int32_t>(get_int("kg.max_neighbors"));
  m.kg_include_source_hop = get_bool("kg.include_source_hop");
  const std::string& qs = get("kg.query_source");
  if (qs == "llm") {
    m.query_source = QuerySource::kLlm;
  } else if (qs == "general") {
    m.query_source = QuerySource::kGeneral;
  } else {
    throw ConfigError("kg.query_source must be llm or general, got '" + qs + "'");
  }
  return tc;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s;
  s.mode = parse_synth_mode(get("synth.mode"));
  s.users = static_cast<int32_t>(get_int("synth.users"));
  s.news = static_cast<int32_t>(get_int("synth.news"));
  s.topics = static_cast<int32_t>(get_int("synth.topics"));
  s.entities_per_topic = static_cast<int32_t>(get_int("synth.entities_per_topic"));
  s.entities_per_news = static_cast<int32_t>(get_int("synth.entities_per_news"));
  s.history_len = static_cast<int32_t>(get_int("synth.history_len"));
  s.train_per_user = static_cast<int32_t>(get_int("synth.train_per_user"));
  s.eval_per_user = static_cast<int32_t>(get_int("synth.eval_per_user"));
  s.candidates = static_cast<int32_t>(get_int("synth.candidates"));
  s.positives = static_cast<int32_t>(get_int("synth.positives"));
  s.title_len = static_cast<int32_t>(get_int("synth.title_len"));
  s.abstract_len = static_cast<int32_t>(get_int("synth.abstract_len"));
  s.word_pool = static_cast<int32_t>(get_int("synth.word_pool"));
  s.llm_layers = static_cast<int32_t>(get_int("model.llm_layers"));
  s.llm_dim = static_cast<int32_t>(get_int("synth.llm_dim"));
  s.entity_dim = static_cast<int32_t>(get_int("synth.entity_dim"));
  s.noise = get_double("synth.noise");
  s.edge_prob = get_double("synth.edge_prob");
  return s;
}

}  // namespace newsrec
