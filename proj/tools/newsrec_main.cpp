#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "newsrec/checkpoint.hpp"
#include "newsrec/config.hpp"
#include "newsrec/dataset.hpp"
#include "newsrec/embed_store.hpp"
#include "newsrec/encoders.hpp"
#include "newsrec/error.hpp"
#include "newsrec/kg.hpp"
#include "newsrec/metrics.hpp"
#include "newsrec/synth.hpp"
#include "newsrec/trainer.hpp"

namespace fs = std::filesystem;
using namespace newsrec;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int64_t> seed;
  int threads = 1;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path, "key=value config file");
  cmd->add_option("--set", o->sets, "override a config key (key=value)")
      ->take_all();
  cmd->add_option("--seed", o->seed, "override the seed config key");
  cmd->add_option("--threads", o->threads, "worker cap for parallel stages")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o->out_dir, "output directory");
}

RunConfig load_config(const CommonOpts& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig::defaults()
                                        : RunConfig::from_file(o.config_path);
  for (const auto& kv : o.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  return cfg;
}

std::string require_path(const RunConfig& cfg, const std::string& key) {
  const std::string& p = cfg.get(key);
  if (p.empty()) throw ConfigError("config key " + key + " is required here");
  if (!fs::exists(p)) throw ValidationError("missing file: " + p + " (" + key + ")");
  return p;
}

void ensure_out(const CommonOpts& o) { fs::create_directories(o.out_dir); }

std::ofstream open_out(const CommonOpts& o, const std::string& name) {
  const fs::path p = fs::path(o.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

// Loaded resources for train/eval/ablate/explain.
struct Resources {
  ClickDataset dataset;
  TripleGraph graph;
  LayerStore embeds;
  bool has_graph = false;
  bool has_embeds = false;

  Stores stores() const {
    return Stores{has_graph ? &graph : nullptr, has_embeds ? &embeds : nullptr};
  }
};

Resources load_resources(const RunConfig& cfg, bool need_kg, bool need_llm,
                         int entity_dim, int vocab_min_freq) {
  Resources r;
  r.dataset = read_snapshot(require_path(cfg, "data.snapshot"), vocab_min_freq);
  if (need_kg) {
    ParseLog log;
    auto triples = parse_triples_tsv(require_path(cfg, "data.triples"), &log);
    r.graph = TripleGraph::build(triples);
    auto vecs = parse_entity_vec(require_path(cfg, "data.entity_vec"),
                                 entity_dim, &log);
    r.graph.attach_embeddings(vecs, entity_dim);
    r.has_graph = true;
    if (log.skipped > 0) {
      std::cerr << "warning: skipped " << log.skipped << " malformed kg lines\n";
    }
  }
  if (need_llm) {
    r.embeds = read_store(require_path(cfg, "data.embeddings"));
    r.has_embeds = true;
  }
  return r;
}

// Resolves llm_dim/llm_layers against the loaded store.
void resolve_llm_dims(ModelConfig* m, const LayerStore& store) {
  if (m->llm_dim == 0) {
    m->llm_dim = store.dim();
  } else if (m->llm_dim != store.dim()) {
    throw ConfigError("model.llm_dim=" + std::to_string(m->llm_dim) +
                      " but embedding store has D=" + std::to_string(store.dim()));
  }
  if (m->llm_layers != store.layers()) {
    throw ConfigError("model.llm_layers=" + std::to_string(m->llm_layers) +
                      " but embedding store has L=" +
                      std::to_string(store.layers()));
  }
}

void print_stats(const DatasetStats& st, std::ostream& os) {
  os << "news\t" << st.news_count << '\n'
     << "train_impressions\t" << st.train_impressions << '\n'
     << "eval_impressions\t" << st.eval_impressions << '\n'
     << "vocab_size\t" << st.vocab_size << '\n'
     << "news_with_entities\t" << st.news_with_entities << '\n'
     << "entity_coverage\t" << st.entity_coverage << '\n'
     << "unresolved_history_refs\t" << st.unresolved_history_refs << '\n'
     << "unresolved_candidate_refs\t" << st.unresolved_candidate_refs << '\n';
}

int cmd_synth(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  SynthSpec spec = cfg.synth_spec();
  SynthOutput out = synth_dataset(spec, cfg.seed());
  ensure_out(opts);

  write_snapshot(out.dataset, (fs::path(opts.out_dir) / "dataset.snap").string());

  {
    auto f = open_out(opts, "triples.tsv");
    for (const auto& t : out.triples) {
      f << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    }
  }
  {
    auto f = open_out(opts, "entity_embedding.vec");
    f.precision(17);
    for (const auto& [id, vec] : out.entity_vecs) {
      f << id;
      for (int64_t i = 0; i < vec.numel(); ++i) f << '\t' << vec[i];
      f << '\n';
    }
  }
  if (!out.news_embeds.empty()) {
    LayerStore store(spec.llm_layers, spec.llm_dim);
    for (auto& [id, rows] : out.news_embeds) store.put(id, std::move(rows));
    write_store(store, (fs::path(opts.out_dir) / "news_embeddings.lkem").string());
  }

  std::cout << "mode\t" << synth_mode_name(spec.mode) << '\n';
  print_stats(out.dataset.stats(), std::cout);
  std::cout << "triples\t" << out.triples.size() << '\n'
            << "entities\t" << out.entity_vecs.size() << '\n';
  return 0;
}

int cmd_ingest(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  ParseLog log;
  ClickDataset ds;
  ds.news = parse_news_tsv(require_path(cfg, "mind.news"), &log);
  ds.train = parse_behaviors_tsv(require_path(cfg, "mind.behaviors_train"), &log);
  ds.eval = parse_behaviors_tsv(require_path(cfg, "mind.behaviors_eval"), &log);
  if (ds.train.empty() && ds.eval.empty()) {
    throw ValidationError("no impressions");
  }
  ds.finalize(static_cast<int>(cfg.get_int("data.vocab_min_freq")));
  ensure_out(opts);
  write_snapshot(ds, (fs::path(opts.out_dir) / "dataset.snap").string());
  print_stats(ds.stats(), std::cout);
  std::cout << "skipped_lines\t" << log.skipped << '\n';
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

// Writes epoch lines to the log file and echoes them to stderr.
class TeeBuf final : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int ra = a_->sputc(static_cast<char>(c));
    const int rb = b_->sputc(static_cast<char>(c));
    return (ra == EOF || rb == EOF) ? EOF : c;
  }
  int sync() override {
    const int ra = a_->pubsync();
    const int rb = b_->pubsync();
    return (ra == 0 && rb == 0) ? 0 : -1;
  }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

TrainResult run_training(const RunConfig& cfg, const CommonOpts& opts,
                         Resources* res, std::ostream* progress,
                         std::string* effective_config) {
  TrainConfig tc = cfg.train_config();
  tc.threads = opts.threads;
  *res = load_resources(cfg, tc.model.use_kg, tc.model.use_llm,
                        tc.model.entity_dim, tc.vocab_min_freq);
  if (tc.model.use_llm) resolve_llm_dims(&tc.model, res->embeds);
  if (effective_config) {
    RunConfig eff = cfg;
    eff.set("model.llm_dim", std::to_string(tc.model.llm_dim));
    *effective_config = eff.serialize();
  }
  return train(res->dataset, res->stores(), tc, progress);
}

int cmd_train(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  ensure_out(opts);
  auto log_file = open_out(opts, "train.log");
  log_file << "# epoch\tloss\tval_auc\tval_mrr\tval_ndcg5\tval_ndcg10\n";
  TeeBuf tee(log_file.rdbuf(), std::cerr.rdbuf());
  std::ostream progress(&tee);

  Resources res;
  std::string effective;
  TrainResult result = run_training(cfg, opts, &res, &progress, &effective);

  CheckpointData ckpt = make_checkpoint(result.params, effective,
                                        result.best_epoch, result.best_val);
  write_checkpoint(ckpt, (fs::path(opts.out_dir) / "model.lkck").string());
  std::cout << result.best_val.kv_block();
  std::cout << "best_epoch=" << result.best_epoch << '\n';
  if (result.dropped_samples > 0) {
    std::cerr << "warning: dropped " << result.dropped_samples
              << " samples referencing unknown news\n";
  }
  return 0;
}

// Rebuilds the model a checkpoint was trained with, against the current
// dataset. Shape disagreements surface as ConfigError (exit 2).
struct LoadedModel {
  ModelParams params;
  Resources res;
  TrainConfig tc;
};

LoadedModel load_model(const RunConfig& cli_cfg, const std::string& ckpt_path,
                       int threads) {
  if (!fs::exists(ckpt_path)) {
    throw ValidationError("missing checkpoint: " + ckpt_path);
  }
  CheckpointData ckpt = read_checkpoint(ckpt_path);
  RunConfig ckpt_cfg = RunConfig::from_text(ckpt.config_text);
  // Model geometry comes from the checkpoint; data locations from the
  // current invocation.
  for (const char* key :
       {"data.snapshot", "data.triples", "data.entity_vec", "data.embeddings"}) {
    ckpt_cfg.set(key, cli_cfg.get(key));
  }

  LoadedModel lm;
  lm.tc = ckpt_cfg.train_config();
  lm.tc.threads = threads;
  lm.res = load_resources(ckpt_cfg, lm.tc.model.use_kg, lm.tc.model.use_llm,
                          lm.tc.model.entity_dim, lm.tc.vocab_min_freq);
  if (lm.tc.model.use_llm) resolve_llm_dims(&lm.tc.model, lm.res.embeds);
  lm.tc.model.vocab_size = lm.res.dataset.vocab.size();
  lm.params = build_model(lm.tc.model, 0);
  load_into(ckpt, &lm.params);
  return lm;
}

void require_full_coverage(const FeatureCache& features, bool use_llm) {
  if (!use_llm || features.missing_embeddings().empty()) return;
  const auto& missing = features.missing_embeddings();
  std::string msg = "embedding store is missing " +
                    std::to_string(missing.size()) + " news ids (first: ";
  msg += missing.front() + ")";
  throw ValidationError(msg);
}

int cmd_eval(const CommonOpts& opts, const std::string& ckpt_path) {
  RunConfig cfg = load_config(opts);
  LoadedModel lm = load_model(cfg, ckpt_path, opts.threads);
  FeatureCache features(lm.res.dataset, lm.res.stores().graph,
                        lm.res.stores().embeds, lm.params.cfg, lm.tc.seed);
  require_full_coverage(features, lm.params.cfg.use_llm);
  MetricReport report =
      evaluate(lm.params, features, lm.res.dataset.eval, lm.tc.history_max,
               opts.threads, "eval");
  ensure_out(opts);
  open_out(opts, "metrics.tsv") << report.tsv();
  open_out(opts, "metrics.kv") << report.kv_block();
  std::cout << report.kv_block();
  return 0;
}

int cmd_ablate(const CommonOpts& opts) {
  RunConfig base = load_config(opts);
  ensure_out(opts);

  struct Variant {
    const char* name;
    bool use_kg;
    bool use_llm;
  };
  const Variant variants[] = {
      {"full", true, true},
      {"wo_kg", false, true},
      {"wo_llm", true, false},
      {"orig", false, false},
  };

  std::ostringstream table;
  table.precision(6);
  table << std::fixed;
  table << "variant\tauc\tmrr\tndcg5\tndcg10\n";
  for (const Variant& v : variants) {
    RunConfig cfg = base;
    cfg.set("model.use_kg", v.use_kg ? "true" : "false");
    cfg.set("model.use_llm", v.use_llm ? "true" : "false");
    // Without the llm branch the kg query must come from the general
    // encoder.
    if (v.use_kg && !v.use_llm) cfg.set("kg.query_source", "general");
    Resources res;
    TrainResult result = run_training(cfg, opts, &res, nullptr, nullptr);
    table << v.name << '\t' << result.best_val.auc << '\t'
          << result.best_val.mrr << '\t' << result.best_val.ndcg5 << '\t'
          << result.best_val.ndcg10 << '\n';
    std::cerr << v.name << " done: val_auc=" << result.best_val.auc << '\n';
  }
  open_out(opts, "ablation.tsv") << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_explain(const CommonOpts& opts, const std::string& ckpt_path,
                const std::string& news_id, const std::string& user_id) {
  RunConfig cfg = load_config(opts);
  LoadedModel lm = load_model(cfg, ckpt_path, opts.threads);
  const ClickDataset& ds = lm.res.dataset;

  if (!ds.find_news(news_id)) {
    throw ValidationError("unknown news id: " + news_id);
  }
  const Impression* imp = nullptr;
  for (const auto* list : {&ds.eval, &ds.train}) {
    for (const auto& candidate : *list) {
      if (candidate.user_id == user_id) {
        imp = &candidate;
        break;
      }
    }
    if (imp) break;
  }
  if (!imp) throw ValidationError("unknown user id: " + user_id);

  FeatureCache features(ds, lm.res.stores().graph, lm.res.stores().embeds,
                        lm.params.cfg, lm.tc.seed);
  require_full_coverage(features, lm.params.cfg.use_llm);

  Tape tape;
  AttnTrace trace;
  trace.news_id = news_id;
  NewsRepr news_repr =
      encode_news(tape, lm.params, features.get(news_id), &trace);
  std::vector<Var> hist;
  const size_t zmax = static_cast<size_t>(lm.tc.history_max);
  const size_t start =
      imp->history.size() > zmax ? imp->history.size() - zmax : 0;
  for (size_t i = start; i < imp->history.size(); ++i) {
    if (!ds.find_news(imp->history[i])) continue;
    hist.push_back(encode_news(tape, lm.params, features.get(imp->history[i])).full);
  }
  Var user = encode_user(tape, lm.params, hist);
  const double match = tape.scalar_value(score(tape, news_repr.full, user));

  std::ostringstream os;
  os.precision(17);
  os << "news\t" << news_id << '\n';
  os << "user\t" << user_id << '\n';
  os << "impression\t" << imp->id << '\n';
  os << "score\t" << match << '\n';
  for (const auto& e : trace.entries) {
    for (size_t i = 0; i < e.entities.size(); ++i) {
      os << "attn\t" << news_id << '\t' << e.hop << '\t' << e.head << '\t'
         << e.entities[i] << '\t' << e.weights[i] << '\n';
    }
  }
  for (const auto& e : trace.entries) {
    const auto idx = top_weight_indices(e, 5);
    for (size_t r = 0; r < idx.size(); ++r) {
      os << "top5\t" << e.hop << '\t' << e.head << '\t' << (r + 1) << '\t'
         << e.entities[idx[r]] << '\t' << e.weights[idx[r]] << '\n';
    }
  }
  ensure_out(opts);
  open_out(opts, "explain.txt") << os.str();
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "news recommendation engine: word, llm-embedding and knowledge-graph "
      "encoders with negative-sampling training"};
  app.require_subcommand(1);

  CommonOpts synth_o, ingest_o, train_o, eval_o, ablate_o, explain_o;
  std::string eval_ckpt, explain_ckpt, explain_news, explain_user;

  add_common(app.add_subcommand("synth", "generate a synthetic dataset"), &synth_o);
  add_common(app.add_subcommand("ingest", "parse MIND files into a snapshot"),
             &ingest_o);
  add_common(app.add_subcommand("train", "train and write a checkpoint"), &train_o);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, &eval_o);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model.lkck path")->required();
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "train full / w-o kg / w-o llm / orig variants");
  add_common(ablate_cmd, &ablate_o);
  auto* explain_cmd = app.add_subcommand(
      "explain", "dump attention weights for a news/user pair");
  add_common(explain_cmd, &explain_o);
  explain_cmd->add_option("--checkpoint", explain_ckpt, "model.lkck path")
      ->required();
  explain_cmd->add_option("--news", explain_news, "news id")->required();
  explain_cmd->add_option("--user", explain_user, "user id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("synth")) return cmd_synth(synth_o);
    if (app.got_subcommand("ingest")) return cmd_ingest(ingest_o);
    if (app.got_subcommand("train")) return cmd_train(train_o);
    if (app.got_subcommand("eval")) return cmd_eval(eval_o, eval_ckpt);
    if (app.got_subcommand("ablate")) return cmd_ablate(ablate_o);
    if (app.got_subcommand("explain")) {
      return cmd_explain(explain_o, explain_ckpt, explain_news, explain_user);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
