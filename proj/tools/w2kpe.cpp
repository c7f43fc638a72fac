#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "w2kpe/errors.hpp"
#include "w2kpe/pipeline.hpp"
#include "w2kpe/synth.hpp"

namespace {

using namespace w2kpe;
using nlohmann::json;

// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
// violation.
constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Flags {
  std::string config;
  std::string corpus;
  std::string lexicon;
  std::string stopwords;
  std::string model;
  std::string out;
  std::size_t max_segment_words = 500;
  double alpha = 0.99;
  double gamma = 2.0;
  double lr = 0.001;
  int batch_size = 10;
  int epochs = 30;
  std::string topk = "10,15,20";
  std::uint64_t seed = 0;
  int embed_dim = 64;
  int hidden_dim = 64;
  int encoder_depth = 1;
  int max_gap = 1;
  double min_coverage = 0.5;
  double label_threshold = 0.5;
  bool disable_fusion = false;
  bool disable_keyphrase_encoding = false;
  bool disable_focal = false;
  bool disable_scoring = false;
  bool dump_encoded = false;
};

std::vector<int> parse_topk(const std::string& list) {
  std::vector<int> ks;
  std::size_t pos = 0;
  while (pos < list.size()) {
    std::size_t next = list.find(',', pos);
    if (next == std::string::npos) next = list.size();
    const std::string item = list.substr(pos, next - pos);
    if (!item.empty()) ks.push_back(std::stoi(item));
    pos = next + 1;
  }
  if (ks.empty()) throw Error("--topk must name at least one k");
  for (int k : ks) {
    if (k < 1) throw Error("--topk values must be >= 1");
  }
  return ks;
}

// Registers the shared flags on a subcommand and remembers which were given
// explicitly, so config-file values lose only to flags the user typed.
void add_common_options(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "JSON run configuration file");
  cmd->add_option("--corpus", flags.corpus, "corpus file (JSON lines)");
  cmd->add_option("--lexicon", flags.lexicon, "segmentation lexicon, one token per line");
  cmd->add_option("--stopwords", flags.stopwords, "stop word list, one word per line");
  cmd->add_option("--model", flags.model, "model file path");
  cmd->add_option("--out", flags.out, "output file path");
  cmd->add_option("--max-segment-words", flags.max_segment_words,
                  "sentence fusion threshold (default 500)");
  cmd->add_option("--alpha", flags.alpha, "focal/scoring loss mix (default 0.99)");
  cmd->add_option("--gamma", flags.gamma, "focal focusing exponent (default 2)");
  cmd->add_option("--lr", flags.lr, "learning rate (default 0.001)");
  cmd->add_option("--batch-size", flags.batch_size, "mini-batch size (default 10)");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--topk", flags.topk, "comma-separated k values (default 10,15,20)");
  cmd->add_option("--seed", flags.seed, "root seed; stages derive their own");
  cmd->add_option("--embed-dim", flags.embed_dim, "embedding width (default 64)");
  cmd->add_option("--hidden-dim", flags.hidden_dim, "encoder width (default 64)");
  cmd->add_option("--encoder-depth", flags.encoder_depth, "encoder layers (default 1)");
  cmd->add_option("--max-gap", flags.max_gap, "tokens allowed inside an appearance gap");
  cmd->add_option("--min-coverage", flags.min_coverage, "minimum appearance completeness");
  cmd->add_option("--label-threshold", flags.label_threshold, "decode probability threshold");
  cmd->add_flag("--disable-fusion", flags.disable_fusion, "one segment per sentence");
  cmd->add_flag("--disable-keyphrase-encoding", flags.disable_keyphrase_encoding,
                "encode only full contiguous appearances");
  cmd->add_flag("--disable-focal", flags.disable_focal, "plain cross-entropy (gamma 0)");
  cmd->add_flag("--disable-scoring", flags.disable_scoring, "drop the scoring loss (alpha 1)");
  cmd->add_flag("--dump-encoded", flags.dump_encoded, "include grids in preprocess output");
}

RunConfig build_run_config(const CLI::App* cmd, const Flags& flags) {
  RunConfig cfg;
  if (!flags.config.empty()) cfg = load_run_config(flags.config);

  auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--corpus")) cfg.corpus_path = flags.corpus;
  if (given("--lexicon")) cfg.lexicon_path = flags.lexicon;
  if (given("--stopwords")) cfg.stopwords_path = flags.stopwords;
  if (given("--model")) cfg.model_path = flags.model;
  if (given("--out")) cfg.out_path = flags.out;
  if (given("--max-segment-words")) cfg.preprocess.max_segment_words = flags.max_segment_words;
  if (given("--alpha")) cfg.loss.alpha = flags.alpha;
  if (given("--gamma")) cfg.loss.gamma = flags.gamma;
  if (given("--lr")) cfg.train.learning_rate = flags.lr;
  if (given("--batch-size")) cfg.train.batch_size = flags.batch_size;
  if (given("--epochs")) cfg.train.epochs = flags.epochs;
  if (given("--topk")) cfg.eval.k_values = parse_topk(flags.topk);
  if (given("--seed")) cfg.seed = flags.seed;
  if (given("--embed-dim")) cfg.model.embed_dim = flags.embed_dim;
  if (given("--hidden-dim")) cfg.model.hidden_dim = flags.hidden_dim;
  if (given("--encoder-depth")) cfg.model.encoder_depth = flags.encoder_depth;
  if (given("--max-gap")) cfg.encoding.max_gap = flags.max_gap;
  if (given("--min-coverage")) cfg.encoding.min_coverage = flags.min_coverage;
  if (given("--label-threshold")) cfg.decode.label_threshold = flags.label_threshold;
  if (given("--disable-fusion")) cfg.ablation.disable_fusion = flags.disable_fusion;
  if (given("--disable-keyphrase-encoding")) {
    cfg.ablation.disable_keyphrase_encoding = flags.disable_keyphrase_encoding;
  }
  if (given("--disable-focal")) cfg.ablation.disable_focal = flags.disable_focal;
  if (given("--disable-scoring")) cfg.ablation.disable_scoring = flags.disable_scoring;
  if (given("--dump-encoded")) cfg.dump_encoded = flags.dump_encoded;
  return cfg;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw CLI::ValidationError(message);
}

int cmd_preprocess(const RunConfig& cfg) {
  require(!cfg.corpus_path.empty(), "--corpus is required");
  require(!cfg.lexicon_path.empty(), "--lexicon is required");
  const auto records = load_corpus(cfg.corpus_path);
  const Lexicon lexicon(load_word_list(cfg.lexicon_path));
  StringSet stopwords;
  if (!cfg.stopwords_path.empty()) {
    for (auto& w : load_word_list(cfg.stopwords_path)) stopwords.insert(std::move(w));
  }
  const auto docs = preprocess_corpus(records, cfg.preprocess, lexicon, stopwords,
                                      cfg.ablation.disable_fusion);

  std::size_t segment_count = 0;
  std::size_t token_count = 0;
  std::ofstream out;
  if (!cfg.out_path.empty()) {
    out.open(cfg.out_path, std::ios::trunc);
    if (!out) throw IoError("cannot open output: " + cfg.out_path);
  }
  const EncodingConfig enc_cfg = effective_encoding_config(cfg);
  for (const auto& doc : docs) {
    std::vector<EncodedSegment> encoded;
    if (cfg.dump_encoded) encoded = encode_document(doc, lexicon, enc_cfg);
    std::size_t encoded_index = 0;
    for (std::size_t s = 0; s < doc.segments.size(); ++s) {
      const Segment& segment = doc.segments[s];
      segment_count += 1;
      token_count += segment.tokens.size();
      if (!out.is_open()) continue;
      json record;
      record["doc_id"] = doc.doc_id;
      record["segment_index"] = s;
      json tokens = json::array();
      for (const auto& tok : segment.tokens) {
        tokens.push_back({{"surface", tok.surface},
                          {"sentence", tok.sentence_index},
                          {"begin", tok.char_begin},
                          {"end", tok.char_end}});
      }
      record["tokens"] = std::move(tokens);
      if (cfg.dump_encoded && !segment.tokens.empty() && encoded_index < encoded.size()) {
        const EncodedSegment& enc = encoded[encoded_index++];
        json labels = json::array();
        const int n = enc.labels.size();
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const GridLabel label = enc.labels.at(i, j);
            if (label == GridLabel::kNone) continue;
            labels.push_back({{"i", i},
                              {"j", j},
                              {"label", label == GridLabel::kNextWord ? "NNW" : "THW_KP"}});
          }
        }
        record["labels"] = std::move(labels);
        json targets = json::array();
        for (const auto& t : enc.score_targets) {
          targets.push_back({{"tail", t.tail}, {"head", t.head}, {"y", t.completeness}});
        }
        record["score_targets"] = std::move(targets);
        json apps = json::array();
        for (const auto& app : enc.appearances) {
          apps.push_back({{"phrase", app.phrase},
                          {"indices", app.token_indices},
                          {"completeness", app.completeness}});
        }
        record["appearances"] = std::move(apps);
      }
      out << record.dump() << "\n";
    }
  }
  std::printf("preprocessed %zu documents into %zu segments (%zu tokens)\n", docs.size(),
              segment_count, token_count);
  return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
  require(!cfg.corpus_path.empty(), "--corpus is required");
  require(!cfg.lexicon_path.empty(), "--lexicon is required");
  require(!cfg.model_path.empty(), "--model is required");
  const auto records = load_corpus(cfg.corpus_path);
  TrainOutput trained = run_train(records, cfg);
  save_model(trained.params, cfg.model_path);
  trained.vocab.save(cfg.model_path + ".vocab");
  if (!trained.epoch_mean_loss.empty()) {
    std::printf("trained %d epochs, mean loss %.6f -> %.6f\n",
                static_cast<int>(trained.epoch_mean_loss.size()),
                trained.epoch_mean_loss.front(), trained.epoch_mean_loss.back());
  }
  std::printf("model written to %s (vocab %lld)\n", cfg.model_path.c_str(),
              static_cast<long long>(trained.vocab.size()));
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg) {
  require(!cfg.corpus_path.empty(), "--corpus is required");
  require(!cfg.lexicon_path.empty(), "--lexicon is required");
  require(!cfg.model_path.empty(), "--model is required");
  require(!cfg.out_path.empty(), "--out is required");
  const auto records = load_corpus(cfg.corpus_path);
  const Parameters params = load_model(cfg.model_path);
  const Vocabulary vocab = Vocabulary::load(cfg.model_path + ".vocab");
  if (vocab.size() != params.config.vocab_size) {
    throw UnknownToken("vocabulary file does not match the model: " +
                       std::to_string(vocab.size()) + " entries vs config " +
                       std::to_string(params.config.vocab_size));
  }
  const auto predictions = run_predict(records, params, vocab, cfg);
  save_predictions(predictions, cfg.out_path);
  std::printf("predicted %zu documents -> %s\n", predictions.size(), cfg.out_path.c_str());
  return kExitOk;
}

void print_report(const EvalReport& report) {
  for (std::size_t i = 0; i < report.k_values.size(); ++i) {
    std::printf("k=%-3d exact  P=%.4f R=%.4f F1=%.4f | partial P=%.4f R=%.4f F1=%.4f\n",
                report.k_values[i], report.exact[i].precision, report.exact[i].recall,
                report.exact[i].f1, report.partial[i].precision, report.partial[i].recall,
                report.partial[i].f1);
  }
  std::printf("overall %.2f\n", report.overall);
}

void print_comparison(const std::vector<std::string>& labels, const std::vector<double>& scores) {
  std::printf("%-32s %s\n", "Experimental Config", "Score");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i == 0) {
      std::printf("%-32s %.2f\n", labels[i].c_str(), scores[i]);
    } else {
      std::printf("%-32s %.2f(%+.2f)\n", labels[i].c_str(), scores[i], scores[i] - scores[0]);
    }
  }
}

int cmd_eval(const RunConfig& cfg, const std::vector<std::string>& pred_paths,
             const std::vector<std::string>& labels) {
  require(!cfg.corpus_path.empty(), "--corpus is required");
  require(!pred_paths.empty(), "at least one --pred file is required");
  const auto records = load_corpus(cfg.corpus_path);

  std::vector<double> scores;
  for (std::size_t i = 0; i < pred_paths.size(); ++i) {
    const auto predictions = load_predictions(pred_paths[i]);
    const EvalReport report = evaluate_predictions(records, predictions, cfg.eval);
    if (pred_paths.size() == 1) {
      print_report(report);
    }
    scores.push_back(report.overall);
  }
  if (pred_paths.size() > 1) {
    std::vector<std::string> row_labels;
    for (std::size_t i = 0; i < pred_paths.size(); ++i) {
      row_labels.push_back(i < labels.size() ? labels[i] : pred_paths[i]);
    }
    print_comparison(row_labels, scores);
  }
  return kExitOk;
}

int cmd_ablate(RunConfig cfg) {
  require(!cfg.corpus_path.empty(), "--corpus is required");
  require(!cfg.lexicon_path.empty(), "--lexicon is required");
  const auto records = load_corpus(cfg.corpus_path);

  struct Row {
    const char* label;
    AblationSwitches switches;
  };
  const std::vector<Row> rows = {
      {"all components", {}},
      {"- sentence fusion", {.disable_fusion = true}},
      {"- keyphrase encoding", {.disable_keyphrase_encoding = true}},
      {"- focal loss", {.disable_focal = true}},
      {"- keyphrase scoring", {.disable_scoring = true}},
  };
  std::vector<std::string> labels;
  std::vector<double> scores;
  for (const auto& row : rows) {
    cfg.ablation = row.switches;
    labels.emplace_back(row.label);
    scores.push_back(train_and_score(records, cfg));
  }
  print_comparison(labels, scores);
  return kExitOk;
}

int cmd_gen(const std::string& kind, int docs, std::uint64_t seed, const std::string& out) {
  SynthCorpus corpus;
  if (kind == "overfit") {
    corpus = make_overfit_corpus(docs, seed);
  } else if (kind == "fusion-split") {
    corpus = make_fusion_split_corpus(docs, seed);
  } else if (kind == "discontinuous") {
    corpus = make_discontinuous_corpus(docs, seed);
  } else {
    throw CLI::ValidationError("--kind must be overfit, fusion-split, or discontinuous");
  }
  corpus.save(out);
  std::printf("wrote %s.jsonl (%zu documents), %s.lexicon.txt, %s.stopwords.txt\n", out.c_str(),
              corpus.records.size(), out.c_str(), out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keyphrase extraction over word-pair grids"};
  app.require_subcommand(1);

  Flags flags;
  auto* preprocess = app.add_subcommand("preprocess", "segment and fuse a corpus");
  auto* train_cmd = app.add_subcommand("train", "train a grid model");
  auto* predict = app.add_subcommand("predict", "rank keyphrases per document");
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  auto* ablate = app.add_subcommand("ablate", "retrain with components disabled");
  auto* gen = app.add_subcommand("gen", "write a synthetic corpus");
  for (CLI::App* cmd : {preprocess, train_cmd, predict, eval, ablate}) {
    add_common_options(cmd, flags);
  }

  std::vector<std::string> pred_paths;
  std::vector<std::string> run_labels;
  eval->add_option("--pred", pred_paths, "prediction file; repeat to compare runs");
  eval->add_option("--labels", run_labels, "comma-separated row labels for the comparison table")
      ->delimiter(',');

  std::string gen_kind = "overfit";
  int gen_docs = 50;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "corpus";
  gen->add_option("--kind", gen_kind, "overfit | fusion-split | discontinuous");
  gen->add_option("--docs", gen_docs, "number of documents");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output base path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_kind, gen_docs, gen_seed, gen_out);
    CLI::App* active = app.get_subcommands().front();
    const RunConfig cfg = build_run_config(active, flags);
    if (preprocess->parsed()) return cmd_preprocess(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (eval->parsed()) return cmd_eval(cfg, pred_paths, run_labels);
    if (ablate->parsed()) return cmd_ablate(cfg);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const ShapeMismatch& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const IndexOutOfRange& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const InvalidCount& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}
