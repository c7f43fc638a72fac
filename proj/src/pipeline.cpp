#include "w2kpe/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "w2kpe/errors.hpp"
#include "w2kpe/rng.hpp"

namespace w2kpe {

using nlohmann::json;

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ParseError(1, "config is not a JSON object");
  }

  RunConfig cfg;
  auto get = [&doc](const char* key, auto& field) {
    if (doc.contains(key)) field = doc[key].template get<std::decay_t<decltype(field)>>();
  };
  get("corpus", cfg.corpus_path);
  get("lexicon", cfg.lexicon_path);
  get("stopwords", cfg.stopwords_path);
  get("model", cfg.model_path);
  get("out", cfg.out_path);
  get("max_segment_words", cfg.preprocess.max_segment_words);
  get("stutter_min_run", cfg.preprocess.stutter_min_run);
  get("max_gap", cfg.encoding.max_gap);
  get("min_coverage", cfg.encoding.min_coverage);
  get("embed_dim", cfg.model.embed_dim);
  get("hidden_dim", cfg.model.hidden_dim);
  get("encoder_depth", cfg.model.encoder_depth);
  get("distance_buckets", cfg.model.distance_buckets);
  get("alpha", cfg.loss.alpha);
  get("gamma", cfg.loss.gamma);
  get("lr", cfg.train.learning_rate);
  get("batch_size", cfg.train.batch_size);
  get("epochs", cfg.train.epochs);
  get("grad_clip", cfg.train.grad_clip);
  get("label_threshold", cfg.decode.label_threshold);
  get("max_phrase_tokens", cfg.decode.max_phrase_tokens);
  get("joiner", cfg.decode.joiner);
  get("topk", cfg.eval.k_values);
  get("seed", cfg.seed);
  get("dump_encoded", cfg.dump_encoded);
  get("disable_fusion", cfg.ablation.disable_fusion);
  get("disable_keyphrase_encoding", cfg.ablation.disable_keyphrase_encoding);
  get("disable_focal", cfg.ablation.disable_focal);
  get("disable_scoring", cfg.ablation.disable_scoring);
  return cfg;
}

LossConfig effective_loss_config(const RunConfig& cfg) {
  LossConfig loss = cfg.loss;
  if (cfg.ablation.disable_focal) loss.gamma = 0.0;
  if (cfg.ablation.disable_scoring) loss.alpha = 1.0;
  return loss;
}

EncodingConfig effective_encoding_config(const RunConfig& cfg) {
  EncodingConfig enc = cfg.encoding;
  if (cfg.ablation.disable_keyphrase_encoding) {
    enc.max_gap = 0;
    enc.min_coverage = 1.0;
  }
  return enc;
}

std::vector<PreprocessedDoc> preprocess_corpus(const std::vector<CorpusRecord>& records,
                                               const PreprocessConfig& cfg,
                                               const Lexicon& lexicon,
                                               const StringSet& stopwords,
                                               bool disable_fusion) {
  std::vector<PreprocessedDoc> docs;
  docs.reserve(records.size());
  for (const auto& record : records) {
    PreprocessedDoc doc;
    doc.doc_id = record.doc_id;
    doc.gold_keyphrases = record.keyphrases;

    std::vector<std::vector<Token>> sentences;
    sentences.reserve(record.sentences.size());
    for (std::size_t s = 0; s < record.sentences.size(); ++s) {
      const std::string cleaned = remove_stutter(record.sentences[s], cfg.stutter_min_run);
      auto tokens = segment_words(cleaned, lexicon, static_cast<int>(s));
      sentences.push_back(remove_stopwords(tokens, stopwords));
    }

    if (disable_fusion) {
      for (auto& sentence : sentences) {
        Segment segment;
        segment.source_doc = record.doc_id;
        segment.tokens = std::move(sentence);
        doc.segments.push_back(std::move(segment));
      }
    } else {
      doc.segments = fuse_sentences(sentences, cfg.max_segment_words, record.doc_id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<EncodedSegment> encode_document(const PreprocessedDoc& doc,
                                            const Lexicon& lexicon,
                                            const EncodingConfig& cfg) {
  std::vector<std::vector<std::string>> keyphrase_tokens;
  keyphrase_tokens.reserve(doc.gold_keyphrases.size());
  for (const auto& phrase : doc.gold_keyphrases) {
    std::vector<std::string> surfaces;
    for (const auto& token : segment_words(phrase, lexicon)) {
      surfaces.push_back(token.surface);
    }
    keyphrase_tokens.push_back(std::move(surfaces));
  }

  std::vector<EncodedSegment> encoded;
  for (const auto& segment : doc.segments) {
    if (segment.tokens.empty()) continue;
    std::vector<KeyphraseAppearance> appearances;
    for (const auto& tokens : keyphrase_tokens) {
      if (tokens.empty()) continue;
      auto found = locate_appearances(segment, tokens, cfg);
      appearances.insert(appearances.end(), found.begin(), found.end());
    }
    encoded.push_back(encode_grid(segment, appearances));
  }
  return encoded;
}

TrainOutput run_train(const std::vector<CorpusRecord>& records, const RunConfig& cfg) {
  if (records.empty()) throw EmptyCorpus("run_train: empty corpus");
  const Lexicon lexicon(load_word_list(cfg.lexicon_path));
  StringSet stopwords;
  if (!cfg.stopwords_path.empty()) {
    for (auto& w : load_word_list(cfg.stopwords_path)) stopwords.insert(std::move(w));
  }

  const auto docs = preprocess_corpus(records, cfg.preprocess, lexicon, stopwords,
                                      cfg.ablation.disable_fusion);
  std::vector<Segment> all_segments;
  for (const auto& doc : docs) {
    for (const auto& segment : doc.segments) {
      if (!segment.tokens.empty()) all_segments.push_back(segment);
    }
  }
  TrainOutput out;
  out.vocab = Vocabulary::build(all_segments);

  const EncodingConfig enc_cfg = effective_encoding_config(cfg);
  std::vector<TrainingExample> examples;
  for (const auto& doc : docs) {
    for (auto& encoded : encode_document(doc, lexicon, enc_cfg)) {
      TrainingExample example;
      example.token_ids = out.vocab.encode(encoded.segment);
      example.labels = std::move(encoded.labels);
      example.score_targets = std::move(encoded.score_targets);
      examples.push_back(std::move(example));
    }
  }
  if (examples.empty()) throw EmptyCorpus("run_train: no non-empty segments");

  ModelConfig model_cfg = cfg.model;
  model_cfg.vocab_size = out.vocab.size();
  model_cfg.seed = derive_seed(cfg.seed, "model-init");
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = derive_seed(cfg.seed, "train");

  TrainResult result =
      train(init_params(model_cfg), examples, train_cfg, effective_loss_config(cfg));
  out.params = std::move(result.params);
  out.epoch_mean_loss = std::move(result.epoch_mean_loss);
  return out;
}

std::vector<DocPrediction> run_predict(const std::vector<CorpusRecord>& records,
                                       const Parameters& params, const Vocabulary& vocab,
                                       const RunConfig& cfg) {
  const Lexicon lexicon(load_word_list(cfg.lexicon_path));
  StringSet stopwords;
  if (!cfg.stopwords_path.empty()) {
    for (auto& w : load_word_list(cfg.stopwords_path)) stopwords.insert(std::move(w));
  }
  const auto docs = preprocess_corpus(records, cfg.preprocess, lexicon, stopwords,
                                      cfg.ablation.disable_fusion);

  int max_k = 0;
  for (int k : cfg.eval.k_values) max_k = std::max(max_k, k);
  if (max_k <= 0) max_k = 20;

  std::vector<DocPrediction> predictions;
  predictions.reserve(docs.size());
  for (const auto& doc : docs) {
    std::vector<std::vector<DecodedAppearance>> per_segment;
    per_segment.reserve(doc.segments.size());
    for (const auto& segment : doc.segments) {
      if (segment.tokens.empty()) {
        per_segment.emplace_back();
        continue;
      }
      const auto ids = vocab.encode(segment);
      GridPrediction pred;
      try {
        pred = forward(params, ids);
      } catch (const UnknownToken& e) {
        throw UnknownToken(std::string(e.what()) + " (doc " + doc.doc_id + ")");
      }
      per_segment.push_back(decode_grid(pred, segment, cfg.decode));
    }
    auto ranked = aggregate_scores(per_segment);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedKeyphrase& a, const RankedKeyphrase& b) {
                       if (a.total_score != b.total_score) return a.total_score > b.total_score;
                       if (a.first_position != b.first_position) {
                         return a.first_position < b.first_position;
                       }
                       return a.surface < b.surface;
                     });
    if (static_cast<int>(ranked.size()) > max_k) ranked.resize(max_k);
    predictions.push_back({doc.doc_id, std::move(ranked)});
  }
  return predictions;
}

EvalReport evaluate_predictions(const std::vector<CorpusRecord>& gold_records,
                                const std::vector<DocPrediction>& predictions,
                                const EvalConfig& cfg) {
  std::unordered_map<std::string, const DocPrediction*> by_id;
  for (const auto& p : predictions) by_id.emplace(p.doc_id, &p);

  std::vector<DocPredictions> docs;
  docs.reserve(gold_records.size());
  for (const auto& record : gold_records) {
    if (record.keyphrases.empty()) {
      throw Error("document \"" + record.doc_id + "\" has no gold keyphrases");
    }
    auto it = by_id.find(record.doc_id);
    if (it == by_id.end()) {
      throw Error("no prediction row for document \"" + record.doc_id + "\"");
    }
    DocPredictions doc;
    doc.doc_id = record.doc_id;
    doc.gold = record.keyphrases;
    for (const auto& kp : it->second->ranked) doc.predicted.push_back(kp.surface);
    docs.push_back(std::move(doc));
  }
  return overall_score(docs, cfg);
}

void save_predictions(const std::vector<DocPrediction>& predictions, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open predictions for writing: " + path);
  for (const auto& doc : predictions) {
    json record;
    record["doc_id"] = doc.doc_id;
    json list = json::array();
    for (const auto& kp : doc.ranked) {
      list.push_back({{"surface", kp.surface},
                      {"score", kp.total_score},
                      {"appearances", kp.appearance_count}});
    }
    record["keyphrases"] = std::move(list);
    out << record.dump() << "\n";
  }
  if (!out) throw IoError("failed writing predictions: " + path);
}

std::vector<DocPrediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions: " + path);
  std::vector<DocPrediction> predictions;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("doc_id") ||
        !record.contains("keyphrases")) {
      throw ParseError(line_number, "bad prediction record");
    }
    DocPrediction doc;
    doc.doc_id = record["doc_id"].get<std::string>();
    for (const auto& kp : record["keyphrases"]) {
      RankedKeyphrase ranked;
      ranked.surface = kp.at("surface").get<std::string>();
      ranked.total_score = kp.at("score").get<double>();
      if (kp.contains("appearances")) ranked.appearance_count = kp["appearances"].get<int>();
      doc.ranked.push_back(std::move(ranked));
    }
    predictions.push_back(std::move(doc));
  }
  return predictions;
}

double train_and_score(const std::vector<CorpusRecord>& records, const RunConfig& cfg) {
  TrainOutput trained = run_train(records, cfg);
  const auto predictions = run_predict(records, trained.params, trained.vocab, cfg);
  return evaluate_predictions(records, predictions, cfg.eval).overall;
}

}  // namespace w2kpe
