#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "w2kpe/corpus.hpp"
#include "w2kpe/decode.hpp"
#include "w2kpe/encoding.hpp"
#include "w2kpe/metrics.hpp"
#include "w2kpe/model.hpp"
#include "w2kpe/preprocess.hpp"
#include "w2kpe/vocab.hpp"

namespace w2kpe {

struct AblationSwitches {
  bool disable_fusion = false;              // every sentence becomes its own segment
  bool disable_keyphrase_encoding = false;  // full contiguous appearances only
  bool disable_focal = false;               // gamma = 0, plain cross-entropy
  bool disable_scoring = false;             // alpha = 1, score head unsupervised
};

struct RunConfig {
  PreprocessConfig preprocess;
  EncodingConfig encoding;
  ModelConfig model;  // vocab_size and seed are filled in at train time
  LossConfig loss;
  TrainConfig train;
  DecodeConfig decode;
  EvalConfig eval;
  AblationSwitches ablation;

  std::string corpus_path;
  std::string lexicon_path;
  std::string stopwords_path;
  std::string model_path;
  std::string out_path;
  bool dump_encoded = false;

  // Root seed; every stage derives its own seed from it by a fixed label.
  std::uint64_t seed = 0;
};

// JSON config file mirroring the fields above; missing keys keep defaults.
RunConfig load_run_config(const std::string& path);

// Loss config with the ablation switches applied.
LossConfig effective_loss_config(const RunConfig& cfg);
// Encoding config with the ablation switches applied.
EncodingConfig effective_encoding_config(const RunConfig& cfg);

struct PreprocessedDoc {
  std::string doc_id;
  std::vector<Segment> segments;
  std::vector<std::string> gold_keyphrases;
};

// Stutter removal, segmentation, and stop-word filtering per sentence, then
// sentence fusion (or one segment per sentence with fusion disabled).
std::vector<PreprocessedDoc> preprocess_corpus(const std::vector<CorpusRecord>& records,
                                               const PreprocessConfig& cfg,
                                               const Lexicon& lexicon,
                                               const StringSet& stopwords,
                                               bool disable_fusion);

// Gold keyphrases are segmented with the corpus lexicon and located per
// segment; one encoded grid per non-empty segment.
std::vector<EncodedSegment> encode_document(const PreprocessedDoc& doc,
                                            const Lexicon& lexicon,
                                            const EncodingConfig& cfg);

struct TrainOutput {
  Parameters params;
  Vocabulary vocab;
  std::vector<double> epoch_mean_loss;
};

// preprocess -> encode -> train. Deterministic in cfg.seed.
TrainOutput run_train(const std::vector<CorpusRecord>& records, const RunConfig& cfg);

struct DocPrediction {
  std::string doc_id;
  std::vector<RankedKeyphrase> ranked;
};

// preprocess -> forward -> decode -> aggregate -> rank for every document.
std::vector<DocPrediction> run_predict(const std::vector<CorpusRecord>& records,
                                       const Parameters& params, const Vocabulary& vocab,
                                       const RunConfig& cfg);

// Joins predictions with gold keyphrases by doc_id. Throws Error naming the
// document when gold or a prediction row is missing.
EvalReport evaluate_predictions(const std::vector<CorpusRecord>& gold_records,
                                const std::vector<DocPrediction>& predictions,
                                const EvalConfig& cfg);

// Prediction records: {"doc_id": ..., "keyphrases": [{"surface", "score"}]}.
void save_predictions(const std::vector<DocPrediction>& predictions, const std::string& path);
std::vector<DocPrediction> load_predictions(const std::string& path);

// Convenience for tests and the ablation harness: train on the records and
// evaluate predictions against the same records' gold.
double train_and_score(const std::vector<CorpusRecord>& records, const RunConfig& cfg);

}  // namespace w2kpe
