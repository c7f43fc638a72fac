#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "w2kpe/encoding.hpp"

namespace w2kpe {

struct ModelConfig {
  // Serialized in this order as little-endian u64 (see save_model).
  std::int64_t vocab_size = 0;
  std::int64_t embed_dim = 64;
  std::int64_t hidden_dim = 64;
  std::int64_t encoder_depth = 1;
  std::int64_t distance_buckets = 16;
  std::uint64_t seed = 0;
};

// Dimension of the distance-bucket feature vector, derived from the config
// so the parameter count stays a pure function of ModelConfig.
inline int dist_feature_dim(const ModelConfig& cfg) {
  return cfg.hidden_dim >= 4 ? static_cast<int>(cfg.hidden_dim / 4) : 1;
}

// Offsets of every parameter block inside the flat array. Row-major
// (rows x cols) matrices; the block order below is also the file order.
struct ParamLayout {
  struct Slice {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t count() const { return rows * cols; }
  };
  struct RnnLayer {
    Slice wx_f, wh_f, b_f;  // forward direction: input, recurrent, bias
    Slice wx_b, wh_b, b_b;  // backward direction
  };
  Slice embedding;               // vocab x embed
  std::vector<RnnLayer> layers;  // encoder_depth entries
  Slice distance;                // buckets x dist_feature_dim
  Slice pair_w, pair_b;          // hidden x (4*hidden + dist), hidden
  Slice label_w, label_b;        // 3 x hidden, 3
  Slice score_w, score_b;        // 1 x hidden, 1
  std::size_t total = 0;
};

ParamLayout param_layout(const ModelConfig& cfg);

inline std::size_t param_count(const ModelConfig& cfg) { return param_layout(cfg).total; }

// Flat float32 parameter store; all math runs in float64 on top of it so the
// persisted format stays bit-exact while gradients remain checkable against
// finite differences.
struct Parameters {
  ModelConfig config;
  std::vector<float> values;
};

struct GridPrediction {
  int n = 0;
  std::vector<double> probs;   // n*n*3, softmax per cell over {none, next-word, tail-head}
  std::vector<double> scores;  // n*n, sigmoid per cell

  double prob(int i, int j, int cls) const {
    return probs[(static_cast<std::size_t>(i) * n + j) * kNumGridClasses + cls];
  }
  double score(int i, int j) const {
    return scores[static_cast<std::size_t>(i) * n + j];
  }
};

struct LossConfig {
  double alpha = 0.99;  // weight of the focal term, in [0, 1]
  double gamma = 2.0;   // focusing exponent, >= 0
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 10;
  int epochs = 0;
  std::uint64_t seed = 0;
  double grad_clip = 5.0;
};

struct TrainingExample {
  std::vector<std::int32_t> token_ids;
  LabelGrid labels;
  std::vector<ScoreTarget> score_targets;
};

// Glorot-uniform weights, zero biases, deterministic in config.seed.
Parameters init_params(const ModelConfig& cfg);

// Embeds tokens, runs the bidirectional recurrent encoder, scores every word
// pair. Throws UnknownToken for ids >= vocab_size, ShapeMismatch for empty
// input.
GridPrediction forward(const Parameters& params, std::span<const std::int32_t> token_ids);

// Sum over all cells and all 3 classes of -(1-p*)^gamma * log(p*), where
// p* is the class probability for the gold class and 1-p for the others,
// clamped to [1e-7, 1-1e-7] before pow/log.
double focal_loss(const GridPrediction& pred, const LabelGrid& gold, double gamma);

// Sum of squared score errors over the target cells only.
double score_mse(const GridPrediction& pred, const std::vector<ScoreTarget>& targets);

// alpha * focal + (1 - alpha) * mse.
double combined_loss(const GridPrediction& pred, const LabelGrid& gold,
                     const std::vector<ScoreTarget>& targets, const LossConfig& cfg);

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> grad;  // same length and layout as Parameters::values
};

// Exact reverse-mode gradient of combined_loss w.r.t. every parameter.
BackwardResult backward(const Parameters& params, const TrainingExample& example,
                        const LossConfig& cfg);

struct TrainResult {
  Parameters params;
  std::vector<double> epoch_mean_loss;
};

// Mini-batch Adam (beta 0.9/0.999, eps 1e-8) with global-norm gradient
// clipping; batch order reshuffled per epoch by a generator seeded from
// TrainConfig::seed. Deterministic. Throws EmptyCorpus on an empty corpus.
TrainResult train(const Parameters& initial, const std::vector<TrainingExample>& corpus,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg);

// Binary model file: magic "W2KPE1\0", version byte 0x01, the six ModelConfig
// fields as little-endian u64, the parameter array as little-endian float32
// in layout order, then CRC-32 of all preceding bytes.
void save_model(const Parameters& params, const std::string& path);
Parameters load_model(const std::string& path);

}  // namespace w2kpe
