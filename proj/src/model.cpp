#include "w2kpe/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "w2kpe/crc32.hpp"
#include "w2kpe/errors.hpp"
#include "w2kpe/rng.hpp"

namespace w2kpe {

namespace {

constexpr double kProbFloor = 1e-7;
constexpr double kProbCeil = 1.0 - 1e-7;

int distance_bucket(int i, int j, int buckets) {
  const int d = std::abs(j - i);
  return d < buckets ? d : buckets - 1;
}

// y += W x, W row-major (rows x cols).
void matvec_add(const double* w, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// x += W^T d, accumulating input gradients.
void matvec_transpose_add(const double* w, std::size_t rows, std::size_t cols,
                          const double* d, double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double dr = d[r];
    for (std::size_t c = 0; c < cols; ++c) x[c] += row[c] * dr;
  }
}

// W += d x^T (outer product accumulation).
void outer_add(double* w, std::size_t rows, std::size_t cols, const double* d,
               const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = w + r * cols;
    const double dr = d[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += dr * x[c];
  }
}

// Per-cell focal term over the 3 classes and its gradient w.r.t. the raw
// class probabilities. p* = p for the gold class and 1-p otherwise; clamping
// flattens the gradient outside (floor, ceil).
struct CellFocal {
  double loss = 0.0;
  std::array<double, 3> dprob{};
};

CellFocal focal_cell(const double* probs, int gold, double gamma) {
  CellFocal out;
  for (int c = 0; c < kNumGridClasses; ++c) {
    const bool is_gold = (c == gold);
    const double pstar_raw = is_gold ? probs[c] : 1.0 - probs[c];
    const double pstar = std::clamp(pstar_raw, kProbFloor, kProbCeil);
    const double one_minus = 1.0 - pstar;
    const double log_p = std::log(pstar);
    out.loss += -std::pow(one_minus, gamma) * log_p;
    if (pstar_raw > kProbFloor && pstar_raw < kProbCeil) {
      // d/dp* of -(1-p*)^g log(p*)
      double d = -std::pow(one_minus, gamma) / pstar;
      if (gamma != 0.0) d += gamma * std::pow(one_minus, gamma - 1.0) * log_p;
      out.dprob[c] = is_gold ? d : -d;
    }
  }
  return out;
}

void check_grid_shapes(const GridPrediction& pred, int n, const char* where) {
  const auto cells = static_cast<std::size_t>(pred.n) * pred.n;
  if (pred.n != n || pred.probs.size() != cells * kNumGridClasses ||
      pred.scores.size() != cells) {
    throw ShapeMismatch(std::string(where) + ": prediction grid does not match n=" +
                        std::to_string(n));
  }
}

struct LayerCache {
  std::vector<double> input;  // n x d_in
  std::vector<double> fwd;    // n x d_h
  std::vector<double> bwd;    // n x d_h
};

struct ForwardCache {
  int n = 0;
  std::vector<LayerCache> layers;
  std::vector<double> h;  // n x 2*d_h, last layer output
  std::vector<double> g;  // n*n x d_h, pairwise hidden (kept only for backward)
};

const float* slice_ptr(const Parameters& p, const ParamLayout::Slice& s) {
  return p.values.data() + s.offset;
}

std::vector<double> to_double(const float* src, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(src[i]);
  return out;
}

// Shared by forward() and backward(). `cache` may be null when only the
// prediction is needed.
GridPrediction run_forward(const Parameters& params,
                           std::span<const std::int32_t> ids, ForwardCache* cache) {
  const ModelConfig& cfg = params.config;
  const ParamLayout layout = param_layout(cfg);
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw ShapeMismatch("forward: empty token sequence");
  for (auto id : ids) {
    if (id < 0 || id >= cfg.vocab_size) {
      throw UnknownToken("forward: token id " + std::to_string(id) +
                         " outside vocabulary of size " + std::to_string(cfg.vocab_size));
    }
  }

  const int de = static_cast<int>(cfg.embed_dim);
  const int dh = static_cast<int>(cfg.hidden_dim);
  const int dd = dist_feature_dim(cfg);
  const int zdim = 4 * dh + dd;

  // Token embeddings are the first layer's input.
  std::vector<double> layer_in(static_cast<std::size_t>(n) * de);
  const float* emb = slice_ptr(params, layout.embedding);
  for (int t = 0; t < n; ++t) {
    const float* row = emb + static_cast<std::size_t>(ids[t]) * de;
    for (int k = 0; k < de; ++k) layer_in[static_cast<std::size_t>(t) * de + k] = row[k];
  }

  if (cache) {
    cache->n = n;
    cache->layers.resize(layout.layers.size());
  }

  std::vector<double> fwd(static_cast<std::size_t>(n) * dh);
  std::vector<double> bwd(static_cast<std::size_t>(n) * dh);
  std::vector<double> pre(dh);
  for (std::size_t l = 0; l < layout.layers.size(); ++l) {
    const auto& lw = layout.layers[l];
    const std::size_t d_in = lw.wx_f.cols;
    const auto wx_f = to_double(slice_ptr(params, lw.wx_f), lw.wx_f.count());
    const auto wh_f = to_double(slice_ptr(params, lw.wh_f), lw.wh_f.count());
    const auto b_f = to_double(slice_ptr(params, lw.b_f), lw.b_f.count());
    const auto wx_b = to_double(slice_ptr(params, lw.wx_b), lw.wx_b.count());
    const auto wh_b = to_double(slice_ptr(params, lw.wh_b), lw.wh_b.count());
    const auto b_b = to_double(slice_ptr(params, lw.b_b), lw.b_b.count());

    for (int t = 0; t < n; ++t) {
      pre = b_f;
      matvec_add(wx_f.data(), dh, d_in, layer_in.data() + static_cast<std::size_t>(t) * d_in,
                 pre.data());
      if (t > 0) {
        matvec_add(wh_f.data(), dh, dh, fwd.data() + static_cast<std::size_t>(t - 1) * dh,
                   pre.data());
      }
      for (int k = 0; k < dh; ++k) fwd[static_cast<std::size_t>(t) * dh + k] = std::tanh(pre[k]);
    }
    for (int t = n - 1; t >= 0; --t) {
      pre = b_b;
      matvec_add(wx_b.data(), dh, d_in, layer_in.data() + static_cast<std::size_t>(t) * d_in,
                 pre.data());
      if (t + 1 < n) {
        matvec_add(wh_b.data(), dh, dh, bwd.data() + static_cast<std::size_t>(t + 1) * dh,
                   pre.data());
      }
      for (int k = 0; k < dh; ++k) bwd[static_cast<std::size_t>(t) * dh + k] = std::tanh(pre[k]);
    }

    std::vector<double> out(static_cast<std::size_t>(n) * 2 * dh);
    for (int t = 0; t < n; ++t) {
      std::copy_n(fwd.data() + static_cast<std::size_t>(t) * dh, dh,
                  out.data() + static_cast<std::size_t>(t) * 2 * dh);
      std::copy_n(bwd.data() + static_cast<std::size_t>(t) * dh, dh,
                  out.data() + static_cast<std::size_t>(t) * 2 * dh + dh);
    }
    if (cache) {
      cache->layers[l].input = layer_in;
      cache->layers[l].fwd = fwd;
      cache->layers[l].bwd = bwd;
    }
    layer_in = std::move(out);
  }
  const std::vector<double>& h = layer_in;  // n x 2*dh
  if (cache) cache->h = h;

  const auto dist = to_double(slice_ptr(params, layout.distance), layout.distance.count());
  const auto pair_w = to_double(slice_ptr(params, layout.pair_w), layout.pair_w.count());
  const auto pair_b = to_double(slice_ptr(params, layout.pair_b), layout.pair_b.count());
  const auto label_w = to_double(slice_ptr(params, layout.label_w), layout.label_w.count());
  const auto label_b = to_double(slice_ptr(params, layout.label_b), layout.label_b.count());
  const auto score_w = to_double(slice_ptr(params, layout.score_w), layout.score_w.count());
  const auto score_b = to_double(slice_ptr(params, layout.score_b), layout.score_b.count());

  GridPrediction predict;
  predict.n = n;
  predict.probs.resize(static_cast<std::size_t>(n) * n * kNumGridClasses);
  predict.scores.resize(static_cast<std::size_t>(n) * n);
  if (cache) cache->g.resize(static_cast<std::size_t>(n) * n * dh);

  std::vector<double> z(zdim);
  std::vector<double> g(dh);
  const int buckets = static_cast<int>(cfg.distance_buckets);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::copy_n(h.data() + static_cast<std::size_t>(i) * 2 * dh, 2 * dh, z.data());
      std::copy_n(h.data() + static_cast<std::size_t>(j) * 2 * dh, 2 * dh, z.data() + 2 * dh);
      const int bucket = distance_bucket(i, j, buckets);
      std::copy_n(dist.data() + static_cast<std::size_t>(bucket) * dd, dd, z.data() + 4 * dh);

      g = pair_b;
      matvec_add(pair_w.data(), dh, zdim, z.data(), g.data());
      for (int k = 0; k < dh; ++k) g[k] = std::tanh(g[k]);

      double logits[kNumGridClasses];
      for (int c = 0; c < kNumGridClasses; ++c) {
        double acc = label_b[c];
        const double* row = label_w.data() + static_cast<std::size_t>(c) * dh;
        for (int k = 0; k < dh; ++k) acc += row[k] * g[k];
        logits[c] = acc;
      }
      const double max_logit = std::max({logits[0], logits[1], logits[2]});
      double total = 0.0;
      double ex[kNumGridClasses];
      for (int c = 0; c < kNumGridClasses; ++c) {
        ex[c] = std::exp(logits[c] - max_logit);
        total += ex[c];
      }
      double v = score_b[0];
      for (int k = 0; k < dh; ++k) v += score_w[k] * g[k];

      const std::size_t cell = static_cast<std::size_t>(i) * n + j;
      for (int c = 0; c < kNumGridClasses; ++c) {
        predict.probs[cell * kNumGridClasses + c] = ex[c] / total;
      }
      predict.scores[cell] = 1.0 / (1.0 + std::exp(-v));
      if (cache) {
        std::copy_n(g.data(), dh, cache->g.data() + cell * dh);
      }
    }
  }
  return predict;
}

}  // namespace

ParamLayout param_layout(const ModelConfig& cfg) {
  ParamLayout layout;
  std::size_t offset = 0;
  auto add = [&offset](std::size_t rows, std::size_t cols) {
    ParamLayout::Slice s{offset, rows, cols};
    offset += rows * cols;
    return s;
  };
  const auto de = static_cast<std::size_t>(cfg.embed_dim);
  const auto dh = static_cast<std::size_t>(cfg.hidden_dim);
  const auto dd = static_cast<std::size_t>(dist_feature_dim(cfg));

  layout.embedding = add(static_cast<std::size_t>(cfg.vocab_size), de);
  for (std::int64_t l = 0; l < cfg.encoder_depth; ++l) {
    const std::size_t d_in = (l == 0) ? de : 2 * dh;
    ParamLayout::RnnLayer layer;
    layer.wx_f = add(dh, d_in);
    layer.wh_f = add(dh, dh);
    layer.b_f = add(dh, 1);
    layer.wx_b = add(dh, d_in);
    layer.wh_b = add(dh, dh);
    layer.b_b = add(dh, 1);
    layout.layers.push_back(layer);
  }
  layout.distance = add(static_cast<std::size_t>(cfg.distance_buckets), dd);
  layout.pair_w = add(dh, 4 * dh + dd);
  layout.pair_b = add(dh, 1);
  layout.label_w = add(kNumGridClasses, dh);
  layout.label_b = add(kNumGridClasses, 1);
  layout.score_w = add(1, dh);
  layout.score_b = add(1, 1);
  layout.total = offset;
  return layout;
}

Parameters init_params(const ModelConfig& cfg) {
  const ParamLayout layout = param_layout(cfg);
  Parameters params;
  params.config = cfg;
  params.values.assign(layout.total, 0.0f);

  std::mt19937_64 gen(derive_seed(cfg.seed, "init-params"));
  auto glorot = [&](const ParamLayout::Slice& s, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < s.count(); ++i) {
      params.values[s.offset + i] = static_cast<float>(uniform_symmetric(gen, bound));
    }
  };
  // Weight matrices in layout order, biases left at zero.
  glorot(layout.embedding, layout.embedding.rows, layout.embedding.cols);
  for (const auto& l : layout.layers) {
    glorot(l.wx_f, l.wx_f.cols, l.wx_f.rows);
    glorot(l.wh_f, l.wh_f.cols, l.wh_f.rows);
    glorot(l.wx_b, l.wx_b.cols, l.wx_b.rows);
    glorot(l.wh_b, l.wh_b.cols, l.wh_b.rows);
  }
  glorot(layout.distance, layout.distance.rows, layout.distance.cols);
  glorot(layout.pair_w, layout.pair_w.cols, layout.pair_w.rows);
  glorot(layout.label_w, layout.label_w.cols, layout.label_w.rows);
  glorot(layout.score_w, layout.score_w.cols, layout.score_w.rows);
  return params;
}

GridPrediction forward(const Parameters& params, std::span<const std::int32_t> token_ids) {
  return run_forward(params, token_ids, nullptr);
}

double focal_loss(const GridPrediction& pred, const LabelGrid& gold, double gamma) {
  check_grid_shapes(pred, gold.size(), "focal_loss");
  const int n = gold.size();
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * n + j;
      loss += focal_cell(pred.probs.data() + cell * kNumGridClasses,
                         static_cast<int>(gold.at(i, j)), gamma)
                  .loss;
    }
  }
  return loss;
}

double score_mse(const GridPrediction& pred, const std::vector<ScoreTarget>& targets) {
  double loss = 0.0;
  for (const auto& t : targets) {
    if (t.tail < 0 || t.tail >= pred.n || t.head < 0 || t.head >= pred.n) {
      throw IndexOutOfRange("score_mse: target cell (" + std::to_string(t.tail) + ", " +
                            std::to_string(t.head) + ") outside grid of size " +
                            std::to_string(pred.n));
    }
    const double diff = pred.score(t.tail, t.head) - t.completeness;
    loss += diff * diff;
  }
  return loss;
}

double combined_loss(const GridPrediction& pred, const LabelGrid& gold,
                     const std::vector<ScoreTarget>& targets, const LossConfig& cfg) {
  return cfg.alpha * focal_loss(pred, gold, cfg.gamma) +
         (1.0 - cfg.alpha) * score_mse(pred, targets);
}

BackwardResult backward(const Parameters& params, const TrainingExample& example,
                        const LossConfig& cfg) {
  const ModelConfig& mc = params.config;
  const ParamLayout layout = param_layout(mc);
  ForwardCache cache;
  const GridPrediction pred = run_forward(params, example.token_ids, &cache);
  const int n = cache.n;
  check_grid_shapes(pred, example.labels.size(), "backward");

  const int dh = static_cast<int>(mc.hidden_dim);
  const int dd = dist_feature_dim(mc);
  const int zdim = 4 * dh + dd;
  const int buckets = static_cast<int>(mc.distance_buckets);

  BackwardResult result;
  result.grad.assign(layout.total, 0.0);
  auto grad_at = [&](const ParamLayout::Slice& s) { return result.grad.data() + s.offset; };

  // Score targets as a dense lookup over cells.
  std::vector<double> target_y(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<char> has_target(static_cast<std::size_t>(n) * n, 0);
  for (const auto& t : example.score_targets) {
    if (t.tail < 0 || t.tail >= n || t.head < 0 || t.head >= n) {
      throw IndexOutOfRange("backward: score target outside grid");
    }
    const std::size_t cell = static_cast<std::size_t>(t.tail) * n + t.head;
    target_y[cell] = t.completeness;
    has_target[cell] = 1;
  }

  const auto dist = to_double(slice_ptr(params, layout.distance), layout.distance.count());
  const auto pair_w = to_double(slice_ptr(params, layout.pair_w), layout.pair_w.count());
  const auto label_w = to_double(slice_ptr(params, layout.label_w), layout.label_w.count());
  const auto score_w = to_double(slice_ptr(params, layout.score_w), layout.score_w.count());

  std::vector<double> dh_acc(static_cast<std::size_t>(n) * 2 * dh, 0.0);
  std::vector<double> z(zdim);
  std::vector<double> dz(zdim);
  std::vector<double> dgpre(dh);

  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * n + j;
      const double* probs = pred.probs.data() + cell * kNumGridClasses;
      const int gold = static_cast<int>(example.labels.at(i, j));

      const CellFocal focal = focal_cell(probs, gold, cfg.gamma);
      loss += cfg.alpha * focal.loss;

      // Softmax jacobian: du_k = p_k (dL/dp_k - sum_c dL/dp_c p_c).
      double du[kNumGridClasses];
      double dot = 0.0;
      for (int c = 0; c < kNumGridClasses; ++c) dot += focal.dprob[c] * probs[c];
      for (int c = 0; c < kNumGridClasses; ++c) {
        du[c] = cfg.alpha * probs[c] * (focal.dprob[c] - dot);
      }

      double dv = 0.0;
      const double s = pred.scores[cell];
      if (has_target[cell]) {
        const double diff = s - target_y[cell];
        loss += (1.0 - cfg.alpha) * diff * diff;
        dv = (1.0 - cfg.alpha) * 2.0 * diff * s * (1.0 - s);
      }

      const double* g = cache.g.data() + cell * dh;
      // dg = label_w^T du + score_w^T dv, then through tanh.
      for (int k = 0; k < dh; ++k) {
        double acc = score_w[k] * dv;
        for (int c = 0; c < kNumGridClasses; ++c) {
          acc += label_w[static_cast<std::size_t>(c) * dh + k] * du[c];
        }
        dgpre[k] = acc * (1.0 - g[k] * g[k]);
      }

      // Head gradients.
      double* dlabel_w = grad_at(layout.label_w);
      double* dlabel_b = grad_at(layout.label_b);
      for (int c = 0; c < kNumGridClasses; ++c) {
        for (int k = 0; k < dh; ++k) dlabel_w[static_cast<std::size_t>(c) * dh + k] += du[c] * g[k];
        dlabel_b[c] += du[c];
      }
      double* dscore_w = grad_at(layout.score_w);
      if (dv != 0.0) {
        for (int k = 0; k < dh; ++k) dscore_w[k] += dv * g[k];
        grad_at(layout.score_b)[0] += dv;
      }

      // Pairwise layer: rebuild z, push dgpre through W1.
      std::copy_n(cache.h.data() + static_cast<std::size_t>(i) * 2 * dh, 2 * dh, z.data());
      std::copy_n(cache.h.data() + static_cast<std::size_t>(j) * 2 * dh, 2 * dh,
                  z.data() + 2 * dh);
      const int bucket = distance_bucket(i, j, buckets);
      std::copy_n(dist.data() + static_cast<std::size_t>(bucket) * dd, dd, z.data() + 4 * dh);

      outer_add(grad_at(layout.pair_w), dh, zdim, dgpre.data(), z.data());
      for (int k = 0; k < dh; ++k) grad_at(layout.pair_b)[k] += dgpre[k];
      std::fill(dz.begin(), dz.end(), 0.0);
      matvec_transpose_add(pair_w.data(), dh, zdim, dgpre.data(), dz.data());

      for (int k = 0; k < 2 * dh; ++k) {
        dh_acc[static_cast<std::size_t>(i) * 2 * dh + k] += dz[k];
        dh_acc[static_cast<std::size_t>(j) * 2 * dh + k] += dz[2 * dh + k];
      }
      double* ddist = grad_at(layout.distance) + static_cast<std::size_t>(bucket) * dd;
      for (int k = 0; k < dd; ++k) ddist[k] += dz[4 * dh + k];
    }
  }
  result.loss = loss;

  // Backpropagation through time, last encoder layer first. dh_acc holds the
  // gradient w.r.t. the current layer's [fwd; bwd] output per position.
  for (int l = static_cast<int>(layout.layers.size()) - 1; l >= 0; --l) {
    const auto& lw = layout.layers[l];
    const LayerCache& lc = cache.layers[l];
    const std::size_t d_in = lw.wx_f.cols;
    const auto wx_f = to_double(slice_ptr(params, lw.wx_f), lw.wx_f.count());
    const auto wh_f = to_double(slice_ptr(params, lw.wh_f), lw.wh_f.count());
    const auto wx_b = to_double(slice_ptr(params, lw.wx_b), lw.wx_b.count());
    const auto wh_b = to_double(slice_ptr(params, lw.wh_b), lw.wh_b.count());

    std::vector<double> din(static_cast<std::size_t>(n) * d_in, 0.0);
    std::vector<double> carry(dh, 0.0);
    std::vector<double> dpre(dh);

    // Forward direction: pre_{t+1} depends on f_t, so walk right to left.
    for (int t = n - 1; t >= 0; --t) {
      for (int k = 0; k < dh; ++k) {
        dpre[k] = dh_acc[static_cast<std::size_t>(t) * 2 * dh + k];
      }
      matvec_transpose_add(wh_f.data(), dh, dh, carry.data(), dpre.data());
      const double* f_t = lc.fwd.data() + static_cast<std::size_t>(t) * dh;
      for (int k = 0; k < dh; ++k) dpre[k] *= 1.0 - f_t[k] * f_t[k];

      outer_add(grad_at(lw.wx_f), dh, d_in, dpre.data(),
                lc.input.data() + static_cast<std::size_t>(t) * d_in);
      if (t > 0) {
        outer_add(grad_at(lw.wh_f), dh, dh, dpre.data(),
                  lc.fwd.data() + static_cast<std::size_t>(t - 1) * dh);
      }
      for (int k = 0; k < dh; ++k) grad_at(lw.b_f)[k] += dpre[k];
      matvec_transpose_add(wx_f.data(), dh, d_in, dpre.data(),
                           din.data() + static_cast<std::size_t>(t) * d_in);
      carry = dpre;
    }

    // Backward direction: pre_{t-1} depends on b_t, so walk left to right.
    std::fill(carry.begin(), carry.end(), 0.0);
    for (int t = 0; t < n; ++t) {
      for (int k = 0; k < dh; ++k) {
        dpre[k] = dh_acc[static_cast<std::size_t>(t) * 2 * dh + dh + k];
      }
      matvec_transpose_add(wh_b.data(), dh, dh, carry.data(), dpre.data());
      const double* b_t = lc.bwd.data() + static_cast<std::size_t>(t) * dh;
      for (int k = 0; k < dh; ++k) dpre[k] *= 1.0 - b_t[k] * b_t[k];

      outer_add(grad_at(lw.wx_b), dh, d_in, dpre.data(),
                lc.input.data() + static_cast<std::size_t>(t) * d_in);
      if (t + 1 < n) {
        outer_add(grad_at(lw.wh_b), dh, dh, dpre.data(),
                  lc.bwd.data() + static_cast<std::size_t>(t + 1) * dh);
      }
      for (int k = 0; k < dh; ++k) grad_at(lw.b_b)[k] += dpre[k];
      matvec_transpose_add(wx_b.data(), dh, d_in, dpre.data(),
                           din.data() + static_cast<std::size_t>(t) * d_in);
      carry = dpre;
    }

    if (l > 0) {
      dh_acc = std::move(din);
    } else {
      double* demb = grad_at(layout.embedding);
      const auto de = static_cast<std::size_t>(mc.embed_dim);
      for (int t = 0; t < n; ++t) {
        double* row = demb + static_cast<std::size_t>(example.token_ids[t]) * de;
        for (std::size_t k = 0; k < de; ++k) {
          row[k] += din[static_cast<std::size_t>(t) * de + k];
        }
      }
    }
  }
  return result;
}

TrainResult train(const Parameters& initial, const std::vector<TrainingExample>& corpus,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg) {
  if (corpus.empty()) throw EmptyCorpus("train: empty corpus");
  if (train_cfg.batch_size < 1) throw Error("train: batch_size must be >= 1");

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  TrainResult result;
  result.params = initial;
  const std::size_t count = result.params.values.size();
  std::vector<double> m(count, 0.0);
  std::vector<double> v(count, 0.0);
  std::vector<double> grad(count);

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 shuffle_gen(derive_seed(train_cfg.seed, "train-shuffle"));

  long step = 0;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    // Fisher-Yates with our own index draw; std::shuffle is
    // implementation-defined and would break cross-platform determinism.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(shuffle_gen, i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        BackwardResult r = backward(result.params, corpus[order[b]], loss_cfg);
        epoch_loss += r.loss;
        for (std::size_t k = 0; k < count; ++k) grad[k] += r.grad[k];
      }

      double norm_sq = 0.0;
      for (double gk : grad) norm_sq += gk * gk;
      const double norm = std::sqrt(norm_sq);
      if (norm > train_cfg.grad_clip && norm > 0.0) {
        const double scale = train_cfg.grad_clip / norm;
        for (double& gk : grad) gk *= scale;
      }

      ++step;
      const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t k = 0; k < count; ++k) {
        m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
        v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
        const double update =
            train_cfg.learning_rate * (m[k] / bias1) / (std::sqrt(v[k] / bias2) + kEps);
        result.params.values[k] =
            static_cast<float>(static_cast<double>(result.params.values[k]) - update);
      }
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return result;
}

namespace {

constexpr char kMagic[7] = {'W', '2', 'K', 'P', 'E', '1', '\0'};
constexpr unsigned char kFormatVersion = 0x01;

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

constexpr std::size_t kHeaderSize = 7 + 1 + 6 * 8;

}  // namespace

void save_model(const Parameters& params, const std::string& path) {
  std::string blob;
  blob.reserve(kHeaderSize + params.values.size() * 4 + 4);
  blob.append(kMagic, sizeof(kMagic));
  blob.push_back(static_cast<char>(kFormatVersion));
  append_u64_le(blob, static_cast<std::uint64_t>(params.config.vocab_size));
  append_u64_le(blob, static_cast<std::uint64_t>(params.config.embed_dim));
  append_u64_le(blob, static_cast<std::uint64_t>(params.config.hidden_dim));
  append_u64_le(blob, static_cast<std::uint64_t>(params.config.encoder_depth));
  append_u64_le(blob, static_cast<std::uint64_t>(params.config.distance_buckets));
  append_u64_le(blob, params.config.seed);
  for (float f : params.values) append_f32_le(blob, f);

  std::uint32_t crc = crc32(blob.data(), blob.size());
  for (int i = 0; i < 4; ++i) blob.push_back(static_cast<char>((crc >> (8 * i)) & 0xFF));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("failed writing model file: " + path);
}

Parameters load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw BadMagic("not a model file: " + path);
  }
  if (blob.size() < sizeof(kMagic) + 1 ||
      static_cast<unsigned char>(blob[sizeof(kMagic)]) != kFormatVersion) {
    throw VersionMismatch("unsupported model format version in " + path);
  }
  if (blob.size() < kHeaderSize + 4) {
    throw ChecksumMismatch("model file truncated: " + path);
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::size_t crc_offset = blob.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 3; i >= 0; --i) stored = (stored << 8) | bytes[crc_offset + i];
  if (crc32(blob.data(), crc_offset) != stored) {
    throw ChecksumMismatch("model file checksum mismatch: " + path);
  }

  Parameters params;
  const unsigned char* p = bytes + sizeof(kMagic) + 1;
  params.config.vocab_size = static_cast<std::int64_t>(read_u64_le(p));
  params.config.embed_dim = static_cast<std::int64_t>(read_u64_le(p + 8));
  params.config.hidden_dim = static_cast<std::int64_t>(read_u64_le(p + 16));
  params.config.encoder_depth = static_cast<std::int64_t>(read_u64_le(p + 24));
  params.config.distance_buckets = static_cast<std::int64_t>(read_u64_le(p + 32));
  params.config.seed = read_u64_le(p + 40);

  const std::size_t expected = param_count(params.config);
  if (blob.size() != kHeaderSize + expected * 4 + 4) {
    throw ChecksumMismatch("model file size does not match its config: " + path);
  }
  params.values.resize(expected);
  const unsigned char* data = bytes + kHeaderSize;
  for (std::size_t i = 0; i < expected; ++i) {
    params.values[i] = read_f32_le(data + i * 4);
  }
  return params;
}

}  // namespace w2kpe
