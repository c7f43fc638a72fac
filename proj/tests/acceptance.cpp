// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run with a list of criterion numbers to restrict the run,
// e.g. `acceptance 1 5 9`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "w2kpe/crc32.hpp"
#include "w2kpe/decode.hpp"
#include "w2kpe/encoding.hpp"
#include "w2kpe/errors.hpp"
#include "w2kpe/metrics.hpp"
#include "w2kpe/model.hpp"
#include "w2kpe/pipeline.hpp"
#include "w2kpe/preprocess.hpp"
#include "w2kpe/synth.hpp"

using namespace w2kpe;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw CheckFailure(message);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot reopen " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ScratchFiles {
  std::vector<std::string> paths;
  ~ScratchFiles() {
    for (const auto& p : paths) std::remove(p.c_str());
  }
  std::string track(std::string path) {
    paths.push_back(std::move(path));
    return paths.back();
  }
};

RunConfig corpus_run_config(ScratchFiles& scratch, const SynthCorpus& corpus,
                            const std::string& base) {
  corpus.save(base);
  scratch.track(base + ".jsonl");
  scratch.track(base + ".lexicon.txt");
  scratch.track(base + ".stopwords.txt");
  RunConfig cfg;
  cfg.corpus_path = base + ".jsonl";
  cfg.lexicon_path = base + ".lexicon.txt";
  cfg.stopwords_path = base + ".stopwords.txt";
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Loss-formula oracle.

std::string criterion_loss_oracle() {
  GridPrediction pred;
  pred.n = 1;
  pred.probs = {0.5, 0.25, 0.25};
  pred.scores = {0.5};
  LabelGrid gold(1);  // gold class 0

  const double focal = focal_loss(pred, gold, 2.0);
  require(std::abs(focal - 0.209247) <= 1e-6,
          "focal loss " + std::to_string(focal) + " != 0.209247 +- 1e-6");
  // Same example with an MSE term of (0.5 - 1)^2 = 0.25.
  const double combined = combined_loss(pred, gold, {{0, 0, 1.0}}, {0.99, 2.0});
  require(std::abs(combined - 0.209654) <= 1e-6,
          "combined loss " + std::to_string(combined) + " != 0.209654 +- 1e-6");
  // Values re-derived independently before the build.
  require(std::abs(focal - 0.20924705419645892) < 1e-12, "focal differs from the derivation");
  require(std::abs(combined - 0.20965458365449433) < 1e-12,
          "combined differs from the derivation");
  char detail[96];
  std::snprintf(detail, sizeof(detail), "focal=%.9f combined=%.9f", focal, combined);
  return detail;
}

// ---------------------------------------------------------------------------
// 2. Focal -> cross-entropy reduction at gamma 0.

std::string criterion_focal_ce_reduction() {
  std::mt19937_64 gen(20260811);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(gen, 6));
    GridPrediction pred;
    pred.n = n;
    pred.scores.assign(static_cast<std::size_t>(n) * n, 0.5);
    LabelGrid gold(n);
    double bce = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double raw[3];
        double total = 0.0;
        for (double& r : raw) {
          r = 1e-4 + uniform01(gen);
          total += r;
        }
        const int cls = static_cast<int>(uniform_index(gen, 3));
        if (cls == 1 && i < j) gold.set(i, j, GridLabel::kNextWord);
        if (cls == 2 && i >= j) gold.set(i, j, GridLabel::kTailHead);
        for (int c = 0; c < 3; ++c) {
          const double p = raw[c] / total;
          pred.probs.push_back(p);
          const double pstar =
              std::clamp(c == static_cast<int>(gold.at(i, j)) ? p : 1.0 - p, 1e-7, 1.0 - 1e-7);
          bce -= std::log(pstar);
        }
      }
    }
    worst = std::max(worst, std::abs(focal_loss(pred, gold, 0.0) - bce));
  }
  require(worst <= 1e-9, "max |focal(gamma=0) - BCE| = " + std::to_string(worst));
  char detail[64];
  std::snprintf(detail, sizeof(detail), "1000 grids, max deviation %.3g", worst);
  return detail;
}

// ---------------------------------------------------------------------------
// 3. Gradient check against central finite differences.

std::string criterion_gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  const LossConfig loss_cfg{0.99, 2.0};
  double worst = 0.0;
  std::size_t coords = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto rc = testutil::random_case(seed * 7919, 8);
    const BackwardResult result = backward(rc.params, rc.example, loss_cfg);
    for (std::size_t i = 0; i < rc.params.values.size(); ++i) {
      const double numeric = testutil::fd_gradient(rc.params, rc.example, loss_cfg, i, 1e-4);
      const double analytic = result.grad[i];
      const double denom = std::abs(analytic) + std::abs(numeric);
      if (denom <= 1e-8) continue;
      ++coords;
      const double rel = std::abs(analytic - numeric) / denom;
      worst = std::max(worst, rel);
      require(rel < 1e-3, "relative error " + std::to_string(rel) + " at coordinate " +
                              std::to_string(i) + " of case " + std::to_string(seed));
    }
  }
  const double seconds = elapsed_seconds(start);
  require(seconds < 120.0, "gradient check took " + std::to_string(seconds) + "s");
  char detail[96];
  std::snprintf(detail, sizeof(detail), "100 cases, %zu coords, max rel err %.2e, %.1fs", coords,
                worst, seconds);
  return detail;
}

// ---------------------------------------------------------------------------
// 4. Encode/decode round trip on planted grids.

std::string criterion_round_trip() {
  std::mt19937_64 gen(424242);
  int mismatches = 0;
  int planted_total = 0;
  int gapped = 0;
  int partial = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(gen, 16));
    std::vector<std::string> words;
    for (int t = 0; t < n; ++t) words.push_back("w" + std::to_string(t));
    const Segment segment = testutil::make_segment(words);
    const auto planted = testutil::plant_appearances(n, gen);
    planted_total += static_cast<int>(planted.size());
    for (const auto& app : planted) {
      if (app.completeness < 1.0) ++partial;
      for (std::size_t k = 0; k + 1 < app.token_indices.size(); ++k) {
        if (app.token_indices[k + 1] - app.token_indices[k] > 1) {
          ++gapped;
          break;
        }
      }
    }
    const auto encoded = encode_grid(segment, planted);
    const auto decoded = decode_grid(testutil::perfect_prediction(encoded), segment, {});

    std::set<std::pair<std::vector<int>, double>> expected;
    for (const auto& app : planted) expected.insert({app.token_indices, app.completeness});
    std::set<std::pair<std::vector<int>, double>> actual;
    for (const auto& app : decoded) actual.insert({app.token_indices, app.score});
    if (expected != actual) ++mismatches;
  }
  require(gapped > 0 && partial > 0, "generator failed to plant gapped/partial appearances");
  require(mismatches == 0, std::to_string(mismatches) + " of 1000 segments mismatched");
  char detail[96];
  std::snprintf(detail, sizeof(detail),
                "1000 segments, %d appearances (%d gapped, %d partial), 0 mismatches",
                planted_total, gapped, partial);
  return detail;
}

// ---------------------------------------------------------------------------
// 5. Metric oracle: greedy vs brute force on exhaustive small sets.

std::string criterion_metric_oracle() {
  const std::vector<std::string> alphabet{"a", "b", "c", "ab", "bc", "abc"};
  std::vector<std::vector<std::string>> subsets;
  for (unsigned mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) > 4) continue;
    std::vector<std::string> subset;
    for (int bit = 0; bit < 6; ++bit) {
      if (mask & (1u << bit)) subset.push_back(alphabet[static_cast<std::size_t>(bit)]);
    }
    subsets.push_back(std::move(subset));
  }

  auto exact_pred = [](const std::string& x, const std::string& y) { return x == y; };
  auto partial_pred = [](const std::string& x, const std::string& y) {
    return x == y || x.find(y) != std::string::npos || y.find(x) != std::string::npos;
  };

  long cases = 0;
  long partial_divergences = 0;
  for (const auto& pred : subsets) {
    for (const auto& gold : subsets) {
      for (int k = 1; k <= 4; ++k) {
        ++cases;
        const std::size_t denom = std::min<std::size_t>(pred.size(), static_cast<std::size_t>(k));
        std::vector<std::string> topk(pred.begin(),
                                      pred.begin() + static_cast<std::ptrdiff_t>(denom));

        const Prf exact = exact_f1_at_k(pred, gold, k);
        const int exact_best = testutil::brute_force_matches(topk, gold, exact_pred);
        const double exact_precision = denom == 0 ? 0.0 : exact_best / static_cast<double>(denom);
        require(std::abs(exact.precision - exact_precision) < 1e-12,
                "exact greedy != brute force");

        const Prf partial = partial_f1_at_k(pred, gold, k);
        const int partial_best = testutil::brute_force_matches(topk, gold, partial_pred);
        const double greedy_matches = partial.precision * static_cast<double>(denom);
        require(greedy_matches <= partial_best + 1e-9,
                "greedy partial matching beat the brute-force maximum");
        if (std::abs(greedy_matches - partial_best) > 1e-9) ++partial_divergences;

        require(partial.f1 >= exact.f1 - 1e-12, "partial F1 below exact F1");
      }
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%ld cases, exact==oracle, partial>=exact in 100%%, "
                "%ld documented greedy-suboptimal partial cases",
                cases, partial_divergences);
  return detail;
}

// ---------------------------------------------------------------------------
// 6. Overfit run with the published hyperparameters.

std::string criterion_overfit() {
  const auto start = std::chrono::steady_clock::now();
  ScratchFiles scratch;
  RunConfig cfg = corpus_run_config(scratch, make_overfit_corpus(50, 2026), "acc_overfit");
  cfg.model.embed_dim = 24;
  cfg.model.hidden_dim = 24;
  cfg.model.distance_buckets = 16;
  cfg.train.learning_rate = 0.001;  // published defaults, pinned
  cfg.train.batch_size = 10;
  cfg.loss.alpha = 0.99;
  cfg.loss.gamma = 2.0;
  cfg.train.epochs = 200;
  cfg.seed = 7;

  const auto records = load_corpus(cfg.corpus_path);
  require(records.size() == 50, "expected 50 documents");
  const TrainOutput trained = run_train(records, cfg);
  require(trained.vocab.size() <= 200, "vocabulary exceeds 200 entries");

  const auto& loss = trained.epoch_mean_loss;
  for (std::size_t e = 0; e + 20 < loss.size(); ++e) {
    require(loss[e + 20] <= loss[e] + 1e-9,
            "mean loss rose over the 20-epoch window at epoch " + std::to_string(e));
  }

  const auto predictions = run_predict(records, trained.params, trained.vocab, cfg);
  const EvalReport report = evaluate_predictions(records, predictions, cfg.eval);
  const double seconds = elapsed_seconds(start);
  require(report.overall >= 95.0,
          "overall score " + std::to_string(report.overall) + " < 95 after 200 epochs");
  require(seconds < 600.0, "overfit run took " + std::to_string(seconds) + "s");
  char detail[96];
  std::snprintf(detail, sizeof(detail), "overall %.2f after %d epochs in %.1fs", report.overall,
                cfg.train.epochs, seconds);
  return detail;
}

// ---------------------------------------------------------------------------
// 7. Ablation directions across seeds.

struct AblationOutcome {
  int wins = 0;
  double mean_default = 0.0;
  double mean_ablated = 0.0;
};

AblationOutcome ablation_trial(const std::function<SynthCorpus(std::uint64_t)>& make,
                               const std::function<void(RunConfig&)>& disable,
                               const std::string& tag) {
  AblationOutcome outcome;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScratchFiles scratch;
    RunConfig cfg =
        corpus_run_config(scratch, make(seed), "acc_" + tag + std::to_string(seed));
    cfg.model.embed_dim = 20;
    cfg.model.hidden_dim = 20;
    cfg.model.distance_buckets = 8;
    cfg.train.epochs = 300;
    cfg.seed = seed;
    const auto records = load_corpus(cfg.corpus_path);

    const double baseline = train_and_score(records, cfg);
    RunConfig ablated = cfg;
    disable(ablated);
    const double reduced = train_and_score(records, ablated);
    outcome.mean_default += baseline / 5.0;
    outcome.mean_ablated += reduced / 5.0;
    if (reduced < baseline) ++outcome.wins;
  }
  return outcome;
}

std::string criterion_ablation_direction() {
  const auto fusion = ablation_trial(
      [](std::uint64_t seed) { return make_fusion_split_corpus(12, seed); },
      [](RunConfig& cfg) { cfg.ablation.disable_fusion = true; }, "fus");
  require(fusion.wins >= 4, "disable-fusion lowered the score in only " +
                                std::to_string(fusion.wins) + "/5 seeds");

  // Precondition of the discontinuous corpus: at least 30% of located
  // appearances carry a gap.
  {
    const SynthCorpus corpus = make_discontinuous_corpus(12, 1);
    const Lexicon lexicon(corpus.lexicon);
    StringSet stopwords;
    for (const auto& w : corpus.stopwords) stopwords.insert(w);
    const auto docs = preprocess_corpus(corpus.records, {}, lexicon, stopwords, false);
    int total = 0;
    int with_gap = 0;
    for (const auto& doc : docs) {
      for (const auto& encoded : encode_document(doc, lexicon, {})) {
        for (const auto& app : encoded.appearances) {
          ++total;
          for (std::size_t k = 0; k + 1 < app.token_indices.size(); ++k) {
            if (app.token_indices[k + 1] - app.token_indices[k] > 1) {
              ++with_gap;
              break;
            }
          }
        }
      }
    }
    require(total > 0 && with_gap * 10 >= total * 3,
            "discontinuous corpus has only " + std::to_string(with_gap) + "/" +
                std::to_string(total) + " gapped appearances");
  }

  const auto discontinuous = ablation_trial(
      [](std::uint64_t seed) { return make_discontinuous_corpus(12, seed); },
      [](RunConfig& cfg) { cfg.ablation.disable_keyphrase_encoding = true; }, "disc");
  require(discontinuous.wins >= 4, "disable-keyphrase-encoding lowered the score in only " +
                                       std::to_string(discontinuous.wins) + "/5 seeds");

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "fusion %d/5 (%.1f -> %.1f), keyphrase encoding %d/5 (%.1f -> %.1f)",
                fusion.wins, fusion.mean_default, fusion.mean_ablated, discontinuous.wins,
                discontinuous.mean_default, discontinuous.mean_ablated);
  return detail;
}

// ---------------------------------------------------------------------------
// 8. Bit-exact determinism of training and prediction.

std::string criterion_determinism() {
  ScratchFiles scratch;
  RunConfig cfg = corpus_run_config(scratch, make_overfit_corpus(12, 99), "acc_det");
  cfg.model.embed_dim = 16;
  cfg.model.hidden_dim = 16;
  cfg.train.epochs = 15;
  cfg.seed = 31337;
  const auto records = load_corpus(cfg.corpus_path);

  std::uint32_t crc_first = 0;
  std::string bytes_first;
  std::string preds_first;
  for (int run = 0; run < 2; ++run) {
    const TrainOutput trained = run_train(records, cfg);
    const std::string model_path = scratch.track("acc_det_model" + std::to_string(run) + ".bin");
    save_model(trained.params, model_path);
    const std::string bytes = read_file(model_path);
    // Payload CRC, i.e. the checksum stored in the trailer itself.
    require(bytes.size() > 4, "model file impossibly small");
    const std::uint32_t crc = crc32(bytes.data(), bytes.size() - 4);

    const auto predictions = run_predict(records, trained.params, trained.vocab, cfg);
    const std::string pred_path = scratch.track("acc_det_preds" + std::to_string(run) + ".jsonl");
    save_predictions(predictions, pred_path);
    const std::string preds = read_file(pred_path);

    if (run == 0) {
      crc_first = crc;
      bytes_first = bytes;
      preds_first = preds;
    } else {
      require(crc == crc_first, "model CRC-32 differs between runs");
      require(bytes == bytes_first, "model bytes differ between runs");
      require(preds == preds_first, "prediction output differs between runs");
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "model CRC-32 %08X stable, predictions byte-identical",
                crc_first);
  return detail;
}

// ---------------------------------------------------------------------------
// 9. Preprocess behavior suite.

std::string criterion_preprocess_suite() {
  require(remove_stutter("好好好的", 3) == "好的", "stutter collapse failed");
  require(remove_stutter("", 3).empty(), "empty stutter input failed");
  require(remove_stutter("aab", 3) == "aab", "short runs must stay");
  require(remove_stutter("aaaabaaa", 3) == "aba", "independent runs failed");
  std::mt19937_64 gen(8);
  static const std::vector<std::string> alphabet = {"a", "b", "好", "的"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (std::size_t i = 0, n = uniform_index(gen, 20); i < n; ++i) {
      text += alphabet[uniform_index(gen, alphabet.size())];
    }
    const std::string once = remove_stutter(text, 3);
    require(remove_stutter(once, 3) == once, "stutter removal not idempotent on: " + text);
  }

  const Lexicon lexicon(std::vector<std::string>{"ab", "c", "a", "abab"});
  auto join = [](const std::vector<Token>& tokens) {
    std::string s;
    for (const auto& t : tokens) s += t.surface;
    return s;
  };
  require(join(segment_words("abc", lexicon)) == "abc", "segmentation round trip failed");
  require(segment_words("abab", lexicon).size() == 1, "longest match failed");
  require(segment_words("x", lexicon).size() == 1, "single-scalar fallback failed");
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (std::size_t i = 0, n = uniform_index(gen, 16); i < n; ++i) {
      text += alphabet[uniform_index(gen, alphabet.size())];
    }
    require(join(segment_words(text, lexicon)) == text, "round trip failed on: " + text);
  }

  auto sentence = [](int len) {
    std::vector<Token> tokens;
    for (int i = 0; i < len; ++i) tokens.push_back({"w", 0, 0, 1});
    return tokens;
  };
  const auto packed = fuse_sentences({sentence(3), sentence(4), sentence(5)}, 8);
  require(packed.size() == 2 && packed[0].word_count() == 7 && packed[1].word_count() == 5,
          "greedy packing failed");
  const auto oversized = fuse_sentences({sentence(600)}, 500);
  require(oversized.size() == 1 && oversized[0].word_count() == 600, "oversized rule failed");
  require(fuse_sentences({}, 500).empty(), "empty fusion input failed");

  // Threshold-500 packing: 30 sentences of 40 words pack 12-per-segment.
  std::vector<std::vector<Token>> thirty;
  for (int i = 0; i < 30; ++i) thirty.push_back(sentence(40));
  const auto fused = fuse_sentences(thirty, 500);
  require(fused.size() == 3, "expected 3 segments at the 500-word threshold");
  for (std::size_t i = 0; i < fused.size(); ++i) {
    require(fused[i].word_count() == (i + 1 < fused.size() ? 480 : 240),
            "unexpected packing at the 500-word threshold");
  }
  return "stutter, segmentation, stop words, fusion all as specified";
}

struct Criterion {
  int id;
  const char* name;
  std::function<std::string()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "loss-formula oracle", criterion_loss_oracle},
      {2, "focal loss reduces to cross-entropy at gamma 0", criterion_focal_ce_reduction},
      {3, "gradients match central finite differences", criterion_gradient_check},
      {4, "encode/decode round trip", criterion_round_trip},
      {5, "metric oracle vs brute-force matcher", criterion_metric_oracle},
      {6, "overfit run reaches 95", criterion_overfit},
      {7, "ablation directions", criterion_ablation_direction},
      {8, "seeded determinism", criterion_determinism},
      {9, "preprocess behavior suite", criterion_preprocess_suite},
  };

  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.contains(criterion.id)) continue;
    try {
      const std::string detail = criterion.run();
      std::printf("[PASS] criterion %d: %s (%s)\n", criterion.id, criterion.name,
                  detail.c_str());
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d: %s - %s\n", criterion.id, criterion.name, e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
