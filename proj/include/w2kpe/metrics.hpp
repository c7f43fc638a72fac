#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace w2kpe {

struct EvalConfig {
  std::vector<int> k_values{10, 15, 20};
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct DocPredictions {
  std::string doc_id;
  std::vector<std::string> predicted;  // ranked
  std::vector<std::string> gold;       // input order is the matching order
};

struct EvalReport {
  std::vector<int> k_values;
  std::vector<Prf> exact;    // macro-averaged per k
  std::vector<Prf> partial;  // macro-averaged per k
  double overall = 0.0;      // 100 * mean over k of (exact_f1 + partial_f1) / 2
};

// Lowercases ASCII letters and strips surrounding whitespace. The fixed
// normalization applied to every phrase before matching.
std::string normalize_phrase(std::string_view phrase);

// One-to-one matching of the top-min(k, |pred|) predictions against gold by
// normalized string equality. Precision divides by min(k, |pred|); an empty
// prediction list or empty gold scores zero by convention.
Prf exact_f1_at_k(const std::vector<std::string>& predicted,
                  const std::vector<std::string>& gold, int k);

// Same matching loop with the relaxed predicate: equal, or either string is
// a substring of the other. Greedy in prediction-rank order, each prediction
// consuming the first available gold in input order.
Prf partial_f1_at_k(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& gold, int k);

// Per-document F1s macro-averaged across documents, then averaged over
// exact/partial and over k, reported on a 0-100 scale. Throws EmptyCorpus
// when no documents are given.
EvalReport overall_score(const std::vector<DocPredictions>& documents,
                         const EvalConfig& cfg);

}  // namespace w2kpe
