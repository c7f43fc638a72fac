#pragma once

#include <string>
#include <vector>

#include "w2kpe/model.hpp"

namespace w2kpe {

struct DecodedAppearance {
  std::vector<int> token_indices;  // strictly increasing
  std::string surface;             // matched-token surfaces joined by cfg.joiner
  double score = 0.0;              // grid score read at the (tail, head) cell
};

struct GridPosition {
  int segment = 0;
  int token = 0;
  friend auto operator<=>(const GridPosition&, const GridPosition&) = default;
};

struct RankedKeyphrase {
  std::string surface;
  double total_score = 0.0;
  int appearance_count = 0;
  GridPosition first_position;
};

struct DecodeConfig {
  double label_threshold = 0.5;
  int max_phrase_tokens = 12;
  std::string joiner;  // empty by default; set to " " for space-joined languages
};

// Inverts the grid encoding: next-word cells at or above the threshold form a
// directed edge set, and every tail-head cell at or above the threshold emits
// all simple paths head -> ... -> tail of at most max_phrase_tokens tokens.
std::vector<DecodedAppearance> decode_grid(const GridPrediction& pred,
                                           const Segment& segment,
                                           const DecodeConfig& cfg);

// Groups appearances from all segments of one document by exact surface and
// sums their scores.
std::vector<RankedKeyphrase> aggregate_scores(
    const std::vector<std::vector<DecodedAppearance>>& per_segment);

// Top-k surfaces by descending total score; ties broken by earlier first
// position, then lexicographic surface.
std::vector<std::string> rank_topk(std::vector<RankedKeyphrase> ranked, int k);

}  // namespace w2kpe
