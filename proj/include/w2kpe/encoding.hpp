#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "w2kpe/preprocess.hpp"

namespace w2kpe {

// Word-pair grid labels. kNextWord marks (i, j), i < j: token j directly
// follows token i inside some keyphrase appearance (intervening non-member
// tokens skipped). kTailHead marks (tail, head), tail >= head: boundary cell
// of one appearance. Single keyphrase class, so exactly one tail-head label.
enum class GridLabel : std::uint8_t { kNone = 0, kNextWord = 1, kTailHead = 2 };

inline constexpr int kNumGridClasses = 3;

class LabelGrid {
 public:
  LabelGrid() = default;
  explicit LabelGrid(int n) : n_(n), cells_(static_cast<std::size_t>(n) * n, GridLabel::kNone) {}

  int size() const { return n_; }
  GridLabel at(int i, int j) const { return cells_[idx(i, j)]; }
  void set(int i, int j, GridLabel label) { cells_[idx(i, j)] = label; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int n_ = 0;
  std::vector<GridLabel> cells_;
};

// One realization of a keyphrase inside a segment.
struct KeyphraseAppearance {
  std::string phrase;              // gold surface form
  std::vector<int> token_indices;  // strictly increasing segment positions
  double completeness = 1.0;       // matched / total keyphrase tokens, in (0, 1]
};

struct ScoreTarget {
  int tail = 0;
  int head = 0;
  double completeness = 1.0;
};

struct EncodedSegment {
  Segment segment;
  LabelGrid labels;
  std::vector<ScoreTarget> score_targets;  // sorted by (tail, head), unique cells
  std::vector<KeyphraseAppearance> appearances;
};

struct EncodingConfig {
  int max_gap = 1;           // non-matched tokens allowed between matches
  double min_coverage = 0.5; // minimum matched/total ratio, in (0, 1]
};

// matched / total, in (0, 1]. Throws InvalidCount unless 1 <= matched <= total.
double completeness_score(int matched, int total);

// All maximal ordered-subsequence matches of keyphrase_tokens in the segment:
// matched tokens keep keyphrase order, at most max_gap non-matched segment
// tokens sit between consecutive matches, coverage >= min_coverage. One match
// per distinct first-token position; matches whose index set is contained in
// another match are dropped, and a single matched token only counts when the
// keyphrase itself is a single token.
std::vector<KeyphraseAppearance> locate_appearances(
    const Segment& segment, const std::vector<std::string>& keyphrase_tokens,
    const EncodingConfig& config);

// Writes appearances into the label grid: kNextWord at each consecutive index
// pair, kTailHead at (last, first) with the completeness as score target.
// Colliding tail-head cells keep the maximum completeness.
EncodedSegment encode_grid(const Segment& segment,
                           const std::vector<KeyphraseAppearance>& appearances);

}  // namespace w2kpe
