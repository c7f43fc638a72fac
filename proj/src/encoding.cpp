#include "w2kpe/encoding.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "w2kpe/errors.hpp"

namespace w2kpe {

double completeness_score(int matched, int total) {
  if (matched < 1 || matched > total) {
    throw InvalidCount("completeness_score: matched=" + std::to_string(matched) +
                       " total=" + std::to_string(total));
  }
  return static_cast<double>(matched) / static_cast<double>(total);
}

namespace {

// Greedy maximal match starting at segment position s0: repeatedly take the
// nearest later segment token (within max_gap skips) that continues the
// keyphrase, always consuming the earliest still-available keyphrase token.
std::vector<int> match_from(const Segment& segment,
                            const std::vector<std::string>& kp, int s0,
                            int max_gap) {
  const int n = static_cast<int>(segment.tokens.size());
  const int m = static_cast<int>(kp.size());
  int k0 = -1;
  for (int k = 0; k < m; ++k) {
    if (kp[k] == segment.tokens[s0].surface) {
      k0 = k;
      break;
    }
  }
  if (k0 < 0) return {};
  std::vector<int> indices{s0};
  int kpos = k0;
  int spos = s0;
  for (;;) {
    bool extended = false;
    const int limit = std::min(n - 1, spos + max_gap + 1);
    for (int s = spos + 1; s <= limit && !extended; ++s) {
      for (int k = kpos + 1; k < m; ++k) {
        if (kp[k] == segment.tokens[s].surface) {
          indices.push_back(s);
          kpos = k;
          spos = s;
          extended = true;
          break;
        }
      }
    }
    if (!extended) break;
  }
  return indices;
}

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  // Both strictly increasing.
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<KeyphraseAppearance> locate_appearances(
    const Segment& segment, const std::vector<std::string>& keyphrase_tokens,
    const EncodingConfig& config) {
  const int n = static_cast<int>(segment.tokens.size());
  const int total = static_cast<int>(keyphrase_tokens.size());
  if (total == 0 || n == 0) return {};

  std::vector<std::vector<int>> candidates;
  for (int s0 = 0; s0 < n; ++s0) {
    auto indices = match_from(segment, keyphrase_tokens, s0, config.max_gap);
    if (indices.empty()) continue;
    const int matched = static_cast<int>(indices.size());
    // Fragments of one matched token only count for single-token keyphrases.
    if (matched < std::min(2, total)) continue;
    if (completeness_score(matched, total) < config.min_coverage) continue;
    candidates.push_back(std::move(indices));
  }

  std::vector<KeyphraseAppearance> appearances;
  std::string phrase;
  for (const auto& t : keyphrase_tokens) phrase += t;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    bool maximal = true;
    for (std::size_t b = 0; b < candidates.size() && maximal; ++b) {
      if (a != b && candidates[a].size() < candidates[b].size() &&
          is_subset(candidates[a], candidates[b])) {
        maximal = false;
      }
    }
    if (!maximal) continue;
    KeyphraseAppearance app;
    app.phrase = phrase;
    app.token_indices = candidates[a];
    app.completeness =
        completeness_score(static_cast<int>(candidates[a].size()), total);
    appearances.push_back(std::move(app));
  }
  return appearances;
}

EncodedSegment encode_grid(const Segment& segment,
                           const std::vector<KeyphraseAppearance>& appearances) {
  const int n = static_cast<int>(segment.tokens.size());
  EncodedSegment encoded;
  encoded.segment = segment;
  encoded.labels = LabelGrid(n);
  encoded.appearances = appearances;

  std::map<std::pair<int, int>, double> targets;
  for (const auto& app : appearances) {
    for (int idx : app.token_indices) {
      if (idx < 0 || idx >= n) {
        throw IndexOutOfRange("encode_grid: token index " + std::to_string(idx) +
                              " outside grid of size " + std::to_string(n));
      }
    }
    const auto& ix = app.token_indices;
    for (std::size_t k = 0; k + 1 < ix.size(); ++k) {
      encoded.labels.set(ix[k], ix[k + 1], GridLabel::kNextWord);
    }
    const int head = ix.front();
    const int tail = ix.back();
    encoded.labels.set(tail, head, GridLabel::kTailHead);
    auto [it, inserted] = targets.emplace(std::make_pair(tail, head), app.completeness);
    if (!inserted) it->second = std::max(it->second, app.completeness);
  }
  for (const auto& [cell, y] : targets) {
    encoded.score_targets.push_back({cell.first, cell.second, y});
  }
  return encoded;
}

}  // namespace w2kpe
