#include "w2kpe/decode.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "w2kpe/errors.hpp"

namespace w2kpe {

namespace {

constexpr int kNextWordClass = static_cast<int>(GridLabel::kNextWord);
constexpr int kTailHeadClass = static_cast<int>(GridLabel::kTailHead);

// Edges only run from lower to higher index, so every path is simple by
// construction; recursion just prunes nodes past the target tail.
void collect_paths(const std::vector<std::vector<int>>& edges, int tail,
                   int max_tokens, std::vector<int>& path,
                   std::vector<std::vector<int>>& out) {
  const int current = path.back();
  if (current == tail) {
    out.push_back(path);
    return;
  }
  if (static_cast<int>(path.size()) >= max_tokens) return;
  for (int next : edges[current]) {
    if (next > tail) break;
    path.push_back(next);
    collect_paths(edges, tail, max_tokens, path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<DecodedAppearance> decode_grid(const GridPrediction& pred,
                                           const Segment& segment,
                                           const DecodeConfig& cfg) {
  const int n = static_cast<int>(segment.tokens.size());
  if (pred.n != n) {
    throw ShapeMismatch("decode_grid: grid size " + std::to_string(pred.n) +
                        " does not match segment of " + std::to_string(n) + " tokens");
  }

  std::vector<std::vector<int>> edges(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (pred.prob(i, j, kNextWordClass) >= cfg.label_threshold) {
        edges[i].push_back(j);  // ascending by construction
      }
    }
  }

  std::vector<DecodedAppearance> appearances;
  std::set<std::vector<int>> seen;
  std::vector<int> path;
  std::vector<std::vector<int>> paths;
  for (int tail = 0; tail < n; ++tail) {
    for (int head = 0; head <= tail; ++head) {
      if (pred.prob(tail, head, kTailHeadClass) < cfg.label_threshold) continue;
      paths.clear();
      path.assign(1, head);
      collect_paths(edges, tail, cfg.max_phrase_tokens, path, paths);
      for (auto& indices : paths) {
        if (!seen.insert(indices).second) continue;
        DecodedAppearance app;
        app.score = pred.score(tail, head);
        for (std::size_t k = 0; k < indices.size(); ++k) {
          if (k > 0) app.surface += cfg.joiner;
          app.surface += segment.tokens[indices[k]].surface;
        }
        app.token_indices = std::move(indices);
        appearances.push_back(std::move(app));
      }
    }
  }
  return appearances;
}

std::vector<RankedKeyphrase> aggregate_scores(
    const std::vector<std::vector<DecodedAppearance>>& per_segment) {
  std::vector<RankedKeyphrase> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t seg = 0; seg < per_segment.size(); ++seg) {
    for (const auto& app : per_segment[seg]) {
      const GridPosition pos{static_cast<int>(seg),
                             app.token_indices.empty() ? 0 : app.token_indices.front()};
      auto [it, inserted] = index.emplace(app.surface, groups.size());
      if (inserted) {
        RankedKeyphrase group;
        group.surface = app.surface;
        group.first_position = pos;
        groups.push_back(std::move(group));
      }
      RankedKeyphrase& group = groups[it->second];
      group.total_score += app.score;
      group.appearance_count += 1;
      group.first_position = std::min(group.first_position, pos);
    }
  }
  return groups;
}

std::vector<std::string> rank_topk(std::vector<RankedKeyphrase> ranked, int k) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedKeyphrase& a, const RankedKeyphrase& b) {
                     if (a.total_score != b.total_score) return a.total_score > b.total_score;
                     if (a.first_position != b.first_position) {
                       return a.first_position < b.first_position;
                     }
                     return a.surface < b.surface;
                   });
  const std::size_t take = std::min<std::size_t>(ranked.size(), k > 0 ? static_cast<std::size_t>(k) : 0);
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[i].surface);
  return out;
}

}  // namespace w2kpe
