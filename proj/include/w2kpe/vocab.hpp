#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "w2kpe/preprocess.hpp"

namespace w2kpe {

// Token-surface to id mapping. Id 0 is the unknown-token bucket; everything
// else is assigned in first-appearance order, so the mapping is a pure
// function of the training corpus.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<Segment>& segments);

  std::int32_t add(const std::string& surface);
  std::int32_t id_or_unknown(const std::string& surface) const;
  const std::string& surface(std::int32_t id) const { return id_to_surface_[id]; }
  std::int64_t size() const { return static_cast<std::int64_t>(id_to_surface_.size()); }

  std::vector<std::int32_t> encode(const Segment& segment) const;

  // One surface per line, line order = id. Line 1 is the <unk> sentinel.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  static constexpr std::int32_t kUnknownId = 0;

 private:
  std::vector<std::string> id_to_surface_;
  std::unordered_map<std::string, std::int32_t> surface_to_id_;
};

}  // namespace w2kpe
