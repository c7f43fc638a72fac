#include "w2kpe/vocab.hpp"

#include <fstream>

#include "w2kpe/errors.hpp"

namespace w2kpe {

namespace {
const char* kUnknownSurface = "<unk>";
}

Vocabulary::Vocabulary() {
  id_to_surface_.emplace_back(kUnknownSurface);
  surface_to_id_.emplace(kUnknownSurface, kUnknownId);
}

Vocabulary Vocabulary::build(const std::vector<Segment>& segments) {
  Vocabulary vocab;
  for (const auto& segment : segments) {
    for (const auto& token : segment.tokens) vocab.add(token.surface);
  }
  return vocab;
}

std::int32_t Vocabulary::add(const std::string& surface) {
  auto [it, inserted] =
      surface_to_id_.emplace(surface, static_cast<std::int32_t>(id_to_surface_.size()));
  if (inserted) id_to_surface_.push_back(surface);
  return it->second;
}

std::int32_t Vocabulary::id_or_unknown(const std::string& surface) const {
  auto it = surface_to_id_.find(surface);
  return it == surface_to_id_.end() ? kUnknownId : it->second;
}

std::vector<std::int32_t> Vocabulary::encode(const Segment& segment) const {
  std::vector<std::int32_t> ids;
  ids.reserve(segment.tokens.size());
  for (const auto& token : segment.tokens) ids.push_back(id_or_unknown(token.surface));
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open vocabulary for writing: " + path);
  for (const auto& surface : id_to_surface_) out << surface << "\n";
  if (!out) throw IoError("failed writing vocabulary: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary: " + path);
  Vocabulary vocab;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_number == 1) {
      if (line != kUnknownSurface) {
        throw ParseError(1, "vocabulary must start with the <unk> sentinel");
      }
      continue;
    }
    vocab.add(line);
  }
  return vocab;
}

}  // namespace w2kpe
