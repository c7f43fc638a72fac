#include "w2kpe/preprocess.hpp"

#include <algorithm>
#include <fstream>

#include "w2kpe/errors.hpp"
#include "w2kpe/utf8.hpp"

namespace w2kpe {

Lexicon::Lexicon(const std::vector<std::string>& entries) {
  for (const auto& e : entries) add(e);
}

void Lexicon::add(std::string_view entry) {
  if (entry.empty()) return;
  entries_.emplace(entry);
  max_entry_scalars_ = std::max(max_entry_scalars_, utf8::scalar_count(entry));
}

std::string remove_stutter(std::string_view text, int min_run) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t len = utf8::scalar_length_at(text, pos);
    const std::string_view scalar = text.substr(pos, len);
    std::size_t run = 1;
    std::size_t next = pos + len;
    while (next + len <= text.size() && text.substr(next, len) == scalar &&
           utf8::scalar_length_at(text, next) == len) {
      ++run;
      next += len;
    }
    const std::size_t keep = run >= static_cast<std::size_t>(min_run) ? 1 : run;
    for (std::size_t i = 0; i < keep; ++i) out.append(scalar);
    pos = next;
  }
  return out;
}

std::vector<Token> segment_words(std::string_view text, const Lexicon& lexicon,
                                 int sentence_index) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best = 0;
    std::size_t end = pos;
    for (std::size_t scalars = 0;
         scalars < lexicon.max_entry_scalars() && end < text.size(); ++scalars) {
      end += utf8::scalar_length_at(text, end);
      if (lexicon.contains(text.substr(pos, end - pos))) best = end - pos;
    }
    if (best == 0) best = utf8::scalar_length_at(text, pos);  // single-scalar fallback
    Token tok;
    tok.surface = std::string(text.substr(pos, best));
    tok.sentence_index = sentence_index;
    tok.char_begin = pos;
    tok.char_end = pos + best;
    tokens.push_back(std::move(tok));
    pos += best;
  }
  return tokens;
}

std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                    const StringSet& stopwords) {
  std::vector<Token> kept;
  kept.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (!stopwords.contains(std::string_view(tok.surface))) kept.push_back(tok);
  }
  return kept;
}

std::vector<Segment> fuse_sentences(const std::vector<std::vector<Token>>& sentences,
                                    std::size_t max_words,
                                    const std::string& source_doc) {
  std::vector<Segment> segments;
  Segment current;
  current.source_doc = source_doc;
  for (const auto& sentence : sentences) {
    if (!current.tokens.empty() &&
        current.tokens.size() + sentence.size() > max_words) {
      segments.push_back(std::move(current));
      current = Segment{};
      current.source_doc = source_doc;
    }
    // An oversized sentence lands in an empty segment and stays whole.
    current.tokens.insert(current.tokens.end(), sentence.begin(), sentence.end());
  }
  if (!current.tokens.empty()) segments.push_back(std::move(current));
  return segments;
}

std::vector<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab != std::string::npos) line.resize(tab);
    if (!line.empty()) entries.push_back(line);
  }
  return entries;
}

}  // namespace w2kpe
