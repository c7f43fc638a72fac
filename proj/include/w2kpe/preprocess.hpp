#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace w2kpe {

// Transparent hashing so lookups work on string_view without allocating.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};
using StringSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

struct Token {
  std::string surface;
  int sentence_index = 0;
  // Half-open byte span into the post-stutter-removal sentence text;
  // surface always equals that substring.
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

struct Segment {
  std::vector<Token> tokens;
  std::string source_doc;
  std::size_t word_count() const { return tokens.size(); }
};

// Longest-match dictionary. Entries are token surfaces; the optional
// per-entry frequency from lexicon files is not used by longest match.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(const std::vector<std::string>& entries);

  void add(std::string_view entry);
  bool contains(std::string_view entry) const { return entries_.contains(entry); }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_entry_scalars() const { return max_entry_scalars_; }

 private:
  StringSet entries_;
  std::size_t max_entry_scalars_ = 0;
};

struct PreprocessConfig {
  std::size_t max_segment_words = 500;
  int stutter_min_run = 3;  // must be >= 2
};

// Collapses every maximal run of >= min_run identical Unicode scalars to a
// single occurrence; shorter runs are untouched. Total and idempotent.
std::string remove_stutter(std::string_view text, int min_run);

// Greedy longest-match segmentation, left to right. Positions not covered by
// any lexicon entry fall back to a single-scalar token, so concatenating the
// surfaces always reproduces `text`.
std::vector<Token> segment_words(std::string_view text, const Lexicon& lexicon,
                                 int sentence_index = 0);

// Drops tokens whose surface is a stop word; order and char spans untouched.
std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                    const StringSet& stopwords);

// Greedy packing of whole sentences into segments of at most max_words
// tokens. A single sentence longer than max_words becomes its own oversized
// segment; sentences are never split or reordered.
std::vector<Segment> fuse_sentences(const std::vector<std::vector<Token>>& sentences,
                                    std::size_t max_words,
                                    const std::string& source_doc = "");

// One entry per line, UTF-8; blank lines and lines starting with '#' are
// ignored; an optional tab-separated trailing field (lexicon frequency) is
// stripped. Throws IoError if the file cannot be read.
std::vector<std::string> load_word_list(const std::string& path);

}  // namespace w2kpe
