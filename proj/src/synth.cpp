#include "w2kpe/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "w2kpe/errors.hpp"
#include "w2kpe/rng.hpp"

namespace w2kpe {

namespace {

constexpr const char* kConsonants = "bcdfghjklm";
constexpr const char* kVowels = "aeiou";
constexpr const char* kDigits = "0123456789";
constexpr int kWordSpace = 500;  // 10 * 5 * 10
constexpr int kStopWordCount = 6;

// 3-char word: consonant, vowel, digit. Adjacent characters always come from
// different classes, also across word boundaries, so no run of identical
// characters can form and every in-vocabulary trigram segments exactly.
std::string word_at(int index) {
  std::string w(3, ' ');
  w[0] = kConsonants[index / 50];
  w[1] = kVowels[(index / 10) % 5];
  w[2] = kDigits[index % 10];
  return w;
}

enum class PhrasePlan { kContiguous, kGappedOnly, kSplitOnly };

struct SentenceBuilder {
  std::vector<std::string> head;  // reserved for the second half of a split phrase
  std::vector<std::vector<std::string>> middle;
  std::vector<std::string> tail;  // reserved for the first half of a split phrase

  std::vector<std::string> assemble() const {
    std::vector<std::string> words = head;
    for (const auto& chunk : middle) words.insert(words.end(), chunk.begin(), chunk.end());
    words.insert(words.end(), tail.begin(), tail.end());
    return words;
  }
};

class CorpusBuilder {
 public:
  explicit CorpusBuilder(const SynthOptions& options)
      : options_(options), gen_(derive_seed(options.seed, "synth-corpus")) {
    const int content = std::min(options.vocab_words, kWordSpace - kStopWordCount);
    for (int i = 0; i < content; ++i) content_words_.push_back(word_at(i));
    for (int i = 0; i < kStopWordCount; ++i) {
      stopwords_.push_back(word_at(kWordSpace - 1 - i));
    }
  }

  SynthCorpus build() {
    SynthCorpus corpus;
    corpus.lexicon = content_words_;
    corpus.lexicon.insert(corpus.lexicon.end(), stopwords_.begin(), stopwords_.end());
    corpus.stopwords = stopwords_;
    for (int d = 0; d < options_.num_docs; ++d) {
      corpus.records.push_back(make_document(d));
    }
    return corpus;
  }

 private:
  int uniform_between(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(gen_, static_cast<std::size_t>(hi - lo + 1)));
  }

  const std::string& random_content_word() {
    return content_words_[uniform_index(gen_, content_words_.size())];
  }

  std::vector<std::string> random_phrase(int length, std::set<std::string>& used_surfaces) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::vector<std::string> words;
      std::set<std::string> distinct;
      while (static_cast<int>(words.size()) < length) {
        const std::string& w = random_content_word();
        if (distinct.insert(w).second) words.push_back(w);
      }
      std::string surface;
      for (const auto& w : words) surface += w;
      if (used_surfaces.insert(surface).second) return words;
    }
    throw Error("synth: could not draw a fresh phrase; vocabulary too small");
  }

  void insert_chunk(SentenceBuilder& sentence, std::vector<std::string> chunk) {
    const std::size_t at = uniform_index(gen_, sentence.middle.size() + 1);
    sentence.middle.insert(sentence.middle.begin() + static_cast<std::ptrdiff_t>(at),
                           std::move(chunk));
  }

  CorpusRecord make_document(int doc_index) {
    const int n_sentences = uniform_between(options_.min_sentences, options_.max_sentences);
    std::vector<SentenceBuilder> sentences(static_cast<std::size_t>(n_sentences));
    for (auto& sentence : sentences) {
      const int n_words = uniform_between(options_.min_sentence_words, options_.max_sentence_words);
      std::vector<std::string> filler;
      for (int w = 0; w < n_words; ++w) {
        // Sprinkle stop words so the removal path sees real work.
        if (uniform01(gen_) < 0.05) {
          filler.push_back(stopwords_[uniform_index(gen_, stopwords_.size())]);
        } else {
          filler.push_back(random_content_word());
        }
      }
      sentence.middle.push_back(std::move(filler));
    }

    std::set<std::string> used_surfaces;
    std::vector<std::string> gold;
    std::vector<bool> boundary_used(n_sentences > 1 ? static_cast<std::size_t>(n_sentences - 1) : 0,
                                    false);
    const int n_phrases = uniform_between(options_.min_phrases, options_.max_phrases);
    for (int p = 0; p < n_phrases; ++p) {
      const double u = uniform01(gen_);
      PhrasePlan plan = PhrasePlan::kContiguous;
      if (u < options_.split_fraction && n_sentences > 1) {
        plan = PhrasePlan::kSplitOnly;
      } else if (u < options_.split_fraction + options_.gapped_fraction) {
        plan = PhrasePlan::kGappedOnly;
      }
      const bool with_partial =
          plan == PhrasePlan::kContiguous && uniform01(gen_) < options_.partial_fraction;
      // Split phrases stay at two tokens so the halves are single words and
      // the evidence truly spans the sentence boundary.
      const int length = plan == PhrasePlan::kSplitOnly ? 2
                         : with_partial                 ? 3
                                                        : uniform_between(2, 3);
      const auto words = random_phrase(length, used_surfaces);

      std::string surface;
      for (const auto& w : words) surface += w;
      gold.push_back(surface);

      const int copies = uniform_between(1, 2);
      switch (plan) {
        case PhrasePlan::kContiguous: {
          for (int c = 0; c < copies; ++c) {
            insert_chunk(sentences[uniform_index(gen_, sentences.size())], words);
          }
          if (with_partial) {
            std::vector<std::string> fragment(words.begin(), words.end() - 1);
            insert_chunk(sentences[uniform_index(gen_, sentences.size())], std::move(fragment));
          }
          break;
        }
        case PhrasePlan::kGappedOnly: {
          for (int c = 0; c < copies; ++c) {
            std::vector<std::string> chunk = words;
            const auto gap_at =
                1 + static_cast<std::ptrdiff_t>(uniform_index(gen_, chunk.size() - 1));
            // The intervening word must not belong to the phrase, or the
            // appearance could collapse back to a contiguous match.
            std::string filler = random_content_word();
            while (std::find(words.begin(), words.end(), filler) != words.end()) {
              filler = random_content_word();
            }
            chunk.insert(chunk.begin() + gap_at, std::move(filler));
            insert_chunk(sentences[uniform_index(gen_, sentences.size())], std::move(chunk));
          }
          break;
        }
        case PhrasePlan::kSplitOnly: {
          int boundary = -1;
          for (int attempt = 0; attempt < n_sentences * 2; ++attempt) {
            const auto b = uniform_index(gen_, boundary_used.size());
            if (!boundary_used[b]) {
              boundary = static_cast<int>(b);
              break;
            }
          }
          if (boundary < 0) {
            insert_chunk(sentences[uniform_index(gen_, sentences.size())], words);
            break;
          }
          boundary_used[static_cast<std::size_t>(boundary)] = true;
          const std::ptrdiff_t cut = 1;
          sentences[static_cast<std::size_t>(boundary)].tail.assign(words.begin(),
                                                                    words.begin() + cut);
          sentences[static_cast<std::size_t>(boundary) + 1].head.assign(words.begin() + cut,
                                                                        words.end());
          break;
        }
      }
    }

    CorpusRecord record;
    record.doc_id = "doc" + std::to_string(doc_index);
    for (const auto& sentence : sentences) {
      std::string text;
      for (const auto& w : sentence.assemble()) text += w;
      record.sentences.push_back(std::move(text));
    }
    record.keyphrases = std::move(gold);
    return record;
  }

  SynthOptions options_;
  std::mt19937_64 gen_;
  std::vector<std::string> content_words_;
  std::vector<std::string> stopwords_;
};

}  // namespace

SynthCorpus make_corpus(const SynthOptions& options) {
  return CorpusBuilder(options).build();
}

SynthCorpus make_overfit_corpus(int num_docs, std::uint64_t seed) {
  SynthOptions options;
  options.num_docs = num_docs;
  options.vocab_words = 120;
  options.min_sentences = 2;
  options.max_sentences = 4;
  options.min_sentence_words = 3;
  options.max_sentence_words = 6;
  options.min_phrases = 3;
  options.max_phrases = 5;
  options.gapped_fraction = 0.2;
  options.partial_fraction = 0.06;
  options.seed = seed;
  return make_corpus(options);
}

SynthCorpus make_fusion_split_corpus(int num_docs, std::uint64_t seed) {
  SynthOptions options;
  options.num_docs = num_docs;
  options.vocab_words = 60;
  options.min_sentences = 3;
  options.max_sentences = 4;
  options.min_sentence_words = 2;
  options.max_sentence_words = 4;
  options.min_phrases = 2;
  options.max_phrases = 4;
  options.split_fraction = 0.7;
  options.seed = seed;
  return make_corpus(options);
}

SynthCorpus make_discontinuous_corpus(int num_docs, std::uint64_t seed) {
  SynthOptions options;
  options.num_docs = num_docs;
  options.vocab_words = 80;
  options.min_sentences = 2;
  options.max_sentences = 3;
  options.min_sentence_words = 3;
  options.max_sentence_words = 6;
  options.min_phrases = 2;
  options.max_phrases = 4;
  options.gapped_fraction = 0.45;
  options.seed = seed;
  return make_corpus(options);
}

void SynthCorpus::save(const std::string& base_path) const {
  save_corpus(records, base_path + ".jsonl");
  std::ofstream lex(base_path + ".lexicon.txt", std::ios::trunc);
  if (!lex) throw IoError("cannot write lexicon: " + base_path + ".lexicon.txt");
  for (const auto& w : lexicon) lex << w << "\n";
  std::ofstream stop(base_path + ".stopwords.txt", std::ios::trunc);
  if (!stop) throw IoError("cannot write stopwords: " + base_path + ".stopwords.txt");
  for (const auto& w : stopwords) stop << w << "\n";
}

}  // namespace w2kpe
