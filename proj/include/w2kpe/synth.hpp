#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "w2kpe/corpus.hpp"

namespace w2kpe {

// Synthetic meeting-transcript corpora for tests, demos, and the ablation
// harness. Words are fixed-width 3-character strings (consonant, vowel,
// digit) so greedy longest-match segmentation recovers them exactly and no
// character run can trigger stutter removal.
struct SynthOptions {
  int num_docs = 50;
  int vocab_words = 120;
  int min_sentences = 2;
  int max_sentences = 4;
  int min_sentence_words = 4;
  int max_sentence_words = 8;
  int min_phrases = 2;
  int max_phrases = 5;
  // Fractions of planted phrases realized in each shape. Gapped appearances
  // carry one intervening filler word; partial ones drop the last token of a
  // 3-token phrase (always next to a full appearance of the same phrase);
  // split ones straddle a sentence boundary.
  double gapped_fraction = 0.0;
  double partial_fraction = 0.0;
  double split_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<CorpusRecord> records;
  std::vector<std::string> lexicon;
  std::vector<std::string> stopwords;

  void save(const std::string& base_path) const;  // writes .jsonl/.lexicon/.stopwords
};

SynthCorpus make_corpus(const SynthOptions& options);

// Contiguous, gapped, and partial appearances; suited to memorization runs.
SynthCorpus make_overfit_corpus(int num_docs, std::uint64_t seed);

// Most keyphrase evidence straddles adjacent sentences, so sentence fusion
// decides whether the evidence is visible inside one segment.
SynthCorpus make_fusion_split_corpus(int num_docs, std::uint64_t seed);

// A large share of appearances carry a one-word gap, so restricting the
// encoder to contiguous matches starves those phrases of training signal.
SynthCorpus make_discontinuous_corpus(int num_docs, std::uint64_t seed);

}  // namespace w2kpe
