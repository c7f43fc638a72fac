#pragma once

#include <string>
#include <vector>

namespace w2kpe {

struct CorpusRecord {
  std::string doc_id;
  std::vector<std::string> sentences;
  std::vector<std::string> keyphrases;  // may be empty at inference
};

// Line-delimited JSON, one record per line:
//   {"doc_id": "...", "sentences": ["...", ...], "keyphrases": ["...", ...]}
// keyphrases is optional. Parse failures carry the 1-based line number;
// duplicate doc_ids and records with an empty sentences array are rejected.
std::vector<CorpusRecord> load_corpus(const std::string& path);

void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path);

}  // namespace w2kpe
