#include "w2kpe/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "w2kpe/errors.hpp"

namespace w2kpe {

using nlohmann::json;

std::vector<CorpusRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);

  std::vector<CorpusRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ParseError(line_number, "not a JSON object");
    }
    if (!doc.contains("doc_id") || !doc["doc_id"].is_string()) {
      throw ParseError(line_number, "missing string field \"doc_id\"");
    }
    if (!doc.contains("sentences") || !doc["sentences"].is_array()) {
      throw ParseError(line_number, "missing array field \"sentences\"");
    }
    CorpusRecord record;
    record.doc_id = doc["doc_id"].get<std::string>();
    if (record.doc_id.empty()) throw ParseError(line_number, "empty doc_id");
    for (const auto& s : doc["sentences"]) {
      if (!s.is_string()) throw ParseError(line_number, "sentences must be strings");
      record.sentences.push_back(s.get<std::string>());
    }
    if (record.sentences.empty()) {
      throw ParseError(line_number, "record has no sentences");
    }
    if (doc.contains("keyphrases")) {
      if (!doc["keyphrases"].is_array()) {
        throw ParseError(line_number, "keyphrases must be an array");
      }
      for (const auto& kp : doc["keyphrases"]) {
        if (!kp.is_string()) throw ParseError(line_number, "keyphrases must be strings");
        record.keyphrases.push_back(kp.get<std::string>());
      }
    }
    if (!seen_ids.insert(record.doc_id).second) {
      throw DuplicateDocId(record.doc_id, line_number);
    }
    records.push_back(std::move(record));
  }
  return records;
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open corpus for writing: " + path);
  for (const auto& record : records) {
    json doc;
    doc["doc_id"] = record.doc_id;
    doc["sentences"] = record.sentences;
    doc["keyphrases"] = record.keyphrases;
    out << doc.dump() << "\n";
  }
  if (!out) throw IoError("failed writing corpus: " + path);
}

}  // namespace w2kpe
