#include "w2kpe/metrics.hpp"

#include <algorithm>
#include <cctype>

#include "w2kpe/errors.hpp"

namespace w2kpe {

std::string normalize_phrase(std::string_view phrase) {
  std::size_t begin = 0;
  std::size_t end = phrase.size();
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (begin < end && is_space(phrase[begin])) ++begin;
  while (end > begin && is_space(phrase[end - 1])) --end;
  std::string out(phrase.substr(begin, end - begin));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool partial_match(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return a == b;
  return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

template <typename Predicate>
Prf greedy_f1(const std::vector<std::string>& predicted,
              const std::vector<std::string>& gold, int k, Predicate matches) {
  std::vector<std::string> pred_norm;
  const std::size_t take = std::min<std::size_t>(predicted.size(), static_cast<std::size_t>(k));
  pred_norm.reserve(take);
  for (std::size_t i = 0; i < take; ++i) pred_norm.push_back(normalize_phrase(predicted[i]));
  std::vector<std::string> gold_norm;
  gold_norm.reserve(gold.size());
  for (const auto& g : gold) gold_norm.push_back(normalize_phrase(g));

  std::vector<bool> consumed(gold_norm.size(), false);
  int match_count = 0;
  for (const auto& p : pred_norm) {
    for (std::size_t gi = 0; gi < gold_norm.size(); ++gi) {
      if (!consumed[gi] && matches(p, gold_norm[gi])) {
        consumed[gi] = true;
        ++match_count;
        break;
      }
    }
  }

  Prf out;
  out.precision = pred_norm.empty() ? 0.0 : static_cast<double>(match_count) / pred_norm.size();
  out.recall = gold_norm.empty() ? 0.0 : static_cast<double>(match_count) / gold_norm.size();
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace

Prf exact_f1_at_k(const std::vector<std::string>& predicted,
                  const std::vector<std::string>& gold, int k) {
  return greedy_f1(predicted, gold, k,
                   [](const std::string& a, const std::string& b) { return a == b; });
}

Prf partial_f1_at_k(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& gold, int k) {
  return greedy_f1(predicted, gold, k, partial_match);
}

EvalReport overall_score(const std::vector<DocPredictions>& documents,
                         const EvalConfig& cfg) {
  if (documents.empty()) throw EmptyCorpus("overall_score: no documents");
  EvalReport report;
  report.k_values = cfg.k_values;
  double f1_sum = 0.0;
  for (int k : cfg.k_values) {
    Prf exact_avg;
    Prf partial_avg;
    for (const auto& doc : documents) {
      const Prf e = exact_f1_at_k(doc.predicted, doc.gold, k);
      const Prf p = partial_f1_at_k(doc.predicted, doc.gold, k);
      exact_avg.precision += e.precision;
      exact_avg.recall += e.recall;
      exact_avg.f1 += e.f1;
      partial_avg.precision += p.precision;
      partial_avg.recall += p.recall;
      partial_avg.f1 += p.f1;
    }
    const auto docs = static_cast<double>(documents.size());
    for (Prf* avg : {&exact_avg, &partial_avg}) {
      avg->precision /= docs;
      avg->recall /= docs;
      avg->f1 /= docs;
    }
    report.exact.push_back(exact_avg);
    report.partial.push_back(partial_avg);
    f1_sum += (exact_avg.f1 + partial_avg.f1) / 2.0;
  }
  report.overall = 100.0 * f1_sum / static_cast<double>(cfg.k_values.size());
  return report;
}

}  // namespace w2kpe
