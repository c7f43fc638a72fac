#include <doctest.h>

#include <algorithm>

#include "testutil.hpp"
#include "w2kpe/errors.hpp"
#include "w2kpe/metrics.hpp"

using namespace w2kpe;

TEST_CASE("normalize_phrase lowercases and trims") {
  CHECK(normalize_phrase("  Hello World\t") == "hello world");
  CHECK(normalize_phrase("机器学习") == "机器学习");
  CHECK(normalize_phrase("") == "");
  CHECK(normalize_phrase("   ") == "");
}

TEST_CASE("exact_f1_at_k") {
  SUBCASE("perfect prediction") {
    const std::vector<std::string> gold{"a", "b", "c"};
    const Prf prf = exact_f1_at_k(gold, gold, 10);
    CHECK(prf.f1 == doctest::Approx(1.0));
  }
  SUBCASE("half right") {
    std::vector<std::string> pred, gold;
    for (int i = 0; i < 10; ++i) gold.push_back("g" + std::to_string(i));
    for (int i = 0; i < 5; ++i) pred.push_back(gold[i]);
    for (int i = 0; i < 5; ++i) pred.push_back("junk" + std::to_string(i));
    const Prf prf = exact_f1_at_k(pred, gold, 10);
    CHECK(prf.precision == doctest::Approx(0.5));
    CHECK(prf.recall == doctest::Approx(0.5));
    CHECK(prf.f1 == doctest::Approx(0.5));
  }
  SUBCASE("empty gold and empty predictions score zero") {
    CHECK(exact_f1_at_k({}, {}, 10).f1 == 0.0);
  }
  SUBCASE("precision divides by min(k, predictions)") {
    const Prf prf = exact_f1_at_k({"a"}, {"a", "b", "c", "d"}, 10);
    CHECK(prf.precision == doctest::Approx(1.0));
    CHECK(prf.recall == doctest::Approx(0.25));
  }
  SUBCASE("k truncates the ranking") {
    const Prf prf = exact_f1_at_k({"x", "a"}, {"a"}, 1);
    CHECK(prf.precision == 0.0);
    CHECK(prf.recall == 0.0);
  }
  SUBCASE("duplicate predictions consume distinct gold entries") {
    const Prf prf = exact_f1_at_k({"a", "a"}, {"a"}, 10);
    CHECK(prf.precision == doctest::Approx(0.5));
    CHECK(prf.recall == doctest::Approx(1.0));
  }
}

TEST_CASE("partial_f1_at_k uses bidirectional substring containment") {
  SUBCASE("prediction inside gold") {
    const Prf prf = partial_f1_at_k({"机器学习"}, {"机器学习模型"}, 10);
    CHECK(prf.f1 == doctest::Approx(1.0));
  }
  SUBCASE("gold inside prediction") {
    const Prf prf = partial_f1_at_k({"deep learning model"}, {"learning"}, 10);
    CHECK(prf.f1 == doctest::Approx(1.0));
  }
  SUBCASE("no overlap") {
    CHECK(partial_f1_at_k({"abc"}, {"xyz"}, 10).f1 == 0.0);
  }
  SUBCASE("exact matches satisfy the partial predicate") {
    const std::vector<std::string> both{"aa", "bb"};
    CHECK(partial_f1_at_k(both, both, 10).f1 == doctest::Approx(1.0));
  }
}

TEST_CASE("partial F1 dominates exact F1") {
  std::mt19937_64 gen(41);
  const std::vector<std::string> alphabet{"a", "b", "c", "ab", "bc", "abc"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> pred, gold;
    for (std::size_t i = 0, n = uniform_index(gen, 5); i < n; ++i) {
      pred.push_back(alphabet[uniform_index(gen, alphabet.size())]);
    }
    for (std::size_t i = 0, n = uniform_index(gen, 5); i < n; ++i) {
      gold.push_back(alphabet[uniform_index(gen, alphabet.size())]);
    }
    const int k = 1 + static_cast<int>(uniform_index(gen, 5));
    const Prf exact = exact_f1_at_k(pred, gold, k);
    const Prf partial = partial_f1_at_k(pred, gold, k);
    CHECK(partial.f1 >= exact.f1);
    CHECK(exact.f1 >= 0.0);
    CHECK(partial.f1 <= 1.0);
  }
}

TEST_CASE("greedy exact matching equals the brute-force maximum") {
  const std::vector<std::string> alphabet{"a", "b", "c", "ab", "bc", "abc"};
  std::mt19937_64 gen(43);
  auto equals = [](const std::string& x, const std::string& y) { return x == y; };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> pred, gold;
    for (std::size_t i = 0, n = uniform_index(gen, 5); i < n; ++i) {
      pred.push_back(alphabet[uniform_index(gen, alphabet.size())]);
    }
    for (std::size_t i = 0, n = uniform_index(gen, 5); i < n; ++i) {
      gold.push_back(alphabet[uniform_index(gen, alphabet.size())]);
    }
    const int k = 4;
    const Prf exact = exact_f1_at_k(pred, gold, k);
    const int optimal = testutil::brute_force_matches(pred, gold, equals);
    const double denom = std::min<double>(pred.size(), k);
    if (denom > 0) {
      CHECK(exact.precision == doctest::Approx(optimal / denom));
    }
  }
}

TEST_CASE("documented greedy-suboptimal partial case") {
  // Greedy sends "a" to "ab" (first in gold order), starving "b"; the
  // optimal assignment pairs a->a and b->ab. Greedy is the specified
  // behavior, the brute-force count is strictly larger.
  const std::vector<std::string> pred{"a", "b"};
  const std::vector<std::string> gold{"ab", "a"};
  const Prf partial = partial_f1_at_k(pred, gold, 4);
  CHECK(partial.precision == doctest::Approx(0.5));
  const int optimal = testutil::brute_force_matches(
      pred, gold, [](const std::string& x, const std::string& y) {
        return x == y || x.find(y) != std::string::npos || y.find(x) != std::string::npos;
      });
  CHECK(optimal == 2);
}

TEST_CASE("overall_score macro averages") {
  EvalConfig cfg;
  SUBCASE("all perfect is 100") {
    std::vector<DocPredictions> docs(3);
    for (auto& doc : docs) {
      doc.predicted = {"x", "y"};
      doc.gold = {"x", "y"};
    }
    CHECK(overall_score(docs, cfg).overall == doctest::Approx(100.0));
  }
  SUBCASE("uniform half score is 50") {
    // One doc with exact = partial = 0.5 at every k: 10 gold, top-10
    // predictions with 5 hits and 5 disjoint strings.
    DocPredictions doc;
    for (int i = 0; i < 10; ++i) doc.gold.push_back("gold" + std::to_string(i) + "x");
    for (int i = 0; i < 5; ++i) doc.predicted.push_back(doc.gold[i]);
    for (int i = 0; i < 5; ++i) doc.predicted.push_back("zq" + std::to_string(i));
    const EvalReport report = overall_score({doc}, cfg);
    CHECK(report.overall == doctest::Approx(50.0));
  }
  SUBCASE("two docs at 100 and 0 average to 50") {
    DocPredictions good{"g", {"x"}, {"x"}};
    DocPredictions bad{"b", {"zz"}, {"qq"}};
    CHECK(overall_score({good, bad}, cfg).overall == doctest::Approx(50.0));
  }
  SUBCASE("document order does not matter") {
    DocPredictions a{"a", {"x"}, {"x"}};
    DocPredictions b{"b", {"y"}, {"zz"}};
    DocPredictions c{"c", {"q", "r"}, {"q"}};
    const double forward_order = overall_score({a, b, c}, cfg).overall;
    const double reversed = overall_score({c, b, a}, cfg).overall;
    CHECK(forward_order == doctest::Approx(reversed));
  }
  SUBCASE("empty corpus throws") {
    CHECK_THROWS_AS(overall_score({}, cfg), EmptyCorpus);
  }
}
