#include "docrisk/coherence.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace docrisk;

namespace {

Sentence sent(const std::vector<std::string>& words) {
  Sentence s;
  for (const auto& w : words) s.tokens.push_back(Token{w, kUnkId});
  return s;
}

TopicTable table_ab() {
  TopicTable t(2);
  t.add("a", {1.0, 0.0});
  t.add("b", {0.0, 1.0});
  t.add("c", {1.0, 1.0});
  return t;
}

}  // namespace

TEST_CASE("topic table load parses the word2vec text format") {
  testutil::TempDir tmp("topics");
  auto path = testutil::write_file(tmp.file("t.vec"), "2 3\nfoo 1 2 3\nbar 0.5 0 -1\n");
  TopicTable table = load_topic_table(path);
  CHECK(table.dim() == 3);
  CHECK(table.size() == 2);
  REQUIRE(table.lookup("foo") != nullptr);
  CHECK((*table.lookup("bar"))[2] == doctest::Approx(-1.0));
}

TEST_CASE("topic table rejects dimension mismatches") {
  testutil::TempDir tmp("topics");
  auto path = testutil::write_file(tmp.file("t.vec"), "1 3\nfoo 1 2\n");
  CHECK_THROWS_AS(load_topic_table(path), DimensionMismatchError);
}

TEST_CASE("topic table rejects duplicates and row-count mismatches") {
  testutil::TempDir tmp("topics");
  CHECK_THROWS_AS(
      load_topic_table(testutil::write_file(tmp.file("dup.vec"), "2 2\nfoo 1 2\nfoo 3 4\n")),
      ParseError);
  CHECK_THROWS_AS(
      load_topic_table(testutil::write_file(tmp.file("count.vec"), "3 2\nfoo 1 2\n")),
      ParseError);
}

TEST_CASE("sentence topic is the mean of in-table vectors") {
  TopicTable t = table_ab();
  SentenceTopic topic = sentence_topic(sent({"a", "b"}), t);
  CHECK(topic.covered == 2);
  CHECK(topic.vector[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(topic.vector[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sentence topic of out-of-table tokens is zero") {
  SentenceTopic topic = sentence_topic(sent({"x", "y"}), table_ab());
  CHECK(topic.covered == 0);
  CHECK(topic.vector == std::vector<double>{0.0, 0.0});
}

TEST_CASE("repeated tokens do not change the mean") {
  TopicTable t(2);
  t.add("a", {2.0, 0.0});
  SentenceTopic topic = sentence_topic(sent({"a", "a"}), t);
  CHECK(topic.vector[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(topic.vector[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical nonzero topics score exactly 1") {
  CohScore score = coherence({sent({"a"}), sent({"a"})}, table_ab());
  CHECK(score.pairs == 1);
  CHECK(score.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonal adjacent topics score 0") {
  CohScore score = coherence({sent({"a"}), sent({"b"}), sent({"a"})}, table_ab());
  CHECK(score.pairs == 2);
  CHECK(score.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("derived example: cos((1,0),(1,1)) = 1/sqrt(2)") {
  CohScore score = coherence({sent({"a"}), sent({"c"})}, table_ab());
  CHECK(score.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("single-sentence blocks score 0 with 0 pairs") {
  CohScore score = coherence({sent({"a"})}, table_ab());
  CHECK(score.pairs == 0);
  CHECK(score.value == 0.0);
}

TEST_CASE("zero-coverage sentences contribute cosine 0") {
  CohScore score = coherence({sent({"a"}), sent({"zzz"})}, table_ab());
  CHECK(score.pairs == 1);
  CHECK(score.value == 0.0);
}

TEST_CASE("optional stoplist removes words before averaging") {
  StopList stop;
  stop.add("b");
  CohOptions options;
  options.skip = &stop;
  CohScore with = coherence({sent({"a"}), sent({"a", "b"})}, table_ab(), options);
  CHECK(with.value == doctest::Approx(1.0).epsilon(1e-12));
  CohScore without = coherence({sent({"a"}), sent({"a", "b"})}, table_ab());
  CHECK(without.value < 1.0);
}

TEST_CASE("properties: range, scale invariance, reversal, oracle equivalence") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_int_distribution<int> dim_dist(1, 4);
  for (int trial = 0; trial < 120; ++trial) {
    const int dim = dim_dist(rng);
    const int words = 2 + static_cast<int>(rng() % 5);
    TopicTable table(static_cast<std::size_t>(dim));
    TopicTable scaled(static_cast<std::size_t>(dim));
    const double factor = 0.25 + (rng() % 100) / 10.0;
    for (int w = 0; w < words; ++w) {
      std::vector<double> v(dim), sv(dim);
      for (int d = 0; d < dim; ++d) {
        v[d] = coord(rng);
        sv[d] = factor * v[d];
      }
      table.add("w" + std::to_string(w), v);
      scaled.add("w" + std::to_string(w), sv);
    }
    std::vector<Sentence> block;
    const int k = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < k; ++i) {
      std::vector<std::string> line;
      const int len = 1 + static_cast<int>(rng() % 4);
      for (int t = 0; t < len; ++t)
        line.push_back(rng() % 4 == 0 ? "oov" : "w" + std::to_string(rng() % words));
      block.push_back(sent(line));
    }

    CohScore score = coherence(block, table);
    CHECK(score.pairs == static_cast<std::size_t>(std::max(k - 1, 0)));
    CHECK(score.value >= -1.0 - 1e-12);
    CHECK(score.value <= 1.0 + 1e-12);
    CHECK(score.value == doctest::Approx(oracle::coh_mean(block, table)).epsilon(1e-12));
    CHECK(score.value == doctest::Approx(coherence(block, scaled).value).epsilon(1e-9));

    std::vector<Sentence> reversed(block.rbegin(), block.rend());
    CHECK(coherence(reversed, table).value == doctest::Approx(score.value).epsilon(1e-12));
  }
}
