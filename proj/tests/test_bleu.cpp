#include "docrisk/bleu.hpp"

#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace docrisk;

namespace {

Sentence sent(const std::vector<std::string>& words) {
  Sentence s;
  for (const auto& w : words) s.tokens.push_back(Token{w, kUnkId});
  return s;
}

}  // namespace

TEST_CASE("identical sentences score 1.0") {
  auto s = sent({"the", "cat", "sat", "down", "here"});
  CHECK(bleu_sentence(s, s).value == doctest::Approx(1.0).epsilon(1e-12));
  // Copies shorter than the n-gram order still score 1.
  auto t = sent({"hi"});
  CHECK(bleu_sentence(t, t).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disjoint unigrams score 0") {
  CHECK(bleu_sentence(sent({"a", "b", "c"}), sent({"x", "y", "z"})).value == 0.0);
}

TEST_CASE("empty hypothesis scores 0") {
  CHECK(bleu_sentence(sent({}), sent({"a"})).value == 0.0);
}

TEST_CASE("frozen value from the independent reference implementation") {
  // Computed with the reference implementation ahead of time.
  BleuScore score = bleu_sentence(sent({"the", "cat", "sat"}), sent({"the", "cat", "ran"}));
  CHECK(score.value == doctest::Approx(0.6389431042462724).epsilon(1e-9));
  CHECK(score.brevity_penalty == 1.0);
}

TEST_CASE("document BLEU concatenates sentences; frozen 2-sentence value") {
  std::vector<Sentence> hyp{sent({"a", "b", "c"}), sent({"d", "e", "f", "g"})};
  std::vector<Sentence> ref{sent({"a", "b", "x"}), sent({"d", "e", "f", "h"})};
  CHECK(bleu_document(hyp, ref).value == doctest::Approx(0.34572078464194106).epsilon(1e-9));
}

TEST_CASE("identical document blocks score 1; reordering keeps unigram precision") {
  std::vector<Sentence> block{sent({"a", "b", "c"}), sent({"d", "e", "f"}), sent({"g", "h"})};
  CHECK(bleu_document(block, block).value == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<Sentence> reordered{block[2], block[0], block[1]};
  BleuScore score = bleu_document(reordered, block);
  CHECK(score.ngram_precisions[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(score.value < 1.0);
  CHECK(score.value == doctest::Approx(oracle::bleu({"g", "h", "a", "b", "c", "d", "e", "f"},
                                                    {"a", "b", "c", "d", "e", "f", "g", "h"}))
                           .epsilon(1e-12));
}

TEST_CASE("document BLEU of a single-sentence block equals sentence BLEU") {
  auto h = sent({"a", "b", "c", "d"});
  auto r = sent({"a", "c", "b", "d"});
  CHECK(bleu_document({h}, {r}).value == bleu_sentence(h, r).value);
}

TEST_CASE("oracle equivalence on random pairs") {
  std::mt19937 rng(4211);
  std::uniform_int_distribution<int> len_dist(0, 12);
  std::uniform_int_distribution<int> word_dist(0, 9);
  auto random_tokens = [&](int len) {
    std::vector<std::string> toks;
    for (int i = 0; i < len; ++i) toks.push_back("w" + std::to_string(word_dist(rng)));
    return toks;
  };
  for (int trial = 0; trial < 200; ++trial) {
    auto hyp = random_tokens(len_dist(rng));
    auto ref = random_tokens(std::max(1, len_dist(rng)));
    const double ours = bleu_tokens(hyp, ref).value;
    const double ref_value = oracle::bleu(hyp, ref);
    CHECK(ours == doctest::Approx(ref_value).epsilon(1e-9));
    CHECK(ours >= 0.0);
    CHECK(ours <= 1.0);
  }
}

TEST_CASE("stats accumulate across segments") {
  BleuStats stats;
  stats.add({"a", "b"}, {"a", "b"});
  stats.add({"c", "d"}, {"c", "x"});
  BleuStats whole;
  whole.add({"a", "b"}, {"a", "b"});
  BleuStats other;
  other.add({"c", "d"}, {"c", "x"});
  whole += other;
  CHECK(stats.score().value == doctest::Approx(whole.score().value).epsilon(1e-12));
  CHECK(stats.hyp_len == 4);
  CHECK(stats.ref_len == 4);
}
