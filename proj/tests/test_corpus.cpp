#include "docrisk/corpus.hpp"

#include <doctest.h>

#include <random>

#include "test_util.hpp"

using namespace docrisk;

TEST_CASE("tokenize lowercases and splits punctuation") {
  Sentence s = tokenize("The cat, sat.");
  CHECK(s.surfaces() == std::vector<std::string>{"the", "cat", ",", "sat", "."});
}

TEST_CASE("tokenize single token") {
  CHECK(tokenize("a").surfaces() == std::vector<std::string>{"a"});
}

TEST_CASE("tokenize rejects whitespace-only lines") {
  CHECK_THROWS_AS(tokenize("  \t "), EmptySentenceError);
}

TEST_CASE("tokenize splits consecutive punctuation into single chars") {
  CHECK(tokenize("wait...").surfaces() == std::vector<std::string>{"wait", ".", ".", "."});
  CHECK(tokenize("don't").surfaces() == std::vector<std::string>{"don", "'", "t"});
}

namespace {

const char* kSrcTwoDocs = "a b c\nd e\nf g h\n<<<DOC>>>\ni j\nk l\n";
const char* kTgtTwoDocs = "A B\nC D E\nF\n<<<DOC>>>\nG H I\nJ\n";

}  // namespace

TEST_CASE("load_corpus splits documents at the separator") {
  testutil::TempDir tmp("corpus");
  auto src = testutil::write_file(tmp.file("s.txt"), kSrcTwoDocs);
  auto tgt = testutil::write_file(tmp.file("t.txt"), kTgtTwoDocs);
  auto docs = load_corpus(src, tgt);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].size() == 3);
  CHECK(docs[1].size() == 2);
  CHECK(docs[0].source.id == "doc0");
  CHECK(docs[1].target.id == "doc1");
  CHECK(docs[1].source.sentences[1].doc_position == 1);
}

TEST_CASE("load_corpus rejects mismatched document counts") {
  testutil::TempDir tmp("corpus");
  auto src = testutil::write_file(tmp.file("s.txt"), "a\n<<<DOC>>>\nb\n<<<DOC>>>\nc\n");
  auto tgt = testutil::write_file(tmp.file("t.txt"), "a\n<<<DOC>>>\nb\n");
  CHECK_THROWS_AS(load_corpus(src, tgt), AlignmentError);
}

TEST_CASE("load_corpus rejects mismatched sentence counts") {
  testutil::TempDir tmp("corpus");
  auto src = testutil::write_file(tmp.file("s.txt"), "a\nb\n");
  auto tgt = testutil::write_file(tmp.file("t.txt"), "a\n");
  CHECK_THROWS_AS(load_corpus(src, tgt), AlignmentError);
}

TEST_CASE("load_corpus accepts single-sentence documents") {
  testutil::TempDir tmp("corpus");
  auto src = testutil::write_file(tmp.file("s.txt"), "a\n");
  auto tgt = testutil::write_file(tmp.file("t.txt"), "b\n");
  auto docs = load_corpus(src, tgt);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].size() == 1);
}

TEST_CASE("load_corpus errors on missing files and empty documents") {
  testutil::TempDir tmp("corpus");
  CHECK_THROWS_AS(load_corpus(tmp.file("nope.txt"), tmp.file("nope2.txt")), IoError);
  auto src = testutil::write_file(tmp.file("s.txt"), "a\n<<<DOC>>>\n<<<DOC>>>\nb\n");
  auto tgt = testutil::write_file(tmp.file("t.txt"), "a\n");
  CHECK_THROWS_AS(load_corpus(src, tgt), ParseError);
}

TEST_CASE("long sentences are truncated to max_sentence_len") {
  testutil::TempDir tmp("corpus");
  std::string line;
  for (int i = 0; i < 80; ++i) line += "w ";
  auto src = testutil::write_file(tmp.file("s.txt"), line + "\n");
  auto tgt = testutil::write_file(tmp.file("t.txt"), "a\n");
  CorpusOptions options;
  options.max_sentence_len = 64;
  auto docs = load_corpus(src, tgt, options);
  CHECK(docs[0].source.sentences[0].size() == 64);
}

TEST_CASE("build_vocab keeps most frequent tokens with reserved entries") {
  Document doc;
  doc.sentences.push_back(tokenize("a a a b b c"));
  Vocabulary vocab = Vocabulary::build({&doc}, 6, 2);
  CHECK(vocab.size() == 6);
  CHECK(vocab.id("a") == 4);
  CHECK(vocab.id("b") == 5);
  CHECK(vocab.id("c") == kUnkId);
  CHECK(vocab.surface(kPadId) == "<pad>");
  CHECK(vocab.surface(kUnkId) == "<unk>");
}

TEST_CASE("build_vocab of empty corpus is just the reserved tokens") {
  Vocabulary vocab = Vocabulary::build({}, 10, 1);
  CHECK(vocab.size() == 4);
}

TEST_CASE("build_vocab breaks frequency ties lexicographically") {
  Document doc;
  doc.sentences.push_back(tokenize("b a b a"));
  Vocabulary vocab = Vocabulary::build({&doc}, 5, 1);
  CHECK(vocab.size() == 5);
  CHECK(vocab.contains("a"));
  CHECK_FALSE(vocab.contains("b"));
}

TEST_CASE("vocabulary round-trips ids through surfaces") {
  Document doc;
  doc.sentences.push_back(tokenize("the cat sat on the mat"));
  Vocabulary vocab = Vocabulary::build({&doc}, 8, 1);
  apply_vocab(doc, vocab);
  for (const auto& tok : doc.sentences[0].tokens)
    CHECK(vocab.id(vocab.surface(tok.id)) == tok.id);
}

namespace {

ParallelDocument doc_with_k(std::size_t k) {
  ParallelDocument pd;
  pd.source.id = pd.target.id = "doc0";
  for (std::size_t i = 0; i < k; ++i) {
    Sentence s = tokenize("tok" + std::to_string(i));
    s.doc_position = static_cast<int>(i);
    pd.source.sentences.push_back(s);
    pd.target.sentences.push_back(s);
  }
  return pd;
}

}  // namespace

TEST_CASE("make_segments chunks documents without crossing boundaries") {
  auto sizes = [](const std::vector<Segment>& segs) {
    std::vector<std::size_t> out;
    for (const auto& s : segs) out.push_back(s.size());
    return out;
  };
  CHECK(sizes(make_segments(doc_with_k(31), 15)) == std::vector<std::size_t>{15, 15, 1});
  CHECK(sizes(make_segments(doc_with_k(15), 15)) == std::vector<std::size_t>{15});
  CHECK(sizes(make_segments(doc_with_k(1), 15)) == std::vector<std::size_t>{1});
}

TEST_CASE("segmentation is a partition preserving order") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + rng() % 40;
    const std::size_t max_sents = 1 + rng() % 10;
    auto doc = doc_with_k(k);
    auto segs = make_segments(doc, max_sents);
    std::size_t total = 0;
    std::size_t expected_offset = 0;
    for (const auto& seg : segs) {
      CHECK(seg.size() >= 1);
      CHECK(seg.size() <= max_sents);
      CHECK(seg.origin_doc_offset == expected_offset);
      for (std::size_t t = 0; t < seg.size(); ++t)
        CHECK(seg.sentence_pairs[t].first.doc_position ==
              static_cast<int>(seg.origin_doc_offset + t));
      expected_offset += seg.size();
      total += seg.size();
    }
    CHECK(total == k);
  }
}

TEST_CASE("corpus loading is deterministic") {
  testutil::TempDir tmp("corpus");
  auto src = testutil::write_file(tmp.file("s.txt"), kSrcTwoDocs);
  auto tgt = testutil::write_file(tmp.file("t.txt"), kTgtTwoDocs);
  auto a = load_corpus(src, tgt);
  auto b = load_corpus(src, tgt);
  REQUIRE(a.size() == b.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    REQUIRE(a[d].size() == b[d].size());
    for (std::size_t i = 0; i < a[d].size(); ++i)
      CHECK(a[d].source.sentences[i].surfaces() == b[d].source.sentences[i].surfaces());
  }
}
