#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "docrisk/corpus.hpp"
#include "docrisk/lexcohesion.hpp"

namespace docrisk {

// Word-to-topic-vector table in word2vec text format.
class TopicTable {
 public:
  TopicTable() = default;
  explicit TopicTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  void add(const std::string& word, std::vector<double> vec);
  const std::vector<double>* lookup(const std::string& word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Header line `count dim`, then `word v1 ... v_dim` rows. Duplicate words and
// row/dimension mismatches are rejected.
TopicTable load_topic_table(const std::string& path);

struct SentenceTopic {
  std::vector<double> vector;  // zeros when covered == 0
  std::size_t covered = 0;
};

struct CohOptions {
  const StopList* skip = nullptr;  // optionally drop stopwords before averaging
};

// Mean of the table vectors of in-table tokens; out-of-table tokens skipped.
SentenceTopic sentence_topic(const Sentence& sentence, const TopicTable& table,
                             const CohOptions& options = {});

struct CohScore {
  double value = 0.0;  // mean adjacent cosine, in [-1, 1]; 0 when pairs == 0
  std::size_t pairs = 0;
};

// Eq.-style topic coherence: mean cosine between the topic vectors of
// adjacent sentences. Cosine with a zero vector is defined as 0.
CohScore coherence(const std::vector<Sentence>& sentences, const TopicTable& table,
                   const CohOptions& options = {});

}  // namespace docrisk
